#include "crowdtime/summary_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <system_error>

#include "crowdtime/error.hpp"

namespace crowdtime {

namespace {

constexpr int kPrecision = 12;

void number(std::ostream& out, double v) {
  if (std::isnan(v)) return;  // empty cell
  out << v;
}

void optional_number(std::ostream& out, const std::optional<double>& v) {
  if (v) number(out, *v);
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << std::setprecision(kPrecision);
    body(out);
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename into " + path.string());
  }
}

void write_labels_csv(const PosteriorSummary& s, std::ostream& out) {
  out << std::setprecision(kPrecision);
  const int C = s.num_classes();
  out << "task_id,label";
  for (int c = 0; c < C; ++c) out << ",p_" << c;
  out << '\n';
  const auto labels = hard_labels(s.label_probs);
  for (int i = 0; i < s.num_tasks(); ++i) {
    out << s.task_ids[i] << ',' << labels[i];
    for (int c = 0; c < C; ++c) out << ',' << s.label_probs(i, c);
    out << '\n';
  }
}

void write_workers_csv(const PosteriorSummary& s, std::ostream& out) {
  out << std::setprecision(kPrecision);
  const int C = s.num_classes();
  out << "worker_id";
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b) out << ",pi_" << a << '_' << b;
  out << ",propensity\n";
  for (std::size_t k = 0; k < s.worker_ids.size(); ++k) {
    out << s.worker_ids[k];
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b) {
        out << ',';
        if (!s.confusion.empty()) out << s.confusion[k](a, b);
      }
    out << ',';
    if (s.propensity) out << (*s.propensity)[static_cast<Eigen::Index>(k)];
    out << '\n';
  }
}

void write_durations_csv(std::span<const TaskDuration> durations, std::ostream& out) {
  out << std::setprecision(kPrecision);
  out << "task_id,sigma_mean,sigma_sd,lambda_mean,lambda_sd,lower_seconds,upper_seconds,"
         "midpoint,half_width\n";
  for (const auto& t : durations)
    out << t.task_id << ',' << t.sigma_mean << ',' << t.sigma_sd << ',' << t.lambda_mean << ','
        << t.lambda_sd << ',' << t.lower_seconds << ',' << t.upper_seconds << ',' << t.midpoint
        << ',' << t.half_width << '\n';
}

void write_evaluation_csv(std::span<const EvaluationReport> reports, std::ostream& out) {
  out << std::setprecision(kPrecision);
  out << "method,auc,average_recall,accuracy,tasks_scored\n";
  for (const auto& r : reports) {
    out << r.method << ',';
    optional_number(out, r.auc);
    out << ',' << r.average_recall << ',' << r.accuracy << ',' << r.tasks_scored << '\n';
  }
}

void write_subsample_csv(std::span<const std::pair<std::string, std::vector<SubsamplePoint>>> curves,
                         std::ostream& out) {
  out << std::setprecision(kPrecision);
  out << "method,fraction,mean,sd,repeats\n";
  for (const auto& [method, points] : curves)
    for (const auto& p : points)
      out << method << ',' << p.fraction << ',' << p.mean << ',' << p.sd << ',' << p.repeats
          << '\n';
}

void write_binned_quality_csv(std::span<const BinnedQuality> rows, bool binary, std::ostream& out) {
  out << std::setprecision(kPrecision);
  out << "threshold,judgments,correct,accuracy";
  if (binary) out << ",true_positives,false_positives,positives,precision,recall";
  out << '\n';
  for (const auto& r : rows) {
    out << r.threshold << ',' << r.judgments << ',' << r.correct << ',';
    number(out, r.accuracy);
    if (binary) {
      out << ',' << r.true_positives << ',' << r.false_positives << ',' << r.positives << ',';
      optional_number(out, r.precision);
      out << ',';
      optional_number(out, r.recall);
    }
    out << '\n';
  }
}

void write_correlation_csv(std::span<const TaskCorrelation> rows, std::ostream& out) {
  out << std::setprecision(kPrecision);
  out << "task_id,judgments,pearson_r,p_value\n";
  for (const auto& r : rows) {
    out << r.task_id << ',' << r.judgments << ',';
    optional_number(out, r.pearson_r);
    out << ',';
    optional_number(out, r.p_value);
    out << '\n';
  }
}

void write_histograms_csv(std::span<const TimeHistogramBin> rows, std::ostream& out) {
  out << std::setprecision(kPrecision);
  out << "task_id,lower,upper,judgments,correct\n";
  for (const auto& r : rows)
    out << r.task_id << ',' << r.lower << ',' << r.upper << ',' << r.judgments << ','
        << r.correct << '\n';
}

nlohmann::json to_json(const Hyperparameters& h) {
  return {{"p0", vector_json(h.p0)},
          {"s0", vector_json(h.s0)},
          {"pi0_diag", h.pi0_diag},
          {"pi0_offdiag", h.pi0_offdiag},
          {"alpha0", h.alpha0},
          {"beta0", h.beta0},
          {"sigma0_mean", h.sigma0_mean},
          {"gamma0_precision", h.gamma0_precision},
          {"lambda0_mean", h.lambda0_mean},
          {"delta0_precision", h.delta0_precision},
          {"time_transform", std::string(to_string(h.time_transform))}};
}

nlohmann::json to_json(const GibbsSettings& g) {
  return {{"iterations", g.iterations}, {"burnin", g.burnin}, {"chains", g.chains}};
}

nlohmann::json run_json(const PosteriorSummary& s) {
  nlohmann::json j;
  j["method"] = s.method;
  j["seed"] = s.run.seed;
  j["gibbs"] = to_json(s.run.gibbs);
  j["hyperparameters"] = s.run.hyperparameters ? to_json(*s.run.hyperparameters) : nlohmann::json();
  j["num_tasks"] = s.num_tasks();
  j["num_workers"] = s.worker_ids.size();
  j["num_classes"] = s.num_classes();
  j["warnings"] = s.warnings;
  j["wall_seconds"] = s.run.wall_seconds;
  return j;
}

}  // namespace crowdtime
