#include "crowdtime/bcctime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "crowdtime/baselines.hpp"
#include "crowdtime/bcc.hpp"
#include "crowdtime/detail/chains.hpp"

namespace crowdtime {

namespace {

constexpr double kInitMargin = 1e-3;

struct ChainResult {
  Eigen::MatrixXd label_counts;         // N x C
  std::vector<Eigen::MatrixXd> pi_sum;  // K
  Eigen::VectorXd psi_sum;              // K
  Eigen::VectorXd valid_counts;         // J
  Eigen::VectorXd sigma_sum, sigma_sq, lambda_sum, lambda_sq;
  int retained = 0;
};

class BccTimeChain {
 public:
  BccTimeChain(const Dataset& d, const Hyperparameters& h, bool learn_thresholds,
               const BccTimeStart* start, RandomSource& rng)
      : d_(d),
        h_(h),
        learn_thresholds_(learn_thresholds),
        rng_(rng),
        C_(d.num_classes()),
        N_(d.num_tasks()),
        K_(d.num_workers()) {
    prior_ = h.confusion_prior(C_);
    label_cond_ = Eigen::MatrixXd::Zero(N_, C_);
    if (start != nullptr) {
      if (static_cast<int>(start->labels.size()) != N_ ||
          static_cast<int>(start->valid.size()) != d.num_judgments() ||
          static_cast<int>(start->sigma.size()) != N_ ||
          static_cast<int>(start->lambda.size()) != N_)
        throw Error(ErrorKind::InvalidArgument, "start state does not match the dataset");
      t_ = start->labels;
      v_ = start->valid;
      sigma_ = start->sigma;
      lambda_ = start->lambda;
    } else {
      const Eigen::MatrixXd votes = vote_counts(d);
      t_.resize(N_);
      for (int i = 0; i < N_; ++i) t_[i] = argmax_lowest(votes.row(i).transpose());
      v_.assign(d.num_judgments(), 1);
      sigma_.resize(N_);
      lambda_.resize(N_);
      for (int i = 0; i < N_; ++i) {
        double lo = kInf, hi = -kInf;
        for (int j : d.task_judgments(i)) {
          lo = std::min(lo, d.judgment(j).time);
          hi = std::max(hi, d.judgment(j).time);
        }
        sigma_[i] = std::min(h.sigma0_mean, lo - kInitMargin);
        lambda_[i] = std::max(h.lambda0_mean, hi + kInitMargin);
      }
    }
    if (!learn_thresholds_) {
      std::fill(sigma_.begin(), sigma_.end(), -kInf);
      std::fill(lambda_.begin(), lambda_.end(), kInf);
    }
    set_parameters_to_conditional_means();
  }

  void sweep() {
    sample_validity();
    sample_propensity();
    sample_labels();
    p_ = sample_dirichlet(h_.p0 + class_counts(t_, C_), rng_);
    s_ = sample_dirichlet(h_.s0 + invalid_label_counts(d_, v_), rng_);
    counts_ = confusion_counts(d_, t_, v_);
    for (int k = 0; k < K_; ++k)
      for (int c = 0; c < C_; ++c)
        pi_[k].row(c) =
            sample_dirichlet((prior_.row(c) + counts_[k].row(c)).transpose(), rng_).transpose();
    if (learn_thresholds_) sample_thresholds();
  }

  void accumulate(ChainResult& out) const {
    out.label_counts += label_cond_;
    for (int k = 0; k < K_; ++k) {
      out.pi_sum[k] += normalize_rows(prior_ + counts_[k]);
      out.psi_sum[k] += (h_.alpha0 + valid_per_worker_[k]) /
                        (h_.alpha0 + h_.beta0 + d_.worker_judgments(k).size());
    }
    for (int j = 0; j < d_.num_judgments(); ++j) out.valid_counts[j] += v_[j];
    if (learn_thresholds_) {
      for (int i = 0; i < N_; ++i) {
        out.sigma_sum[i] += sigma_[i];
        out.sigma_sq[i] += sigma_[i] * sigma_[i];
        out.lambda_sum[i] += lambda_[i];
        out.lambda_sq[i] += lambda_[i] * lambda_[i];
      }
    }
    ++out.retained;
  }

  BccTimeSampleView view(int sweep, int chain) const {
    return {sweep, chain, t_, v_, sigma_, lambda_, psi_};
  }

 private:
  bool inside(int i, double tau) const { return sigma_[i] < tau && tau < lambda_[i]; }

  void set_parameters_to_conditional_means() {
    p_ = h_.p0 + class_counts(t_, C_);
    p_ /= p_.sum();
    const Eigen::VectorXd spam = h_.s0 + invalid_label_counts(d_, v_);
    s_ = spam / spam.sum();
    counts_ = confusion_counts(d_, t_, v_);
    pi_.resize(K_);
    for (int k = 0; k < K_; ++k) pi_[k] = normalize_rows(prior_ + counts_[k]);
    count_valid_per_worker();
    psi_.resize(K_);
    for (int k = 0; k < K_; ++k)
      psi_[k] = (h_.alpha0 + valid_per_worker_[k]) /
                (h_.alpha0 + h_.beta0 + d_.worker_judgments(k).size());
  }

  void count_valid_per_worker() {
    valid_per_worker_.assign(K_, 0);
    for (int j = 0; j < d_.num_judgments(); ++j) valid_per_worker_[d_.judgment(j).worker] += v_[j];
  }

  void sample_validity() {
    for (int j = 0; j < d_.num_judgments(); ++j) {
      const auto& jd = d_.judgment(j);
      if (!inside(jd.task, jd.time)) {
        v_[j] = 0;
        continue;
      }
      const double valid_w = psi_[jd.worker] * pi_[jd.worker](t_[jd.task], jd.label);
      const double spam_w = (1.0 - psi_[jd.worker]) * s_[jd.label];
      v_[j] = rng_.uniform() * (valid_w + spam_w) < valid_w ? 1 : 0;
    }
    count_valid_per_worker();
  }

  void sample_propensity() {
    for (int k = 0; k < K_; ++k) {
      const double n = static_cast<double>(d_.worker_judgments(k).size());
      psi_[k] = sample_beta(h_.alpha0 + valid_per_worker_[k],
                            h_.beta0 + n - valid_per_worker_[k], rng_);
    }
  }

  void sample_labels() {
    std::vector<Eigen::MatrixXd> log_pi(K_);
    for (int k = 0; k < K_; ++k) log_pi[k] = pi_[k].array().log().matrix();
    const Eigen::VectorXd log_p = p_.array().log().matrix();
    Eigen::VectorXd logw(C_);
    for (int i = 0; i < N_; ++i) {
      logw = log_p;
      for (int j : d_.task_judgments(i)) {
        if (!v_[j]) continue;
        const auto& jd = d_.judgment(j);
        logw += log_pi[jd.worker].col(jd.label);
      }
      // keep the normalised conditional for the Rao-Blackwellised label estimate
      const Eigen::VectorXd w = (logw.array() - logw.maxCoeff()).exp().matrix();
      label_cond_.row(i) = (w / w.sum()).transpose();
      t_[i] = sample_categorical(w, rng_);
    }
  }

  void sample_thresholds() {
    for (int i = 0; i < N_; ++i) {
      double lo = kInf, hi = -kInf;
      for (int j : d_.task_judgments(i)) {
        if (!v_[j]) continue;
        lo = std::min(lo, d_.judgment(j).time);
        hi = std::max(hi, d_.judgment(j).time);
      }
      // strict inequalities: nudge off the bound if the draw lands on it
      double sigma = sample_truncated_gaussian(h_.sigma0_mean, h_.gamma0_precision, -kInf, lo, rng_);
      if (sigma >= lo) sigma = std::nextafter(lo, -kInf);
      double lambda = sample_truncated_gaussian(h_.lambda0_mean, h_.delta0_precision, hi, kInf, rng_);
      if (lambda <= hi) lambda = std::nextafter(hi, kInf);
      sigma_[i] = sigma;
      lambda_[i] = lambda;
    }
  }

  const Dataset& d_;
  const Hyperparameters& h_;
  bool learn_thresholds_;
  RandomSource& rng_;
  int C_, N_, K_;
  Eigen::MatrixXd prior_;
  std::vector<int> t_;
  Eigen::MatrixXd label_cond_;  // N x C, conditional of t from the last sweep
  std::vector<char> v_;
  std::vector<double> sigma_, lambda_, psi_;
  std::vector<int> valid_per_worker_;
  Eigen::VectorXd p_, s_;
  std::vector<Eigen::MatrixXd> pi_;
  std::vector<Eigen::MatrixXd> counts_;
};

PosteriorSummary run_bcctime(const Dataset& d, const Hyperparameters& h,
                             const GibbsSettings& settings, RandomSource& rng,
                             const BccTimeOptions& options, bool learn_thresholds,
                             std::string method) {
  const auto start = std::chrono::steady_clock::now();
  settings.validate();
  h.validate(d.num_classes());
  const int C = d.num_classes(), N = d.num_tasks(), K = d.num_workers();

  auto results = detail::run_chains<ChainResult>(settings, rng, [&](RandomSource& chain_rng, int chain_index) {
    ChainResult r;
    r.label_counts = Eigen::MatrixXd::Zero(N, C);
    r.pi_sum.assign(K, Eigen::MatrixXd::Zero(C, C));
    r.psi_sum = Eigen::VectorXd::Zero(K);
    r.valid_counts = Eigen::VectorXd::Zero(d.num_judgments());
    r.sigma_sum = r.sigma_sq = r.lambda_sum = r.lambda_sq = Eigen::VectorXd::Zero(N);
    BccTimeChain chain(d, h, learn_thresholds, options.start, chain_rng);
    for (int it = 0; it < settings.iterations; ++it) {
      chain.sweep();
      if (it < settings.burnin) continue;
      chain.accumulate(r);
      if (options.observer) options.observer(chain.view(it, chain_index));
    }
    return r;
  });

  ChainResult total = results[0];
  for (std::size_t c = 1; c < results.size(); ++c) {
    const auto& r = results[c];
    total.label_counts += r.label_counts;
    for (int k = 0; k < K; ++k) total.pi_sum[k] += r.pi_sum[k];
    total.psi_sum += r.psi_sum;
    total.valid_counts += r.valid_counts;
    total.sigma_sum += r.sigma_sum;
    total.sigma_sq += r.sigma_sq;
    total.lambda_sum += r.lambda_sum;
    total.lambda_sq += r.lambda_sq;
    total.retained += r.retained;
  }
  const double n = total.retained;

  PosteriorSummary s = empty_summary(d, std::move(method));
  s.label_probs = total.label_counts / n;
  for (auto& pi : total.pi_sum) s.confusion.push_back(pi / n);
  s.propensity = total.psi_sum / n;
  s.validity = total.valid_counts / n;
  if (learn_thresholds) {
    ThresholdPosterior tp;
    tp.transform = d.time_transform();
    tp.sigma_mean = total.sigma_sum / n;
    tp.lambda_mean = total.lambda_sum / n;
    tp.sigma_sd = (total.sigma_sq / n - tp.sigma_mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    tp.lambda_sd = (total.lambda_sq / n - tp.lambda_mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    s.thresholds = tp;
  }
  if (d.time_transform() != h.time_transform)
    s.warnings.push_back("InconsistentTransform: hyperparameters assume '" +
                         std::string(to_string(h.time_transform)) + "' times but the data is '" +
                         std::string(to_string(d.time_transform())) + "'");
  s.run.seed = rng.seed();
  s.run.gibbs = settings;
  s.run.hyperparameters = h;
  s.run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace

Eigen::VectorXd invalid_label_counts(const Dataset& d, std::span<const char> valid) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(d.num_classes());
  const auto js = d.judgments();
  for (std::size_t j = 0; j < js.size(); ++j)
    if (!valid[j]) counts[js[j].label] += 1.0;
  return counts;
}

PosteriorSummary bcctime_gibbs(const Dataset& d, const Hyperparameters& h,
                               const GibbsSettings& settings, RandomSource& rng,
                               const BccTimeOptions& options) {
  return run_bcctime(d, h, settings, rng, options, true, "bcctime");
}

PosteriorSummary bccpropensity_gibbs(const Dataset& d, const Hyperparameters& h,
                                     const GibbsSettings& settings, RandomSource& rng,
                                     const BccTimeOptions& options) {
  return run_bcctime(d, h, settings, rng, options, false, "bccprop");
}

std::vector<TaskDuration> extract_durations(const PosteriorSummary& summary) {
  if (!summary.thresholds)
    throw Error(ErrorKind::MissingDurationState,
                "summary from '" + summary.method + "' has no duration thresholds");
  const auto& tp = *summary.thresholds;
  std::vector<TaskDuration> out;
  out.reserve(summary.task_ids.size());
  for (std::size_t i = 0; i < summary.task_ids.size(); ++i) {
    TaskDuration td;
    td.task_id = summary.task_ids[i];
    td.sigma_mean = tp.sigma_mean[i];
    td.sigma_sd = tp.sigma_sd[i];
    td.lambda_mean = tp.lambda_mean[i];
    td.lambda_sd = tp.lambda_sd[i];
    td.lower_seconds = to_seconds(td.sigma_mean, tp.transform);
    td.upper_seconds = to_seconds(td.lambda_mean, tp.transform);
    td.half_width = 0.5 * (td.lambda_mean - td.sigma_mean);
    td.midpoint = 0.5 * (td.sigma_mean + td.lambda_mean);
    out.push_back(td);
  }
  return out;
}

}  // namespace crowdtime
