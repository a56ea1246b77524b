#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowdtime/bcctime.hpp"
#include "crowdtime/dataset.hpp"
#include "crowdtime/error.hpp"
#include "crowdtime/metrics.hpp"
#include "crowdtime/models.hpp"
#include "crowdtime/summary_io.hpp"
#include "crowdtime/synthgen.hpp"

namespace fs = std::filesystem;
using namespace crowdtime;

namespace {

struct DataOptions {
  std::string judgments;
  std::string gold;
  int classes = 2;
};

struct SeedOptions {
  std::uint64_t value = 1;
  CLI::Option* flag = nullptr;

  // flag > CROWDTIME_SEED > 1
  std::pair<std::uint64_t, std::string> resolve() const {
    if (flag && flag->count() > 0) return {value, "flag"};
    if (const char* env = std::getenv("CROWDTIME_SEED")) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return {v, "env"};
      } catch (const std::exception&) {
      }
      throw Error(ErrorKind::InvalidArgument, "CROWDTIME_SEED is not an unsigned integer");
    }
    return {1, "default"};
  }
};

struct HyperOptions {
  std::string time_transform = "log";
  double p0 = 1.0, s0 = 1.0;
  double pi0_diag = 0.0, pi0_offdiag = 0.0;
  double alpha0 = 0.0, beta0 = 0.0;
  double sigma0_mean = 0.0, gamma0_precision = 0.0;
  double lambda0_mean = 0.0, delta0_precision = 0.0;
  std::vector<std::pair<CLI::Option*, double*>> set;

  void add(CLI::App& app) {
    app.add_option("--time-transform", time_transform, "none or log")
        ->check(CLI::IsMember({"none", "log"}));
    auto hp = [&](const char* name, double& field, const char* help) {
      set.emplace_back(app.add_option(name, field, help), &field);
    };
    hp("--hp.p0", p0, "class-proportion pseudo-count (every class)");
    hp("--hp.s0", s0, "spam-distribution pseudo-count (every class)");
    hp("--hp.pi0-diag", pi0_diag, "confusion prior on the diagonal");
    hp("--hp.pi0-offdiag", pi0_offdiag, "confusion prior mass off the diagonal");
    hp("--hp.alpha0", alpha0, "propensity Beta true count");
    hp("--hp.beta0", beta0, "propensity Beta false count");
    hp("--hp.sigma0-mean", sigma0_mean, "lower threshold prior mean (transformed units)");
    hp("--hp.gamma0-precision", gamma0_precision, "lower threshold prior precision");
    hp("--hp.lambda0-mean", lambda0_mean, "upper threshold prior mean (transformed units)");
    hp("--hp.delta0-precision", delta0_precision, "upper threshold prior precision");
  }

  bool given(const double* field) const {
    for (const auto& [opt, f] : set)
      if (f == field) return opt->count() > 0;
    return false;
  }

  Hyperparameters resolve(const Dataset& d) const {
    Hyperparameters h =
        Hyperparameters::defaults(d.num_classes(), d.num_tasks(), parse_time_transform(time_transform));
    if (given(&p0)) h.p0.setConstant(p0);
    if (given(&s0)) h.s0.setConstant(s0);
    if (given(&pi0_diag)) h.pi0_diag = pi0_diag;
    if (given(&pi0_offdiag)) h.pi0_offdiag = pi0_offdiag;
    if (given(&alpha0)) h.alpha0 = alpha0;
    if (given(&beta0)) h.beta0 = beta0;
    if (given(&sigma0_mean)) h.sigma0_mean = sigma0_mean;
    if (given(&gamma0_precision)) h.gamma0_precision = gamma0_precision;
    if (given(&lambda0_mean)) h.lambda0_mean = lambda0_mean;
    if (given(&delta0_precision)) h.delta0_precision = delta0_precision;
    h.validate(d.num_classes());
    return h;
  }
};

struct FitOptions {
  GibbsSettings gibbs;
  CommunitySettings communities;
  HyperOptions hyper;
  SeedOptions seed;

  void add(CLI::App& app) {
    app.add_option("--iterations", gibbs.iterations, "Gibbs sweeps per chain, burn-in included")
        ->capture_default_str();
    app.add_option("--burnin", gibbs.burnin, "discarded sweeps")->capture_default_str();
    app.add_option("--chains", gibbs.chains, "independent chains")->capture_default_str();
    app.add_option("--communities", communities.num_communities, "CBCC communities")
        ->capture_default_str();
    app.add_option("--community-concentration", communities.concentration,
                   "CBCC worker-to-community coupling")
        ->capture_default_str();
    seed.flag = app.add_option("--seed", seed.value, "random seed (default: $CROWDTIME_SEED or 1)");
    hyper.add(app);
  }

  ModelSettings resolve(const Dataset& d) const {
    gibbs.validate();
    ModelSettings m;
    m.hyperparameters = hyper.resolve(d);
    m.gibbs = gibbs;
    m.communities = communities;
    return m;
  }
};

void add_data(CLI::App& app, DataOptions& data, bool gold_required) {
  app.add_option("--judgments", data.judgments, "judgment CSV")->required();
  auto* g = app.add_option("--gold", data.gold, "gold label CSV");
  if (gold_required) g->required();
  app.add_option("--classes", data.classes, "number of classes")->capture_default_str();
}

Dataset load(const DataOptions& data) {
  std::optional<fs::path> gold;
  if (!data.gold.empty()) gold = data.gold;
  return load_judgments_csv(data.judgments, LabelSpace(data.classes), gold);
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir);
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

nlohmann::json seed_json(const std::pair<std::uint64_t, std::string>& seed) {
  return {{"value", seed.first}, {"source", seed.second}};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---- aggregate -------------------------------------------------------------

struct AggregateCmd {
  DataOptions data;
  FitOptions fit;
  std::string model;
  std::string out = ".";

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("aggregate", "fit one aggregator and write its posterior");
    add_data(*app, data, false);
    app->add_option("--model", model, "mv, vd, random, onecoin, bcc, cbcc, bccprop, bcctime")
        ->required();
    app->add_option("--out", out, "output directory")->capture_default_str();
    fit.add(*app);
    app->callback([this] { run(); });
  }

  void run() const {
    const Dataset d = load(data);
    const ModelSettings settings = fit.resolve(d);
    const auto seed = fit.seed.resolve();
    RandomSource rng(seed.first);
    PosteriorSummary s = run_model(model, d, settings, rng);

    const fs::path dir = prepare_out(out);
    write_atomic(dir / "labels.csv", [&](std::ostream& o) { write_labels_csv(s, o); });
    write_atomic(dir / "workers.csv", [&](std::ostream& o) { write_workers_csv(s, o); });
    if (s.thresholds) {
      const auto durations = extract_durations(s);
      write_atomic(dir / "durations.csv",
                   [&](std::ostream& o) { write_durations_csv(durations, o); });
    }
    nlohmann::json j = run_json(s);
    j["command"] = "aggregate";
    j["judgments"] = data.judgments;
    j["seed"] = seed_json(seed);
    j["hyperparameters"] = to_json(settings.hyperparameters);
    if (model == "cbcc")
      j["communities"] = {{"count", settings.communities.num_communities},
                          {"concentration", settings.communities.concentration}};
    write_json(dir / "run.json", j);
    for (const auto& w : s.warnings) std::cerr << "crowdtime: warning: " << w << '\n';
  }
};

// ---- evaluate --------------------------------------------------------------

struct EvaluateCmd {
  DataOptions data;
  FitOptions fit;
  std::string models = "mv,vd,random,onecoin,bcc,cbcc,bccprop,bcctime";
  std::vector<double> fractions;
  int repeats = 5;
  std::string out = ".";

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("evaluate", "score aggregators against gold labels");
    add_data(*app, data, false);
    app->add_option("--models", models, "comma-separated model list")->capture_default_str();
    app->add_option("--subsample", fractions, "judgment fractions for the subsample curve")
        ->delimiter(',');
    app->add_option("--repeats", repeats, "subsample repeats per fraction")->capture_default_str();
    app->add_option("--out", out, "output directory")->capture_default_str();
    fit.add(*app);
    app->callback([this] { run(); });
  }

  void run() const {
    if (data.gold.empty()) throw Error(ErrorKind::MissingGold, "evaluate needs --gold");
    const Dataset d = load(data);
    d.require_gold();
    const ModelSettings settings = fit.resolve(d);
    const auto seed = fit.seed.resolve();

    std::vector<std::string> names;
    std::vector<std::string> skipped;
    for (const auto& m : split_list(models)) {
      if (m == "onecoin" && d.num_classes() != 2) {
        skipped.push_back(m);
        continue;
      }
      names.push_back(m);
    }
    for (const auto& m : names) (void)run_model_check(m);

    std::vector<EvaluationReport> reports;
    nlohmann::json timings = nlohmann::json::object();
    std::vector<std::pair<std::string, std::vector<SubsamplePoint>>> curves;
    for (const auto& m : names) {
      RandomSource rng(seed.first);
      const auto s = run_model(m, d, settings, rng);
      reports.push_back(evaluate(s, d));
      timings[m] = s.run.wall_seconds;
      if (!fractions.empty()) {
        Aggregator agg = [&](const Dataset& sub, RandomSource& r) {
          return run_model(m, sub, settings, r);
        };
        curves.emplace_back(m, subsample_curve(d, fractions, agg, seed.first, repeats));
      }
    }

    const fs::path dir = prepare_out(out);
    write_atomic(dir / "evaluation.csv", [&](std::ostream& o) { write_evaluation_csv(reports, o); });
    if (!curves.empty())
      write_atomic(dir / "subsample.csv", [&](std::ostream& o) { write_subsample_csv(curves, o); });
    nlohmann::json j;
    j["command"] = "evaluate";
    j["judgments"] = data.judgments;
    j["gold"] = data.gold;
    j["models"] = names;
    j["skipped"] = skipped;
    j["seed"] = seed_json(seed);
    j["gibbs"] = to_json(settings.gibbs);
    j["hyperparameters"] = to_json(settings.hyperparameters);
    j["subsample"] = {{"fractions", fractions}, {"repeats", repeats}};
    j["wall_seconds"] = timings;
    write_json(dir / "run.json", j);

    std::cout << "method,auc,average_recall,accuracy\n";
    for (const auto& r : reports) {
      std::cout << r.method << ',';
      if (r.auc) std::cout << *r.auc;
      std::cout << ',' << r.average_recall << ',' << r.accuracy << '\n';
    }
    for (const auto& m : skipped)
      std::cerr << "crowdtime: warning: skipped " << m << " (binary labels only)\n";
  }

  static bool run_model_check(const std::string& m) {
    const auto& known = model_names();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw Error(ErrorKind::UnknownModel, "unknown model '" + m + "'");
    return true;
  }
};

// ---- analyze-time ----------------------------------------------------------

struct AnalyzeTimeCmd {
  DataOptions data;
  std::vector<double> thresholds;
  std::vector<double> edges;
  int bins = 12;
  int min_judgments = 3;
  std::string out = ".";

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("analyze-time", "relate completion time to label quality");
    add_data(*app, data, false);
    app->add_option("--thresholds", thresholds, "cumulative time thresholds in seconds")
        ->delimiter(',');
    app->add_option("--histogram-edges", edges, "per-task histogram edges in seconds")
        ->delimiter(',');
    app->add_option("--bins", bins, "default log-spaced threshold count")->capture_default_str();
    app->add_option("--min-judgments", min_judgments, "minimum judgments for a task correlation")
        ->capture_default_str();
    app->add_option("--out", out, "output directory")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() const {
    if (data.gold.empty()) throw Error(ErrorKind::MissingGold, "analyze-time needs --gold");
    const Dataset d = load(data);
    d.require_gold();
    const auto cuts = thresholds.empty() ? default_time_thresholds(d, bins) : thresholds;
    const auto hist = edges.empty() ? cuts : edges;
    const bool binary = d.num_classes() == 2;

    const auto binned = time_binned_quality(d, cuts);
    const auto corr = per_task_quality_time(d, min_judgments);
    const auto histograms = per_task_time_histograms(d, hist);

    const fs::path dir = prepare_out(out);
    write_atomic(dir / "binned_quality.csv",
                 [&](std::ostream& o) { write_binned_quality_csv(binned, binary, o); });
    write_atomic(dir / "per_task_correlation.csv",
                 [&](std::ostream& o) { write_correlation_csv(corr, o); });
    write_atomic(dir / "time_histograms.csv",
                 [&](std::ostream& o) { write_histograms_csv(histograms, o); });
    nlohmann::json j;
    j["command"] = "analyze-time";
    j["judgments"] = data.judgments;
    j["gold"] = data.gold;
    j["thresholds"] = cuts;
    j["thresholds_source"] = thresholds.empty() ? "default" : "flag";
    j["histogram_edges"] = hist;
    j["min_judgments"] = min_judgments;
    j["binary_columns"] = binary;
    write_json(dir / "run.json", j);
  }
};

// ---- simulate --------------------------------------------------------------

struct SimulateCmd {
  SynthConfig config;
  double lower_seconds = 10.0;
  double upper_seconds = 50.0;
  SeedOptions seed;
  std::string out = ".";

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("simulate", "forward-sample a synthetic dataset");
    app->add_option("--tasks", config.num_tasks)->capture_default_str();
    app->add_option("--workers", config.num_workers)->capture_default_str();
    app->add_option("--classes", config.num_classes)->capture_default_str();
    app->add_option("--judgments-per-task", config.judgments_per_task)->capture_default_str();
    app->add_option("--spammer-fraction", config.spammer_fraction)->capture_default_str();
    app->add_option("--accuracy", config.reliable_accuracy, "reliable worker accuracy")
        ->capture_default_str();
    app->add_option("--reliable-propensity", config.reliable_propensity)->capture_default_str();
    app->add_option("--spammer-propensity", config.spammer_propensity)->capture_default_str();
    app->add_option("--window-lower", lower_seconds, "valid window start, seconds")
        ->capture_default_str();
    app->add_option("--window-upper", upper_seconds, "valid window end, seconds")
        ->capture_default_str();
    app->add_option("--window-jitter", config.window_jitter, "per-task log-window shift")
        ->capture_default_str();
    app->add_option("--outlier-scale", config.outlier_scale, "outlier distance factor")
        ->capture_default_str();
    seed.flag = app->add_option("--seed", seed.value, "random seed (default: $CROWDTIME_SEED or 1)");
    app->add_option("--out", out, "output directory")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    if (!(lower_seconds > 0.0 && upper_seconds > 0.0))
      throw Error(ErrorKind::ConfigInvalid, "window bounds must be positive seconds");
    config.window_lower = std::log(lower_seconds);
    config.window_upper = std::log(upper_seconds);
    const auto s = seed.resolve();
    config.seed = s.first;
    const SynthData data = generate(config);

    const fs::path dir = prepare_out(out);
    auto atomic_path = [&](const char* name, auto&& writer) {
      fs::path tmp = dir / name;
      tmp += ".tmp";
      writer(tmp);
      fs::rename(tmp, dir / name);
    };
    atomic_path("judgments.csv", [&](const fs::path& p) { write_judgments_csv(data.dataset, p); });
    atomic_path("gold.csv", [&](const fs::path& p) { write_gold_csv(data.dataset, p); });
    atomic_path("truth.json", [&](const fs::path& p) { write_truth_json(config, data, p); });
  }
};

// ---- stats -----------------------------------------------------------------

struct StatsCmd {
  DataOptions data;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("stats", "print dataset summary statistics as JSON");
    add_data(*app, data, false);
    app->callback([this] { run(); });
  }

  void run() const {
    const Dataset d = load(data);
    const DatasetStats s = dataset_stats(d);
    nlohmann::json j{{"num_judgments", s.num_judgments},
                     {"num_tasks", s.num_tasks},
                     {"num_workers", s.num_workers},
                     {"num_classes", s.num_classes},
                     {"judgments_per_task", s.judgments_per_task},
                     {"judgments_per_worker", s.judgments_per_worker}};
    if (s.judgment_accuracy) j["judgment_accuracy"] = *s.judgment_accuracy;
    std::cout << j.dump(2) << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdtime: truth inference for crowdsourced labels with completion times"};
  app.require_subcommand(1);
  AggregateCmd aggregate;
  EvaluateCmd evaluate_cmd;
  AnalyzeTimeCmd analyze;
  SimulateCmd simulate;
  StatsCmd stats;
  aggregate.add(app);
  evaluate_cmd.add(app);
  analyze.add(app);
  simulate.add(app);
  stats.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "crowdtime: error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "crowdtime: error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 3 : 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "crowdtime: error: Io: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "crowdtime: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
