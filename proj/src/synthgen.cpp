#include "crowdtime/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "crowdtime/random.hpp"

namespace crowdtime {

namespace {

std::string padded(char prefix, int value, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << value;
  return os.str();
}

int digits(int n) { return std::max(3, static_cast<int>(std::to_string(n - 1).size())); }

int uniform_index(RandomSource& rng, int n) {
  return std::min(static_cast<int>(rng.uniform() * n), n - 1);
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); };
  if (num_tasks < 1 || num_workers < 1) fail("need at least one task and one worker");
  if (num_classes < 2) fail("need at least two classes");
  if (judgments_per_task < 1 || judgments_per_task > num_workers)
    fail("judgments_per_task must be in [1, K]");
  if (!(spammer_fraction >= 0.0 && spammer_fraction < 1.0))
    fail("spammer_fraction must be in [0, 1)");
  if (!(reliable_accuracy > 1.0 / num_classes && reliable_accuracy <= 1.0))
    fail("reliable_accuracy must be in (1/C, 1]");
  if (!(reliable_propensity >= 0.0 && reliable_propensity <= 1.0) ||
      !(spammer_propensity >= 0.0 && spammer_propensity <= 1.0))
    fail("propensities must be in [0, 1]");
  if (!(window_lower < window_upper)) fail("window lower bound must be below the upper bound");
  if (!(window_jitter >= 0.0)) fail("window_jitter must be non-negative");
  if (!(outlier_scale > 1.0)) fail("outlier_scale must exceed 1");
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  const int N = config.num_tasks, K = config.num_workers, C = config.num_classes;
  RandomSource rng(config.seed);
  GroundTruth truth;

  truth.labels.resize(N);
  for (int& t : truth.labels) t = uniform_index(rng, C);

  // choose floor(fraction * K) spammers by a random permutation
  const int num_spammers = static_cast<int>(std::floor(config.spammer_fraction * K + 1e-9));
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  for (int n = K - 1; n > 0; --n) std::swap(order[n], order[uniform_index(rng, n + 1)]);
  truth.spammer.assign(K, false);
  for (int s = 0; s < num_spammers; ++s) truth.spammer[order[s]] = true;

  for (int k = 0; k < K; ++k) truth.worker_ids.push_back(padded('w', k, digits(K)));
  truth.propensity.resize(K);
  Eigen::MatrixXd reliable = Eigen::MatrixXd::Constant(
      C, C, (1.0 - config.reliable_accuracy) / (C - 1));
  reliable.diagonal().setConstant(config.reliable_accuracy);
  for (int k = 0; k < K; ++k) {
    truth.propensity[k] = truth.spammer[k] ? config.spammer_propensity : config.reliable_propensity;
    truth.confusion.push_back(truth.spammer[k] ? Eigen::MatrixXd::Identity(C, C) : reliable);
  }
  truth.spam_distribution = Eigen::VectorXd::Constant(C, 1.0 / C);

  truth.window_lower.resize(N);
  truth.window_upper.resize(N);
  for (int i = 0; i < N; ++i) {
    const double shift =
        config.window_jitter > 0.0 ? config.window_jitter * (2.0 * rng.uniform() - 1.0) : 0.0;
    truth.window_lower[i] = config.window_lower + shift;
    truth.window_upper[i] = config.window_upper + shift;
  }

  const double max_offset = std::log(config.outlier_scale);
  const int tw = digits(N);
  std::vector<JudgmentRecord> records;
  records.reserve(static_cast<std::size_t>(N) * config.judgments_per_task);
  std::vector<int> workers(K);
  for (int i = 0; i < N; ++i) {
    std::iota(workers.begin(), workers.end(), 0);
    for (int n = 0; n < config.judgments_per_task; ++n) {
      std::swap(workers[n], workers[n + uniform_index(rng, K - n)]);
      const int k = workers[n];
      const bool valid = rng.uniform() < truth.propensity[k];
      int label;
      double log_time;
      if (valid) {
        label = sample_categorical(truth.confusion[k].row(truth.labels[i]).transpose(), rng);
        log_time = truth.window_lower[i] +
                   rng.uniform() * (truth.window_upper[i] - truth.window_lower[i]);
      } else {
        label = sample_categorical(truth.spam_distribution, rng);
        const double offset = max_offset * (0.1 + 0.9 * rng.uniform());
        log_time = rng.uniform() < 0.5 ? truth.window_lower[i] - offset
                                       : truth.window_upper[i] + offset;
      }
      truth.valid.push_back(valid ? 1 : 0);
      truth.log_times.push_back(log_time);
      records.push_back({padded('t', i, tw), truth.worker_ids[k], label, std::exp(log_time)});
    }
  }

  std::map<std::string, int> gold;
  for (int i = 0; i < N; ++i) gold.emplace(padded('t', i, tw), truth.labels[i]);
  Dataset d = Dataset::from_records(LabelSpace(C), records, &gold);
  return {std::move(d), std::move(truth)};
}

std::vector<bool> GroundTruth::spammer_by_index(const Dataset& d) const {
  std::vector<bool> out(d.num_workers(), false);
  for (std::size_t k = 0; k < worker_ids.size(); ++k)
    if (auto idx = d.worker_index(worker_ids[k])) out[*idx] = spammer[k];
  return out;
}

void write_truth_json(const SynthConfig& config, const SynthData& data,
                      const std::filesystem::path& path) {
  const auto& truth = data.truth;
  const auto& d = data.dataset;
  nlohmann::json j;
  j["config"] = {{"num_tasks", config.num_tasks},
                 {"num_workers", config.num_workers},
                 {"num_classes", config.num_classes},
                 {"judgments_per_task", config.judgments_per_task},
                 {"spammer_fraction", config.spammer_fraction},
                 {"reliable_accuracy", config.reliable_accuracy},
                 {"reliable_propensity", config.reliable_propensity},
                 {"spammer_propensity", config.spammer_propensity},
                 {"window_lower", config.window_lower},
                 {"window_upper", config.window_upper},
                 {"window_jitter", config.window_jitter},
                 {"outlier_scale", config.outlier_scale},
                 {"seed", config.seed}};
  auto& tasks = j["tasks"] = nlohmann::json::array();
  for (int i = 0; i < d.num_tasks(); ++i)
    tasks.push_back({{"task_id", d.task_id(i)},
                     {"label", truth.labels[i]},
                     {"window_lower", truth.window_lower[i]},
                     {"window_upper", truth.window_upper[i]}});
  auto& workers = j["workers"] = nlohmann::json::array();
  int spammers = 0;
  for (int k = 0; k < static_cast<int>(truth.spammer.size()); ++k) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index c = 0; c < truth.confusion[k].rows(); ++c) {
      std::vector<double> row(truth.confusion[k].cols());
      for (Eigen::Index l = 0; l < truth.confusion[k].cols(); ++l) row[l] = truth.confusion[k](c, l);
      rows.push_back(row);
    }
    workers.push_back({{"worker_id", truth.worker_ids[k]},
                       {"role", truth.spammer[k] ? "spammer" : "reliable"},
                       {"propensity", truth.propensity[k]},
                       {"confusion", rows}});
    spammers += truth.spammer[k];
  }
  j["num_spammers"] = spammers;
  j["judgment_valid"] = std::vector<int>(truth.valid.begin(), truth.valid.end());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace crowdtime
