#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crowdtime/dataset.hpp"

namespace crowdtime {

/// Forward-simulation settings. Windows are in log-seconds.
struct SynthConfig {
  int num_tasks = 200;
  int num_workers = 30;
  int num_classes = 2;
  int judgments_per_task = 5;
  double spammer_fraction = 0.2;  ///< floor(fraction * K) workers become spammers
  double reliable_accuracy = 0.85;
  double reliable_propensity = 1.0;  ///< P(valid attempt) for reliable workers
  double spammer_propensity = 0.0;   ///< P(valid attempt) for spammers
  double window_lower = 2.302585092994046;  ///< ln 10
  double window_upper = 3.912023005428146;  ///< ln 50
  double window_jitter = 0.0;  ///< per-task shift of the window, uniform in +-jitter
  /// Invalid times land outside the window by a distance drawn uniformly in
  /// (0.1, 1] * ln(outlier_scale), half below and half above. Must exceed 1.
  double outlier_scale = 50.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Everything planted by the generator. Worker vectors are in planted order
/// (worker_ids[k]); task and judgment vectors follow the dataset order.
struct GroundTruth {
  std::vector<int> labels;            ///< per task
  std::vector<std::string> worker_ids;
  std::vector<bool> spammer;          ///< per worker
  Eigen::VectorXd propensity;         ///< per worker
  std::vector<Eigen::MatrixXd> confusion;  ///< per worker (spammers: identity, unused)
  Eigen::VectorXd spam_distribution;  ///< uniform
  std::vector<double> window_lower;   ///< per task, log-seconds
  std::vector<double> window_upper;
  std::vector<char> valid;            ///< per judgment, in dataset order
  std::vector<double> log_times;      ///< per judgment, in dataset order

  /// Spammer flags indexed by the dataset's worker index.
  std::vector<bool> spammer_by_index(const Dataset& d) const;
};

struct SynthData {
  Dataset dataset;  ///< times in seconds, gold = planted labels
  GroundTruth truth;
};

/// Task ids are t0000.., worker ids w000..; each task gets judgments_per_task
/// distinct workers chosen uniformly. Valid judgments use the worker's
/// confusion row (diagonal = reliable_accuracy) and a time uniform inside the
/// task window; invalid ones use the uniform spam distribution and a time
/// outside the window.
SynthData generate(const SynthConfig& config);

void write_truth_json(const SynthConfig& config, const SynthData& data,
                      const std::filesystem::path& path);

}  // namespace crowdtime
