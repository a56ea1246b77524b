#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crowdtime/dataset.hpp"
#include "crowdtime/hyperparameters.hpp"

namespace crowdtime {

/// Per-task label distributions, one row per task (N x C). Rows are
/// non-negative and sum to one.
using LabelDistributions = Eigen::MatrixXd;

/// Row-stochastic C x C matrix; row c is the labelling distribution for true class c.
using ConfusionMatrix = Eigen::MatrixXd;

/// Sampler schedule shared by the Gibbs-based aggregators.
struct GibbsSettings {
  int iterations = 2000;  ///< total sweeps per chain, burn-in included
  int burnin = 500;
  int chains = 1;  ///< independent chains, run concurrently and pooled

  void validate() const;
};

/// Posterior moments of the per-task duration thresholds, in the dataset's
/// time units.
struct ThresholdPosterior {
  Eigen::VectorXd sigma_mean, sigma_sd;
  Eigen::VectorXd lambda_mean, lambda_sd;
  TimeTransform transform = TimeTransform::log;
};

struct TaskDuration {
  std::string task_id;
  double sigma_mean = 0.0;
  double sigma_sd = 0.0;
  double lambda_mean = 0.0;
  double lambda_sd = 0.0;
  double lower_seconds = 0.0;  ///< sigma_mean mapped back to seconds
  double upper_seconds = 0.0;  ///< lambda_mean mapped back to seconds
  double half_width = 0.0;     ///< (E[lambda] - E[sigma]) / 2, transformed units
  double midpoint = 0.0;       ///< (E[sigma] + E[lambda]) / 2, transformed units

  double midpoint_seconds() const { return 0.5 * (lower_seconds + upper_seconds); }
};

struct RunInfo {
  std::uint64_t seed = 0;
  GibbsSettings gibbs;
  std::optional<Hyperparameters> hyperparameters;
  double wall_seconds = 0.0;
};

/// Output of every aggregator. Optional parts are filled by the models that
/// estimate them.
struct PosteriorSummary {
  std::string method;
  std::vector<std::string> task_ids;
  std::vector<std::string> worker_ids;
  LabelDistributions label_probs;  ///< N x C

  std::vector<ConfusionMatrix> confusion;        ///< K posterior means, or empty
  std::optional<Eigen::VectorXd> propensity;     ///< K posterior means of psi
  std::optional<Eigen::VectorXd> validity;       ///< per judgment P(v = 1)
  std::optional<Eigen::MatrixXd> community;      ///< K x M community membership probabilities
  std::optional<ThresholdPosterior> thresholds;  ///< time-aware models only
  std::vector<std::string> warnings;
  RunInfo run;

  int num_tasks() const { return static_cast<int>(label_probs.rows()); }
  int num_classes() const { return static_cast<int>(label_probs.cols()); }
};

/// Argmax label per task; ties go to the lowest label index.
std::vector<int> hard_labels(const LabelDistributions& probs);

/// Lowest index attaining the maximum.
int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace crowdtime
