#pragma once

#include <vector>

#include "crowdtime/dataset.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

/// One reliability parameter per worker: the judgment is correct with
/// probability `accuracy` and the other label otherwise. Binary tasks only.
struct OneCoinModel {
  Eigen::VectorXd worker_accuracy;  ///< K entries in [0.01, 0.99]
  Eigen::VectorXd class_prior;      ///< length 2
  LabelDistributions task_posterior;
  std::vector<double> log_likelihood;  ///< observed-data log-likelihood per E-step
  int iterations = 0;
  bool converged = false;
};

inline constexpr double kOneCoinInitialAccuracy = 0.7;
inline constexpr double kOneCoinMinAccuracy = 0.01;
inline constexpr double kOneCoinMaxAccuracy = 0.99;

/// EM fit. Stops when the largest parameter change drops below `tol` or after
/// `max_iters` M-steps; `converged` tells which. Throws NotBinary for C != 2.
OneCoinModel onecoin_em(const Dataset& d, int max_iters = 500, double tol = 1e-8);

PosteriorSummary onecoin_summary(const Dataset& d, const OneCoinModel& model);

}  // namespace crowdtime
