#pragma once

#include <Eigen/Dense>

#include "crowdtime/dataset.hpp"

namespace crowdtime {

/// Prior parameters shared by the Bayesian aggregators. Threshold means and
/// precisions live in the same (possibly log-transformed) units as the times.
struct Hyperparameters {
  Eigen::VectorXd p0;  ///< Dirichlet pseudo-counts over class proportions
  Eigen::VectorXd s0;  ///< Dirichlet pseudo-counts over the spam label distribution
  double pi0_diag = 0.7;     ///< confusion-row pseudo-count on the diagonal
  double pi0_offdiag = 0.3;  ///< confusion-row pseudo-count mass spread over off-diagonals
  double alpha0 = 1.0;       ///< Beta true count for propensity
  double beta0 = 1.0;        ///< Beta false count for propensity
  double sigma0_mean = 0.0;
  double gamma0_precision = 0.1;
  double lambda0_mean = 1.0;
  double delta0_precision = 0.1;
  TimeTransform time_transform = TimeTransform::log;

  /// Uniform class priors, confusion diagonal 0.7, propensity Beta(0.7N, 0.3N),
  /// thresholds centred at 10 s and 50 s (in log units when `transform` is log)
  /// with precision 0.1.
  static Hyperparameters defaults(int num_classes, int num_tasks,
                                  TimeTransform transform = TimeTransform::log);

  /// C x C matrix of Dirichlet pseudo-counts; row c is the prior for true class c.
  Eigen::MatrixXd confusion_prior(int num_classes) const;

  /// Throws InvalidArgument when any pseudo-count or precision is non-positive,
  /// vector sizes differ from `num_classes`, or sigma0_mean >= lambda0_mean.
  void validate(int num_classes) const;
};

}  // namespace crowdtime
