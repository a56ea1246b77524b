#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "crowdtime/dataset.hpp"
#include "crowdtime/hyperparameters.hpp"
#include "crowdtime/random.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

/// Read-only view of one retained Gibbs state.
struct BccTimeSampleView {
  int sweep = 0;
  int chain = 0;
  std::span<const int> labels;     ///< t, one per task
  std::span<const char> valid;     ///< v, one per judgment
  std::span<const double> sigma;   ///< lower thresholds, one per task
  std::span<const double> lambda;  ///< upper thresholds, one per task
  std::span<const double> psi;     ///< propensities, one per worker
};

/// Latent state to start a chain from instead of the default initialisation.
/// Continuous parameters are then set to their conditional means.
struct BccTimeStart {
  std::vector<int> labels;
  std::vector<char> valid;
  std::vector<double> sigma;
  std::vector<double> lambda;
};

struct BccTimeOptions {
  /// Called for every retained sample. With several chains it is invoked
  /// concurrently from the chain threads.
  std::function<void(const BccTimeSampleView&)> observer;
  const BccTimeStart* start = nullptr;
};

/// BCC with worker propensities and per-task duration thresholds. A judgment
/// is a valid attempt (v = 1) with probability psi_k; valid judgments follow the
/// worker's confusion row for the true label and must fall strictly inside
/// (sigma_i, lambda_i); invalid ones follow the shared spam distribution s.
/// Times must already be in the units of `h` (see transform_times).
PosteriorSummary bcctime_gibbs(const Dataset& d, const Hyperparameters& h,
                               const GibbsSettings& settings, RandomSource& rng,
                               const BccTimeOptions& options = {});

/// The same model with the thresholds pinned to (-inf, +inf), so validity is
/// learnt from the labels alone. No duration output.
PosteriorSummary bccpropensity_gibbs(const Dataset& d, const Hyperparameters& h,
                                     const GibbsSettings& settings, RandomSource& rng,
                                     const BccTimeOptions& options = {});

/// Duration records from a time-aware summary. Throws MissingDurationState
/// for summaries without threshold posteriors.
std::vector<TaskDuration> extract_durations(const PosteriorSummary& summary);

/// Spam label tallies over judgments with valid[j] == 0.
Eigen::VectorXd invalid_label_counts(const Dataset& d, std::span<const char> valid);

}  // namespace crowdtime
