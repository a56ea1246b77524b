#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace crowdtime {

/// Seeded generator. Identical seeds give identical streams; `split` derives
/// independent child sources for parallel chains.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  /// Child source for stream `stream`; deterministic in (seed, stream).
  RandomSource split(std::uint64_t stream) const;

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(engine_); }
  /// Log of a Gamma(shape, 1) draw; stays finite for very small shapes.
  double log_gamma_draw(double shape);

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Index drawn with probability weights[i] / sum(weights).
int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& weights, RandomSource& rng);

/// Same as sample_categorical on exp(log_weights), computed without underflow.
int sample_categorical_log(const Eigen::Ref<const Eigen::VectorXd>& log_weights,
                           RandomSource& rng);

/// Dirichlet draw via normalised Gamma variates.
Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& counts,
                                 RandomSource& rng);

double sample_beta(double a, double b, RandomSource& rng);

/// Gaussian with the given mean and precision restricted to [lower, upper].
/// Either bound may be infinite. Uses inverse-CDF sampling unless the whole
/// interval lies more than 4 standard deviations out, where exponential or
/// uniform rejection takes over.
double sample_truncated_gaussian(double mean, double precision, double lower, double upper,
                                 RandomSource& rng);

}  // namespace crowdtime
