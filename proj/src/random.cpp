#include "crowdtime/random.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "crowdtime/error.hpp"

namespace crowdtime {

namespace {

constexpr double kTailCutoff = 4.0;
constexpr int kMaxRejections = 100000;

const boost::math::normal_distribution<double>& standard_normal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

// Robert (1995) rejection for a standard normal on [a, b] with a >= kTailCutoff.
double tail_rejection(double a, double b, RandomSource& rng) {
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  const bool narrow = std::isfinite(b) && rate * (b - a) < 1.0;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    if (narrow) {
      const double z = a + (b - a) * rng.uniform();
      if (std::log(rng.uniform()) <= 0.5 * (a * a - z * z)) return z;
    } else {
      const double z = a - std::log(rng.uniform()) / rate;
      if (z > b) continue;
      if (std::log(rng.uniform()) <= -0.5 * (z - rate) * (z - rate)) return z;
    }
  }
  throw Error(ErrorKind::Numerical, "truncated Gaussian tail rejection did not terminate");
}

double standard_truncated(double a, double b, RandomSource& rng) {
  if (a >= kTailCutoff) return tail_rejection(a, b, rng);
  if (b <= -kTailCutoff) return -tail_rejection(-b, -a, rng);

  const auto& dist = standard_normal();
  const double u = rng.uniform();
  if (a > 0.0) {
    // work with upper-tail probabilities so the mass does not cancel
    const double qa = boost::math::cdf(boost::math::complement(dist, a));
    const double qb = std::isfinite(b) ? boost::math::cdf(boost::math::complement(dist, b)) : 0.0;
    if (!(qa > qb)) throw Error(ErrorKind::Numerical, "truncated Gaussian interval mass underflow");
    return boost::math::quantile(boost::math::complement(dist, qb + u * (qa - qb)));
  }
  const double pa = std::isfinite(a) ? boost::math::cdf(dist, a) : 0.0;
  const double pb = std::isfinite(b) ? boost::math::cdf(dist, b) : 1.0;
  if (!(pb > pa)) throw Error(ErrorKind::Numerical, "truncated Gaussian interval mass underflow");
  const double p = pa + u * (pb - pa);
  if (p <= 0.0 || p >= 1.0) return std::clamp(0.0, a, b);
  return boost::math::quantile(dist, p);
}

}  // namespace

std::uint64_t RandomSource::mix(std::uint64_t x) {
  // splitmix64 finaliser
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomSource RandomSource::split(std::uint64_t stream) const {
  return RandomSource(mix(seed_ ^ mix(stream + 0x632BE59BD9B4E019ULL)));
}

double RandomSource::uniform() {
  // 53 random bits mapped to the open interval (0, 1)
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomSource::log_gamma_draw(double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(engine_));
  }
  // G(a) = G(a + 1) * U^(1/a)
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  return std::log(gamma(engine_)) + std::log(uniform()) / shape;
}

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& weights, RandomSource& rng) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw Error(ErrorKind::AllZeroWeights, "weights must be finite and non-negative");
    total += weights[i];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::AllZeroWeights, "all categorical weights are zero");
  double target = rng.uniform() * total;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    target -= weights[i];
    if (target < 0.0) return last_positive;
  }
  return last_positive;
}

int sample_categorical_log(const Eigen::Ref<const Eigen::VectorXd>& log_weights,
                           RandomSource& rng) {
  const double top = log_weights.maxCoeff();
  if (!std::isfinite(top))
    throw Error(ErrorKind::AllZeroWeights, "no finite log-weight in categorical draw");
  return sample_categorical((log_weights.array() - top).exp().matrix(), rng);
}

Eigen::VectorXd sample_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& counts,
                                 RandomSource& rng) {
  Eigen::VectorXd logs(counts.size());
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (!(counts[i] > 0.0) || !std::isfinite(counts[i]))
      throw Error(ErrorKind::NonPositiveCount, "Dirichlet counts must be positive and finite");
    logs[i] = rng.log_gamma_draw(counts[i]);
  }
  Eigen::VectorXd out = (logs.array() - logs.maxCoeff()).exp().matrix();
  out = out.cwiseMax(std::numeric_limits<double>::min());
  return out / out.sum();
}

double sample_beta(double a, double b, RandomSource& rng) {
  if (!(a > 0.0) || !(b > 0.0))
    throw Error(ErrorKind::NonPositiveCount, "Beta parameters must be positive");
  const double la = rng.log_gamma_draw(a);
  const double lb = rng.log_gamma_draw(b);
  // a / (a + b) computed as a logistic of the log ratio
  const double x = 1.0 / (1.0 + std::exp(lb - la));
  return std::clamp(x, std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53);
}

double sample_truncated_gaussian(double mean, double precision, double lower, double upper,
                                 RandomSource& rng) {
  if (!(precision > 0.0) || !std::isfinite(precision))
    throw Error(ErrorKind::InvalidArgument, "precision must be positive and finite");
  if (!(lower < upper))
    throw Error(ErrorKind::EmptyInterval, "lower bound must be below upper bound");
  const double sd = 1.0 / std::sqrt(precision);
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;
  const double x = mean + sd * standard_truncated(a, b, rng);
  return std::clamp(x, lower, upper);
}

}  // namespace crowdtime
