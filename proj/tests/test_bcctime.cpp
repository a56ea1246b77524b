#include <cmath>
#include <mutex>

#include "crowdtime/baselines.hpp"
#include "crowdtime/bcc.hpp"
#include "crowdtime/bcctime.hpp"
#include "crowdtime/synthgen.hpp"
#include "support.hpp"

using namespace crowdtime;
using testing::make;

namespace {

// Planted-spammer scenario: 24 reliable workers with in-window times, 6
// spammers far outside the window.
SynthConfig planted(std::uint64_t seed) {
  SynthConfig c;
  c.num_tasks = 200;
  c.num_workers = 30;
  c.judgments_per_task = 6;
  c.spammer_fraction = 0.2;
  c.seed = seed;
  return c;
}

// Propensity prior sized to the judgments per worker, tighter thresholds.
Hyperparameters scenario_prior(const Dataset& d) {
  auto h = Hyperparameters::defaults(2, d.num_tasks());
  const double per_worker = double(d.num_judgments()) / d.num_workers();
  h.alpha0 = 0.7 * per_worker;
  h.beta0 = 0.3 * per_worker;
  h.gamma0_precision = h.delta0_precision = 1.0;
  return h;
}

double label_accuracy(const PosteriorSummary& s, const Dataset& d) {
  const auto labels = hard_labels(s.label_probs);
  int ok = 0;
  for (int i = 0; i < d.num_tasks(); ++i) ok += labels[i] == d.gold()[i];
  return double(ok) / d.num_tasks();
}

double spammer_accuracy(const PosteriorSummary& s, const SynthData& data) {
  const auto spam = data.truth.spammer_by_index(data.dataset);
  int ok = 0;
  for (int k = 0; k < data.dataset.num_workers(); ++k)
    ok += ((*s.propensity)[k] > 0.5) == !spam[k];
  return double(ok) / data.dataset.num_workers();
}

}  // namespace

TEST_CASE("single consistent source") {
  const Dataset d = transform_times(make(2, {{"a", "w", 1, 20.0}}), TimeTransform::log);
  auto h = Hyperparameters::defaults(2, 1);
  h.pi0_diag = 0.99;
  h.pi0_offdiag = 0.01;
  h.alpha0 = 1000.0;
  h.beta0 = 1.0;
  RandomSource r(1);
  const auto s = bcctime_gibbs(d, h, {4000, 500, 1}, r);
  CHECK(s.label_probs(0, 1) > 0.9);
  CHECK((*s.validity)[0] > 0.9);
}

TEST_CASE("planted spammers and labels are recovered") {
  const auto data = generate(planted(3));
  const Dataset d = transform_times(data.dataset, TimeTransform::log);
  RandomSource r(3);
  std::mutex m;
  long violations = 0;
  BccTimeOptions opt;
  opt.observer = [&](const BccTimeSampleView& v) {
    long bad = 0;
    for (int j = 0; j < d.num_judgments(); ++j) {
      const auto& jd = d.judgment(j);
      if (v.valid[j] && !(v.sigma[jd.task] < jd.time && jd.time < v.lambda[jd.task])) ++bad;
    }
    std::lock_guard lock(m);
    violations += bad;
  };
  const auto s = bcctime_gibbs(d, scenario_prior(d), {2000, 500, 2}, r, opt);
  CHECK(violations == 0);
  CHECK(label_accuracy(s, d) >= 0.93);
  CHECK(spammer_accuracy(s, data) >= 0.9);
  // planted out-of-window judgments are all flagged; wrong labels from reliable
  // workers may also be explained as spam, so only check the correct ones
  const auto valid = *s.validity;
  int spam = 0, spam_flagged = 0, good = 0, good_kept = 0;
  for (int j = 0; j < d.num_judgments(); ++j) {
    const auto& jd = d.judgment(j);
    if (!data.truth.valid[j]) {
      ++spam;
      spam_flagged += valid[j] < 0.5;
    } else if (jd.label == data.truth.labels[jd.task]) {
      ++good;
      good_kept += valid[j] > 0.5;
    }
  }
  CHECK(spam_flagged == spam);
  CHECK(good_kept / double(good) >= 0.9);
  CHECK((s.propensity->array() > 0.0).all());
  CHECK((s.propensity->array() < 1.0).all());
}

TEST_CASE("posterior intervals cover the planted window") {
  const auto data = generate(planted(5));
  const Dataset d = transform_times(data.dataset, TimeTransform::log);
  RandomSource r(5);
  const auto s = bcctime_gibbs(d, scenario_prior(d), {}, r);
  const auto durations = extract_durations(s);
  const double lo = data.truth.window_lower[0], hi = data.truth.window_upper[0];
  const double q10 = lo + 0.1 * (hi - lo), q90 = lo + 0.9 * (hi - lo);
  int covered = 0, ordered = 0, with_valid = 0;
  for (int i = 0; i < d.num_tasks(); ++i) {
    covered += durations[i].sigma_mean <= q10 && durations[i].lambda_mean >= q90;
    bool any = false;
    for (int j : d.task_judgments(i)) any |= (*s.validity)[j] > 0.5;
    if (any) {
      ++with_valid;
      ordered += durations[i].sigma_mean <= durations[i].lambda_mean;
    }
  }
  CHECK(covered / double(d.num_tasks()) >= 0.8);
  CHECK(ordered == with_valid);
}

TEST_CASE("propensity model keeps thresholds open") {
  auto config = planted(4);
  config.outlier_scale = 1.01;  // spam times barely leave the window
  const auto data = generate(config);
  const Dataset d = transform_times(data.dataset, TimeTransform::log);
  RandomSource r(4);
  bool open = true;
  BccTimeOptions opt;
  opt.observer = [&](const BccTimeSampleView& v) {
    for (std::size_t i = 0; i < v.sigma.size(); ++i)
      open &= std::isinf(v.sigma[i]) && v.sigma[i] < 0 && std::isinf(v.lambda[i]) && v.lambda[i] > 0;
  };
  const auto s = bccpropensity_gibbs(d, scenario_prior(d), {}, r, opt);
  CHECK(open);
  CHECK_FALSE(s.thresholds);
  CHECK(testing::error_kind([&] { extract_durations(s); }) == ErrorKind::MissingDurationState);
  CHECK(spammer_accuracy(s, data) >= 0.8);
}

TEST_CASE("propensity model with a strong prior matches bcc") {
  const Dataset d = transform_times(make(2, {{"a", "w", 1, 5.0}, {"b", "w", 0, 7.0}, {"c", "w", 1, 9.0}}),
                                    TimeTransform::log);
  auto h = Hyperparameters::defaults(2, 3);
  h.alpha0 = 1e6;
  h.beta0 = 1.0;
  RandomSource a(1), b(2);
  const GibbsSettings g{8000, 1000, 1};
  const auto bcc = bcc_gibbs(d, h, g, a);
  const auto prop = bccpropensity_gibbs(d, h, g, b);
  CHECK(0.5 * (bcc.label_probs - prop.label_probs).cwiseAbs().rowwise().sum().maxCoeff() <= 0.05);
}

TEST_CASE("duration extraction") {
  PosteriorSummary s;
  s.method = "bcctime";
  s.task_ids = {"a"};
  ThresholdPosterior tp;
  tp.sigma_mean = Eigen::VectorXd::Constant(1, std::log(5.0));
  tp.lambda_mean = Eigen::VectorXd::Constant(1, std::log(20.0));
  tp.sigma_sd = tp.lambda_sd = Eigen::VectorXd::Zero(1);
  tp.transform = TimeTransform::log;
  s.thresholds = tp;
  auto td = extract_durations(s)[0];
  CHECK(td.lower_seconds == doctest::Approx(5.0));
  CHECK(td.upper_seconds == doctest::Approx(20.0));

  tp.sigma_mean[0] = 10.0;
  tp.lambda_mean[0] = 50.0;
  tp.transform = TimeTransform::none;
  s.thresholds = tp;
  td = extract_durations(s)[0];
  CHECK(td.lower_seconds == 10.0);
  CHECK(td.upper_seconds == 50.0);
  CHECK(td.half_width == 20.0);
  CHECK(td.midpoint_seconds() == 30.0);
}

TEST_CASE("mismatched transform is flagged") {
  const Dataset d = make(2, {{"a", "w", 1, 20.0}});
  RandomSource r(1);
  const auto s = bcctime_gibbs(d, Hyperparameters::defaults(2, 1), {50, 10, 1}, r);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].rfind("InconsistentTransform", 0) == 0);
}

TEST_CASE("invalid label counts") {
  const Dataset d = make(3, {{"a", "w", 2, 1}, {"b", "w", 2, 1}, {"c", "w", 0, 1}});
  const std::vector<char> valid{0, 0, 1};
  CHECK(invalid_label_counts(d, valid) == Eigen::Vector3d(0, 0, 2));
}
