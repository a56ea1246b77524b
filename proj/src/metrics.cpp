#include "crowdtime/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace crowdtime {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double roc_auc(const Eigen::Ref<const Eigen::VectorXd>& scores, std::span<const int> gold) {
  if (static_cast<std::size_t>(scores.size()) != gold.size())
    throw Error(ErrorKind::InvalidArgument, "scores and gold differ in length");
  std::vector<std::pair<double, int>> scored;
  scored.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == kNoGold) continue;
    if (gold[i] != 0 && gold[i] != 1)
      throw Error(ErrorKind::InvalidArgument, "AUC needs binary gold labels");
    scored.emplace_back(scores[static_cast<Eigen::Index>(i)], gold[i]);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t lo = 0; lo < scored.size();) {
    std::size_t hi = lo;
    while (hi < scored.size() && scored[hi].first == scored[lo].first) ++hi;
    const double midrank = 0.5 * static_cast<double>(lo + 1 + hi);  // mean of ranks lo+1..hi
    for (std::size_t k = lo; k < hi; ++k) {
      if (scored[k].second == 1) {
        positive_rank_sum += midrank;
        positives += 1.0;
      }
    }
    lo = hi;
  }
  const double negatives = static_cast<double>(scored.size()) - positives;
  if (positives == 0.0 || negatives == 0.0)
    throw Error(ErrorKind::SingleClassGold, "AUC needs both classes in the gold labels");
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double average_recall(std::span<const int> predictions, std::span<const int> gold,
                      int num_classes, Eigen::VectorXd* per_class) {
  if (predictions.size() != gold.size())
    throw Error(ErrorKind::InvalidArgument, "predictions and gold differ in length");
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(num_classes);
  Eigen::VectorXd totals = Eigen::VectorXd::Zero(num_classes);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == kNoGold) continue;
    totals[gold[i]] += 1.0;
    hits[gold[i]] += (predictions[i] == gold[i]);
  }
  if (totals.sum() == 0.0) throw Error(ErrorKind::EmptyInput, "no gold-labelled predictions");
  Eigen::VectorXd recall(num_classes);
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (totals[c] == 0.0) {
      recall[c] = kNaN;
      continue;
    }
    recall[c] = hits[c] / totals[c];
    sum += recall[c];
    ++present;
  }
  if (per_class != nullptr) *per_class = recall;
  return sum / present;
}

EvaluationReport evaluate(const PosteriorSummary& summary, const Dataset& d) {
  d.require_gold();
  if (summary.num_tasks() != d.num_tasks() || summary.num_classes() != d.num_classes())
    throw Error(ErrorKind::InvalidArgument, "summary does not match the dataset");
  EvaluationReport r;
  r.method = summary.method;
  const auto predictions = hard_labels(summary.label_probs);
  const auto gold = d.gold();
  r.average_recall = average_recall(predictions, gold, d.num_classes(), &r.per_class_recall);
  int correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == kNoGold) continue;
    ++r.tasks_scored;
    correct += (predictions[i] == gold[i]);
  }
  r.accuracy = static_cast<double>(correct) / r.tasks_scored;
  if (d.num_classes() == 2) r.auc = roc_auc(summary.label_probs.col(1), gold);
  return r;
}

double headline_metric(const EvaluationReport& report) {
  return report.auc ? *report.auc : report.average_recall;
}

std::vector<BinnedQuality> time_binned_quality(const Dataset& d,
                                               std::span<const double> thresholds) {
  d.require_gold();
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw Error(ErrorKind::InvalidArgument, "thresholds must be sorted ascending");
  const bool binary = d.num_classes() == 2;
  std::vector<const Judgment*> sorted;
  for (const auto& j : d.judgments())
    if (d.gold()[j.task] != kNoGold) sorted.push_back(&j);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->time < b->time; });

  std::vector<BinnedQuality> rows;
  BinnedQuality acc;
  std::size_t next = 0;
  for (double threshold : thresholds) {
    for (; next < sorted.size() && sorted[next]->time <= threshold; ++next) {
      const Judgment& j = *sorted[next];
      const int g = d.gold()[j.task];
      ++acc.judgments;
      acc.correct += (j.label == g);
      if (binary) {
        acc.true_positives += (j.label == 1 && g == 1);
        acc.false_positives += (j.label == 1 && g == 0);
        acc.positives += (g == 1);
      }
    }
    BinnedQuality row = acc;
    row.threshold = threshold;
    row.accuracy = row.judgments > 0 ? static_cast<double>(row.correct) / row.judgments : kNaN;
    if (binary) {
      const int returned = row.true_positives + row.false_positives;
      if (returned > 0) row.precision = static_cast<double>(row.true_positives) / returned;
      if (row.positives > 0) row.recall = static_cast<double>(row.true_positives) / row.positives;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> default_time_thresholds(const Dataset& d, int count) {
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "need at least two thresholds");
  if (d.time_transform() != TimeTransform::none)
    throw Error(ErrorKind::InvalidArgument, "default thresholds expect times in seconds");
  double lo = kInf, hi = 0.0;
  for (const auto& j : d.judgments()) {
    lo = std::min(lo, j.time);
    hi = std::max(hi, j.time);
  }
  std::vector<double> edges(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int e = 0; e < count; ++e) edges[e] = lo * std::exp(step * e);
  edges.back() = hi;
  return edges;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::InvalidArgument, "pearson inputs differ in length");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_p_value(double r, int n) {
  if (n < 3) return 1.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double dof = n - 2.0;
  const double t = std::abs(r) * std::sqrt(dof / (1.0 - r * r));
  const boost::math::students_t_distribution<double> dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

std::vector<TaskCorrelation> per_task_quality_time(const Dataset& d, int min_judgments) {
  d.require_gold();
  std::vector<TaskCorrelation> out;
  std::vector<double> times, correct;
  for (int i = 0; i < d.num_tasks(); ++i) {
    const int g = d.gold()[i];
    const auto js = d.task_judgments(i);
    if (g == kNoGold || static_cast<int>(js.size()) < min_judgments) continue;
    times.clear();
    correct.clear();
    for (int j : js) {
      times.push_back(d.judgment(j).time);
      correct.push_back(d.judgment(j).label == g ? 1.0 : 0.0);
    }
    TaskCorrelation tc;
    tc.task_id = d.task_id(i);
    tc.judgments = static_cast<int>(js.size());
    tc.pearson_r = pearson(times, correct);
    if (tc.pearson_r) tc.p_value = pearson_p_value(*tc.pearson_r, tc.judgments);
    out.push_back(tc);
  }
  return out;
}

std::vector<TimeHistogramBin> per_task_time_histograms(const Dataset& d,
                                                       std::span<const double> edges) {
  d.require_gold();
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    throw Error(ErrorKind::InvalidArgument, "histogram edges must be sorted, at least two");
  std::vector<TimeHistogramBin> out;
  for (int i = 0; i < d.num_tasks(); ++i) {
    const int g = d.gold()[i];
    if (g == kNoGold) continue;
    const std::size_t first = out.size();
    for (std::size_t e = 0; e + 1 < edges.size(); ++e)
      out.push_back({d.task_id(i), edges[e], edges[e + 1], 0, 0});
    for (int j : d.task_judgments(i)) {
      const double t = d.judgment(j).time;
      // bins are [lower, upper) except the last, which is closed
      auto it = std::upper_bound(edges.begin(), edges.end(), t);
      if (it == edges.begin()) continue;
      std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      if (bin == edges.size() - 1) {
        if (t != edges.back()) continue;
        --bin;
      }
      auto& b = out[first + bin];
      ++b.judgments;
      b.correct += (d.judgment(j).label == g);
    }
  }
  return out;
}

std::vector<int> subsample_judgments(const Dataset& d, double fraction, RandomSource& rng) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw Error(ErrorKind::InvalidArgument, "subsample fraction must be in (0, 1]");
  const int total = d.num_judgments();
  const int quota = static_cast<int>(std::lround(fraction * total));
  if (quota < d.num_tasks())
    throw Error(ErrorKind::FractionTooSmall,
                "fraction " + std::to_string(fraction) + " keeps " + std::to_string(quota) +
                    " judgments for " + std::to_string(d.num_tasks()) + " tasks");
  std::vector<char> keep(total, 0);
  for (int i = 0; i < d.num_tasks(); ++i) {
    const auto js = d.task_judgments(i);
    const auto pick = static_cast<std::size_t>(rng.uniform() * js.size());
    keep[js[std::min(pick, js.size() - 1)]] = 1;
  }
  std::vector<int> rest;
  for (int j = 0; j < total; ++j)
    if (!keep[j]) rest.push_back(j);
  // partial Fisher-Yates over the remaining judgments
  const int extra = quota - d.num_tasks();
  for (int n = 0; n < extra; ++n) {
    const auto span = rest.size() - n;
    const auto r = n + std::min(static_cast<std::size_t>(rng.uniform() * span), span - 1);
    std::swap(rest[n], rest[r]);
    keep[rest[n]] = 1;
  }
  std::vector<int> out;
  out.reserve(quota);
  for (int j = 0; j < total; ++j)
    if (keep[j]) out.push_back(j);
  return out;
}

std::vector<SubsamplePoint> subsample_curve(const Dataset& d, std::span<const double> fractions,
                                            const Aggregator& aggregator, std::uint64_t seed,
                                            int repeats) {
  d.require_gold();
  if (repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be at least 1");
  if (!std::is_sorted(fractions.begin(), fractions.end()))
    throw Error(ErrorKind::InvalidArgument, "fractions must be sorted ascending");
  const RandomSource master(seed);
  std::vector<SubsamplePoint> out;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    std::vector<double> values;
    for (int r = 0; r < repeats; ++r) {
      RandomSource draw = master.split(f * 100003ULL + static_cast<std::uint64_t>(r));
      const Dataset sub = d.subset(subsample_judgments(d, fractions[f], draw));
      RandomSource fit_rng(seed);
      values.push_back(headline_metric(evaluate(aggregator(sub, fit_rng), sub)));
    }
    SubsamplePoint p;
    p.fraction = fractions[f];
    p.repeats = repeats;
    p.mean = std::accumulate(values.begin(), values.end(), 0.0) / repeats;
    double ss = 0.0;
    for (double v : values) ss += (v - p.mean) * (v - p.mean);
    p.sd = repeats > 1 ? std::sqrt(ss / (repeats - 1)) : 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace crowdtime
