#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crowdtime/dataset.hpp"
#include "crowdtime/random.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

/// Area under the ROC curve: P(score_pos > score_neg) + P(tie) / 2, computed
/// from midranks. `gold` entries are 0 or 1; kNoGold entries are skipped.
double roc_auc(const Eigen::Ref<const Eigen::VectorXd>& scores, std::span<const int> gold);

/// Mean recall over the classes that occur in `gold` (kNoGold entries are
/// skipped). Per-class recalls are written to `per_class` when given; absent
/// classes get NaN there.
double average_recall(std::span<const int> predictions, std::span<const int> gold,
                      int num_classes, Eigen::VectorXd* per_class = nullptr);

struct EvaluationReport {
  std::string method;
  std::optional<double> auc;  ///< binary tasks only
  double average_recall = 0.0;
  double accuracy = 0.0;
  Eigen::VectorXd per_class_recall;
  int tasks_scored = 0;
};

/// Scores a summary against the dataset's gold labels. AUC uses P(t = 1).
EvaluationReport evaluate(const PosteriorSummary& summary, const Dataset& d);

/// Headline metric: AUC for binary data, average recall otherwise.
double headline_metric(const EvaluationReport& report);

/// Quality of the judgments with time <= threshold, for one threshold.
struct BinnedQuality {
  double threshold = 0.0;
  int judgments = 0;
  int correct = 0;
  double accuracy = 0.0;  ///< NaN for an empty subset
  // binary columns (class 1 is the positive class)
  int true_positives = 0;
  int false_positives = 0;
  int positives = 0;  ///< judgments in the subset whose gold label is 1
  std::optional<double> precision;
  std::optional<double> recall;
};

/// Cumulative quality table; thresholds must be sorted ascending and are in
/// the dataset's time units. Precision/recall only for binary data.
std::vector<BinnedQuality> time_binned_quality(const Dataset& d, std::span<const double> thresholds);

/// `count` log-spaced thresholds from the shortest to the longest time
/// (in seconds; the dataset must not be log-transformed).
std::vector<double> default_time_thresholds(const Dataset& d, int count = 12);

struct TaskCorrelation {
  std::string task_id;
  int judgments = 0;
  std::optional<double> pearson_r;  ///< empty when time or correctness has zero variance
  std::optional<double> p_value;    ///< two-sided, t-distribution with n - 2 dof
};

/// Pearson correlation between completion time and 0/1 correctness for every
/// task with gold and at least `min_judgments` judgments.
std::vector<TaskCorrelation> per_task_quality_time(const Dataset& d, int min_judgments);

/// Pearson's r; empty when either input has zero variance or fewer than 2 points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of r under the null of no correlation.
double pearson_p_value(double r, int n);

struct TimeHistogramBin {
  std::string task_id;
  double lower = 0.0;
  double upper = 0.0;
  int judgments = 0;
  int correct = 0;
};

/// Per-task counts of judgments (and correct ones) between consecutive edges.
std::vector<TimeHistogramBin> per_task_time_histograms(const Dataset& d,
                                                       std::span<const double> edges);

using Aggregator = std::function<PosteriorSummary(const Dataset&, RandomSource&)>;

struct SubsamplePoint {
  double fraction = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  int repeats = 0;
};

/// Keeps round(fraction * J) judgments per repeat: one random judgment per
/// task, the rest uniformly at random. Each repeat is scored with the
/// headline metric. Throws FractionTooSmall when the quota is below N.
std::vector<SubsamplePoint> subsample_curve(const Dataset& d, std::span<const double> fractions,
                                            const Aggregator& aggregator, std::uint64_t seed,
                                            int repeats);

/// Judgment indices kept by one subsample draw, in ascending order.
std::vector<int> subsample_judgments(const Dataset& d, double fraction, RandomSource& rng);

}  // namespace crowdtime
