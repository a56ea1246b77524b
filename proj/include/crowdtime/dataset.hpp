#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crowdtime/error.hpp"

namespace crowdtime {

/// Class labels are dense integers in [0, C). Names are only used for I/O.
class LabelSpace {
 public:
  explicit LabelSpace(int class_count);
  LabelSpace(int class_count, std::vector<std::string> class_names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int label) const { return names_.at(label); }
  const std::vector<std::string>& names() const { return names_; }

  /// Maps a label token from a file: a class name first, then a plain integer.
  int parse(std::string_view token) const;

 private:
  std::vector<std::string> names_;
};

enum class TimeTransform { none, log };

std::string_view to_string(TimeTransform transform);
TimeTransform parse_time_transform(std::string_view text);

/// A judgment as it appears in an input file.
struct JudgmentRecord {
  std::string task_id;
  std::string worker_id;
  int label = 0;
  double time_seconds = 0.0;
};

/// A judgment with dense task/worker indices. `time` is in the dataset's
/// current time units (seconds, or log-seconds after a log transform).
struct Judgment {
  int task = 0;
  int worker = 0;
  int label = 0;
  double time = 0.0;
};

inline constexpr int kNoGold = -1;

/// Immutable set of judgments with dense task and worker indices.
class Dataset {
 public:
  /// Validates and indexes the records. Tasks and workers are indexed in
  /// order of first appearance. Gold entries for unknown tasks are ignored.
  static Dataset from_records(LabelSpace label_space, std::span<const JudgmentRecord> records,
                              const std::map<std::string, int>* gold = nullptr);

  const LabelSpace& label_space() const { return label_space_; }
  int num_classes() const { return label_space_.size(); }
  int num_tasks() const { return static_cast<int>(task_ids_.size()); }
  int num_workers() const { return static_cast<int>(worker_ids_.size()); }
  int num_judgments() const { return static_cast<int>(judgments_.size()); }

  std::span<const Judgment> judgments() const { return judgments_; }
  const Judgment& judgment(int j) const { return judgments_[j]; }
  std::span<const int> task_judgments(int task) const { return by_task_[task]; }
  std::span<const int> worker_judgments(int worker) const { return by_worker_[worker]; }

  const std::string& task_id(int task) const { return task_ids_[task]; }
  const std::string& worker_id(int worker) const { return worker_ids_[worker]; }
  const std::vector<std::string>& task_ids() const { return task_ids_; }
  const std::vector<std::string>& worker_ids() const { return worker_ids_; }
  std::optional<int> task_index(const std::string& id) const;
  std::optional<int> worker_index(const std::string& id) const;

  bool has_gold() const { return !gold_.empty(); }
  /// One entry per task; kNoGold where the gold file has no label. Empty if no gold.
  std::span<const int> gold() const { return gold_; }
  /// Throws MissingGold unless at least one task has a gold label.
  void require_gold() const;

  TimeTransform time_transform() const { return transform_; }

  /// Records in the original id space; times are mapped back to seconds.
  std::vector<JudgmentRecord> to_records() const;
  std::map<std::string, int> gold_map() const;

  /// Dataset restricted to the given judgment indices. Tasks and workers
  /// without judgments disappear; the time transform is kept.
  Dataset subset(std::span<const int> judgment_indices) const;

 private:
  friend Dataset transform_times(const Dataset& d, TimeTransform mode);

  static Dataset index_records(LabelSpace label_space, std::span<const JudgmentRecord> records,
                               const std::map<std::string, int>* gold, bool check_times);

  LabelSpace label_space_{2};
  std::vector<Judgment> judgments_;
  std::vector<std::vector<int>> by_task_;
  std::vector<std::vector<int>> by_worker_;
  std::vector<std::string> task_ids_;
  std::vector<std::string> worker_ids_;
  std::unordered_map<std::string, int> task_lookup_;
  std::unordered_map<std::string, int> worker_lookup_;
  std::vector<int> gold_;
  TimeTransform transform_ = TimeTransform::none;
};

/// Loads `task_id,worker_id,label,time_seconds` rows (or accept_ts/submit_ts
/// in place of time_seconds) and an optional `task_id,gold_label` file.
Dataset load_judgments_csv(const std::filesystem::path& path, const LabelSpace& label_space,
                           const std::optional<std::filesystem::path>& gold_path = std::nullopt);

void write_judgments_csv(const Dataset& d, const std::filesystem::path& path);
void write_gold_csv(const Dataset& d, const std::filesystem::path& path);

/// Seconds between two ISO-8601 timestamps (`YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm]`).
double seconds_between(std::string_view accept_ts, std::string_view submit_ts);

/// Log transform replaces every time with its natural log. Applying `log`
/// to an already log-transformed dataset is an error; `none` is identity.
Dataset transform_times(const Dataset& d, TimeTransform mode);

/// Maps a value in the dataset's time units back to seconds.
double to_seconds(double value, TimeTransform transform);

struct DatasetStats {
  int num_judgments = 0;
  int num_tasks = 0;
  int num_workers = 0;
  int num_classes = 0;
  double judgments_per_task = 0.0;
  double judgments_per_worker = 0.0;
  std::optional<double> judgment_accuracy;  ///< fraction of judgments equal to gold
};

DatasetStats dataset_stats(const Dataset& d);

}  // namespace crowdtime
