#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "crowdtime/bcctime.hpp"
#include "crowdtime/metrics.hpp"
#include "crowdtime/summary.hpp"

namespace crowdtime {

/// Writes through a temporary sibling file and renames it into place.
void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

/// task_id, label, p_0 .. p_{C-1}
void write_labels_csv(const PosteriorSummary& s, std::ostream& out);
/// worker_id, pi_<true>_<label> ..., propensity (empty when not estimated)
void write_workers_csv(const PosteriorSummary& s, std::ostream& out);
void write_durations_csv(std::span<const TaskDuration> durations, std::ostream& out);

void write_evaluation_csv(std::span<const EvaluationReport> reports, std::ostream& out);
void write_subsample_csv(std::span<const std::pair<std::string, std::vector<SubsamplePoint>>> curves,
                         std::ostream& out);
/// Precision/recall columns are written only when `binary` is true.
void write_binned_quality_csv(std::span<const BinnedQuality> rows, bool binary, std::ostream& out);
void write_correlation_csv(std::span<const TaskCorrelation> rows, std::ostream& out);
void write_histograms_csv(std::span<const TimeHistogramBin> rows, std::ostream& out);

nlohmann::json to_json(const Hyperparameters& h);
nlohmann::json to_json(const GibbsSettings& g);
/// Method, seed, schedule, hyperparameters, wall time and warnings.
nlohmann::json run_json(const PosteriorSummary& s);

}  // namespace crowdtime
