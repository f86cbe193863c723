#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reflexq/config.hpp"
#include "reflexq/trainer.hpp"

namespace reflexq::report {

/// One line of the comparison table: method, delay_s, metric, uncontrolled, controlled, improvement_pct.
struct SummaryRow {
  std::string method;
  double delay_s = 0.0;
  std::string metric;
  double uncontrolled = 0.0;
  double controlled = 0.0;
  double improvement_pct = 0.0;
};

inline constexpr const char* kSummaryHeader = "method,delay_s,metric,uncontrolled,controlled,improvement_pct";

std::vector<SummaryRow> summary_rows(const std::string& method, double delay_s, const ResponsePeaks& uncontrolled,
                                     const ResponsePeaks& controlled);
std::string summary_csv(const std::vector<SummaryRow>& rows);
/// Parses and re-derives each improvement; a mismatch against the stored column is an InputError.
std::vector<SummaryRow> parse_summary_csv(const std::string& text);
/// Fixed-width table grouped by method and delay (displacement shown in cm).
std::string summary_table(const std::vector<SummaryRow>& rows);

std::string training_log_csv(const TrainingLog& log);
/// Per-episode mean rewards from a training log CSV.
std::vector<double> parse_mean_rewards(const std::string& text);

/// time,u,v,a,force,ground_accel
std::string trace_csv(const std::vector<ResponseSample>& trace);
std::vector<ResponseSample> parse_trace_csv(const std::string& text);

std::string probe_csv(const std::vector<double>& response, double dt);

/// Provenance shared by every artifact of one run.
struct ManifestInputs {
  std::string command;
  const ConfigMap* config = nullptr;
  const Environment* env = nullptr;
  std::vector<std::string> notes;
  double wall_clock_seconds = 0.0;
};

std::string manifest_json(const ManifestInputs& in);

/// Writes manifest, training log, evaluation trace, summary (csv + txt), checkpoints, filter and probe CSVs.
void write_run_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config, const TrainingLog& log,
                         const RunResult& result, const ManifestInputs& manifest);

struct AggregateOutput {
  std::vector<SummaryRow> rows;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rewards;
};

/// Merges run directories; manifests with a different structure or record are rejected.
AggregateOutput aggregate(const std::vector<std::filesystem::path>& runs);
/// Writes the combined table to `out`, a text rendering to `out` + ".txt", and per-episode rewards next to it.
void write_report(const AggregateOutput& agg, const std::filesystem::path& out);

}  // namespace reflexq::report
