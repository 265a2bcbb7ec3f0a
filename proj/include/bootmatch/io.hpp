#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bootmatch/dataset.hpp"
#include "bootmatch/engine.hpp"

namespace bootmatch::io {

// Serializable run output. Warnings from lower layers are hoisted to the
// report level; aggregate.warnings is empty inside a finished report.
struct RunReport {
  std::string schema_version = "1.0";
  engine::AggregateResult aggregate;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<std::string> warnings;

  bool operator==(const RunReport&) const = default;
};

RunReport make_report(engine::AggregateResult aggregate,
                      std::vector<std::pair<std::string, double>> timings_ms);

// Flat CSV with header subject_id,group,x1..xk,y1..yT. The pre-period length
// is supplied by the caller, not encoded in the file.
PanelDataset load_dataset(const std::string& path, std::size_t declared_t);
void save_dataset_csv(const PanelDataset& dataset, const std::string& path);

std::string serialize_report(const RunReport& report);
RunReport parse_report(const std::string& json_text);
RunReport parse_report_file(const std::string& path);
void write_report_file(const RunReport& report, const std::string& path);

struct DailyMeansRow {
  std::size_t period = 0;  // 1-based
  double treated_mean = 0.0;
  double control_mean = 0.0;
};

struct ReplicateDiffRow {
  std::size_t replicate_index = 0;
  std::size_t period = 0;  // 1-based, pre periods only
  double difference = 0.0;
};

// Per-day group means over the full dataset.
std::vector<DailyMeansRow> emit_fig1_data(const PanelDataset& dataset);

// Matched pre-period treated-control differences per ok replicate.
std::vector<ReplicateDiffRow> emit_fig2_data(const engine::AggregateResult& aggregate,
                                             const PanelDataset& dataset);

void write_fig1_csv(const std::vector<DailyMeansRow>& rows, std::ostream& out);
void write_fig2_csv(const std::vector<ReplicateDiffRow>& rows, std::ostream& out);

}  // namespace bootmatch::io
