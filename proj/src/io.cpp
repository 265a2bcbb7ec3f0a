#include "bootmatch/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bootmatch/errors.hpp"

namespace bootmatch::io {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string& reason) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ": " + reason);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, std::size_t line, std::size_t column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    parse_fail(line, column, "expected a number, got '" + field + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fingerprint_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fingerprint_from_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

const char* caliper_mode_name(matching::CaliperPolicy::Mode mode) {
  switch (mode) {
    case matching::CaliperPolicy::Mode::none: return "none";
    case matching::CaliperPolicy::Mode::sd_multiple: return "sd_multiple";
    case matching::CaliperPolicy::Mode::fixed: return "fixed";
  }
  return "none";
}

matching::CaliperPolicy::Mode caliper_mode_from_name(const std::string& name) {
  if (name == "none") return matching::CaliperPolicy::Mode::none;
  if (name == "sd_multiple") return matching::CaliperPolicy::Mode::sd_multiple;
  if (name == "fixed") return matching::CaliperPolicy::Mode::fixed;
  throw Error(ErrorCode::ParseError, "unknown caliper mode '" + name + "'");
}

inference::Estimator estimator_from_name(const std::string& name) {
  if (name == "did") return inference::Estimator::did;
  if (name == "post_only") return inference::Estimator::post_only;
  throw Error(ErrorCode::ParseError, "unknown estimator '" + name + "'");
}

std::string encode_status(const inference::ReplicateResult& r) {
  return r.ok ? "ok" : "failed(" + r.failure_reason + ")";
}

void decode_status(const std::string& status, inference::ReplicateResult& r) {
  if (status == "ok") {
    r.ok = true;
    r.failure_reason.clear();
    return;
  }
  if (status.size() > 8 && status.starts_with("failed(") && status.back() == ')') {
    r.ok = false;
    r.failure_reason = status.substr(7, status.size() - 8);
    return;
  }
  throw Error(ErrorCode::ParseError, "unknown replicate status '" + status + "'");
}

}  // namespace

RunReport make_report(engine::AggregateResult aggregate,
                      std::vector<std::pair<std::string, double>> timings_ms) {
  RunReport report;
  report.warnings = std::move(aggregate.warnings);
  aggregate.warnings.clear();
  report.aggregate = std::move(aggregate);
  report.timings_ms = std::move(timings_ms);
  return report;
}

PanelDataset load_dataset(const std::string& path, std::size_t declared_t) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  }

  std::string line;
  if (!std::getline(in, line)) parse_fail(1, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 4) parse_fail(1, 1, "header needs subject_id,group,x...,y...");
  if (header[0] != "subject_id") parse_fail(1, 1, "first column must be 'subject_id'");
  if (header[1] != "group") parse_fail(1, 2, "second column must be 'group'");

  std::size_t k = 0;
  std::size_t col = 2;
  while (col < header.size() && header[col] == "x" + std::to_string(k + 1)) {
    ++k;
    ++col;
  }
  if (k == 0) parse_fail(1, 3, "expected feature columns x1..xk after 'group'");
  std::size_t periods = 0;
  while (col < header.size() && header[col] == "y" + std::to_string(periods + 1)) {
    ++periods;
    ++col;
  }
  if (col != header.size()) {
    parse_fail(1, col + 1, "unexpected column '" + header[col] + "'");
  }
  if (periods < 2) parse_fail(1, 2 + k + 1, "need at least 2 response columns y1..yT");

  PanelDataset ds;
  ds.pre_periods = declared_t;
  std::vector<std::uint8_t> group;
  std::vector<double> features;
  std::vector<double> responses;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      parse_fail(line_no, 1,
                 "expected " + std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    ds.subject_ids.push_back(fields[0]);
    if (fields[1] == "0") {
      group.push_back(0);
    } else if (fields[1] == "1") {
      group.push_back(1);
    } else {
      parse_fail(line_no, 2, "group must be 0 or 1, got '" + fields[1] + "'");
    }
    for (std::size_t j = 0; j < k; ++j) {
      features.push_back(parse_double(fields[2 + j], line_no, 3 + j));
    }
    for (std::size_t l = 0; l < periods; ++l) {
      responses.push_back(parse_double(fields[2 + k + l], line_no, 3 + k + l));
    }
  }
  if (group.empty()) parse_fail(line_no + 1, 1, "no data rows");

  ds.group = std::move(group);
  ds.features.rows = ds.group.size();
  ds.features.cols = k;
  ds.features.values = std::move(features);
  ds.responses.rows = ds.group.size();
  ds.responses.cols = periods;
  ds.responses.values = std::move(responses);
  validate(ds);
  return ds;
}

void save_dataset_csv(const PanelDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::ParseError, "cannot open '" + path + "' for writing");
  }
  out << "subject_id,group";
  for (std::size_t j = 0; j < dataset.n_features(); ++j) out << ",x" << (j + 1);
  for (std::size_t l = 0; l < dataset.n_periods(); ++l) out << ",y" << (l + 1);
  out << "\n";
  const bool has_ids = !dataset.subject_ids.empty();
  for (std::size_t i = 0; i < dataset.n_subjects(); ++i) {
    out << (has_ids ? dataset.subject_ids[i] : std::to_string(i));
    out << ',' << static_cast<int>(dataset.group[i]);
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
      out << ',' << format_double(dataset.features(i, j));
    }
    for (std::size_t l = 0; l < dataset.n_periods(); ++l) {
      out << ',' << format_double(dataset.responses(i, l));
    }
    out << "\n";
  }
  if (!out) {
    throw Error(ErrorCode::ParseError, "write to '" + path + "' failed");
  }
}

std::string serialize_report(const RunReport& report) {
  const engine::AggregateResult& agg = report.aggregate;
  ordered_json j;
  j["schema_version"] = report.schema_version;
  j["effect"] = agg.effect;
  j["effect_sd"] = agg.effect_sd;
  j["final_p"] = agg.final_p;
  j["bonferroni_min"] = agg.multiplicity.bonferroni_min;
  j["storey_pi0"] = agg.multiplicity.storey_pi0;

  ordered_json mult;
  mult["storey_lambda"] = agg.multiplicity.storey_lambda;
  mult["bh_qvalues"] = agg.multiplicity.bh_qvalues;
  mult["storey_qvalues"] = agg.multiplicity.storey_qvalues;
  mult["lfdr_values"] = agg.multiplicity.lfdr_values;
  mult["lfdr_fallback"] = agg.multiplicity.lfdr_fallback;
  j["multiplicity"] = std::move(mult);

  ordered_json reps = ordered_json::array();
  for (const auto& r : agg.replicates) {
    ordered_json rj;
    rj["index"] = r.replicate_index;
    rj["effect"] = r.effect;
    rj["p_value"] = r.p_value;
    rj["z_value"] = r.z_value;
    rj["pre_balance_p"] = r.pre_balance_p;
    rj["n_pairs"] = r.n_pairs;
    rj["seed"] = r.replicate_seed;
    rj["status"] = encode_status(r);
    rj["pre_daily_diff"] = r.pre_daily_diff;
    reps.push_back(std::move(rj));
  }
  j["replicates"] = std::move(reps);
  j["failed_count"] = agg.failed_count;

  const engine::BootstrapConfig& cfg = agg.config_echo;
  ordered_json cj;
  cj["replicates"] = cfg.replicates;
  cj["ratio"] = cfg.ratio;
  cj["with_replacement"] = cfg.with_replacement;
  cj["master_seed"] = cfg.master_seed;
  cj["workers"] = cfg.workers;
  cj["min_success_fraction"] = cfg.min_success_fraction;
  cj["estimator"] = inference::estimator_name(cfg.estimator);
  cj["design"] = {{"use_features", cfg.design_spec.use_features},
                  {"use_pre_period_responses", cfg.design_spec.use_pre_period_responses},
                  {"standardize", cfg.design_spec.standardize}};
  cj["caliper"] = {{"mode", caliper_mode_name(cfg.caliper.mode)},
                   {"value", cfg.caliper.value}};
  cj["storey_lambda"] = cfg.storey_lambda;
  j["config"] = std::move(cj);

  j["dataset_fingerprint"] = fingerprint_hex(agg.dataset_fingerprint);

  ordered_json tj = ordered_json::object();
  for (const auto& [phase, ms] : report.timings_ms) tj[phase] = ms;
  j["timings"] = std::move(tj);
  j["warnings"] = report.warnings;

  return j.dump(2) + "\n";
}

RunReport parse_report(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid report JSON: ") + e.what());
  }
  try {
    RunReport report;
    report.schema_version = j.at("schema_version").get<std::string>();
    engine::AggregateResult& agg = report.aggregate;
    agg.effect = j.at("effect").get<double>();
    agg.effect_sd = j.at("effect_sd").get<double>();
    agg.final_p = j.at("final_p").get<double>();
    agg.multiplicity.bonferroni_min = j.at("bonferroni_min").get<double>();
    agg.multiplicity.storey_pi0 = j.at("storey_pi0").get<double>();
    agg.multiplicity.final_p = agg.final_p;

    const auto& mult = j.at("multiplicity");
    agg.multiplicity.storey_lambda = mult.at("storey_lambda").get<double>();
    agg.multiplicity.bh_qvalues = mult.at("bh_qvalues").get<std::vector<double>>();
    agg.multiplicity.storey_qvalues = mult.at("storey_qvalues").get<std::vector<double>>();
    agg.multiplicity.lfdr_values = mult.at("lfdr_values").get<std::vector<double>>();
    agg.multiplicity.lfdr_fallback = mult.at("lfdr_fallback").get<bool>();

    for (const auto& rj : j.at("replicates")) {
      inference::ReplicateResult r;
      r.replicate_index = rj.at("index").get<std::size_t>();
      r.effect = rj.at("effect").get<double>();
      r.p_value = rj.at("p_value").get<double>();
      r.z_value = rj.at("z_value").get<double>();
      r.pre_balance_p = rj.at("pre_balance_p").get<double>();
      r.n_pairs = rj.at("n_pairs").get<std::size_t>();
      r.replicate_seed = rj.at("seed").get<std::uint64_t>();
      decode_status(rj.at("status").get<std::string>(), r);
      r.pre_daily_diff = rj.at("pre_daily_diff").get<std::vector<double>>();
      agg.replicates.push_back(std::move(r));
    }
    agg.failed_count = j.at("failed_count").get<std::size_t>();

    const auto& cj = j.at("config");
    engine::BootstrapConfig& cfg = agg.config_echo;
    cfg.replicates = cj.at("replicates").get<std::size_t>();
    cfg.ratio = cj.at("ratio").get<double>();
    cfg.with_replacement = cj.at("with_replacement").get<bool>();
    cfg.master_seed = cj.at("master_seed").get<std::uint64_t>();
    cfg.workers = cj.at("workers").get<std::size_t>();
    cfg.min_success_fraction = cj.at("min_success_fraction").get<double>();
    cfg.estimator = estimator_from_name(cj.at("estimator").get<std::string>());
    const auto& dj = cj.at("design");
    cfg.design_spec.use_features = dj.at("use_features").get<bool>();
    cfg.design_spec.use_pre_period_responses = dj.at("use_pre_period_responses").get<bool>();
    cfg.design_spec.standardize = dj.at("standardize").get<bool>();
    const auto& caj = cj.at("caliper");
    cfg.caliper.mode = caliper_mode_from_name(caj.at("mode").get<std::string>());
    cfg.caliper.value = caj.at("value").get<double>();
    cfg.storey_lambda = cj.at("storey_lambda").get<double>();

    agg.dataset_fingerprint =
        fingerprint_from_hex(j.at("dataset_fingerprint").get<std::string>());

    for (const auto& [phase, ms] : j.at("timings").items()) {
      report.timings_ms.emplace_back(phase, ms.get<double>());
    }
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report schema mismatch: ") + e.what());
  }
}

RunReport parse_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

void write_report_file(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::ParseError, "cannot open '" + path + "' for writing");
  }
  out << serialize_report(report);
  if (!out) {
    throw Error(ErrorCode::ParseError, "write to '" + path + "' failed");
  }
}

std::vector<DailyMeansRow> emit_fig1_data(const PanelDataset& dataset) {
  std::vector<std::size_t> rows_t;
  std::vector<std::size_t> rows_c;
  for (std::size_t i = 0; i < dataset.n_subjects(); ++i) {
    (dataset.group[i] == 1 ? rows_t : rows_c).push_back(i);
  }
  auto [means_t, means_c] = matching::daily_group_means(dataset, rows_t, rows_c);
  std::vector<DailyMeansRow> rows(dataset.n_periods());
  for (std::size_t l = 0; l < dataset.n_periods(); ++l) {
    rows[l] = {l + 1, means_t[l], means_c[l]};
  }
  return rows;
}

std::vector<ReplicateDiffRow> emit_fig2_data(const engine::AggregateResult& aggregate,
                                             const PanelDataset& dataset) {
  std::vector<ReplicateDiffRow> rows;
  for (const auto& r : aggregate.replicates) {
    if (!r.ok) continue;
    const std::size_t periods = std::min(r.pre_daily_diff.size(), dataset.pre_periods);
    for (std::size_t l = 0; l < periods; ++l) {
      rows.push_back({r.replicate_index, l + 1, r.pre_daily_diff[l]});
    }
  }
  return rows;
}

void write_fig1_csv(const std::vector<DailyMeansRow>& rows, std::ostream& out) {
  out << "period,treated_mean,control_mean\n";
  for (const auto& row : rows) {
    out << row.period << ',' << format_double(row.treated_mean) << ','
        << format_double(row.control_mean) << "\n";
  }
}

void write_fig2_csv(const std::vector<ReplicateDiffRow>& rows, std::ostream& out) {
  out << "replicate,period,difference\n";
  for (const auto& row : rows) {
    out << row.replicate_index << ',' << row.period << ','
        << format_double(row.difference) << "\n";
  }
}

}  // namespace bootmatch::io
