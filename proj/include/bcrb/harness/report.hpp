#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bcrb::harness {

// One CSV row. Fields not applicable to a figure stay empty.
struct ReportRow {
  std::string figure;
  std::optional<long> n;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;
  std::optional<double> rel_err_jp;
  std::optional<double> rel_err_jb;
  std::optional<double> rel_err_vb;
  std::optional<double> rmse_mmse;
  std::optional<double> rmse_map;
  std::optional<double> rmse_bound;
  std::optional<double> wall_time_s;
};

inline constexpr const char* kCsvHeader =
    "figure,n,snr_db,seed,rel_err_jp,rel_err_jb,rel_err_vb,rmse_mmse,rmse_map,"
    "rmse_bound,wall_time_s";

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Sorts by (figure, n, snr_db, seed) and renders the fixed-schema CSV text,
// so output bytes do not depend on execution order.
std::string render_csv(std::vector<ReportRow> rows);

struct ExperimentReport {
  std::string figure_group;  // file stem, e.g. "denoise-n"
  std::vector<ReportRow> rows;
  nlohmann::json sidecars = nlohmann::json::object();  // per-cell estimate dumps
};

// Writes <figure_group>.csv, manifest.json, and estimates/<cell>.json under dir.
void write_report(const std::string& dir, const ExperimentReport& report,
                  const nlohmann::json& resolved_config, const std::string& hash);

}  // namespace bcrb::harness
