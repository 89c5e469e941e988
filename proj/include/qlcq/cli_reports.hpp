#pragma once

// Run configuration, the compute / sweep / embed / validate pipelines and
// their JSON and CSV reports.

#include "qlcq/asymptotics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace qlcq {

/// Config file layout (every field optional; unknown fields are rejected):
///   {"spacetime": {"name", "mass", "spin", "rapidity", "translation": [x, y, z]},
///    "surface":   {"radius", "radii": [...], "p2_amplitude", "center": [x, y, z]},
///    "solver":    {"band_limit", "tolerance", "weyl_tolerance", "max_iterations", "parallel", "threads"},
///    "output":    {"path", "format": "json" | "csv"}}
struct RunConfig {
  std::string mode = "compute";  // compute | sweep | embed | validate
  std::string spacetime = "schwarzschild-standard";
  SpacetimeParams params;
  double radius = 5.0;
  std::vector<double> radii;
  double p2_amplitude = 0.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  int band_limit = 16;
  double tolerance = 1e-10;
  double weyl_tolerance = 1e-10;
  int max_iterations = 40;
  bool parallel = false;
  int threads = 0;
  std::string out;
  std::string format = "json";
};

/// Reads the config file layout above into `config`, overriding its fields.
void apply_config_json(RunConfig& config, const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Throws ValidationError naming the offending field.
void validate_config(const RunConfig& config);

struct ResultDocument {
  nlohmann::ordered_json json;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Nonzero when a `validate` run found a failing check.
  int failed_checks = 0;
};

/// Validates, then dispatches on config.mode.
ResultDocument run(const RunConfig& config);

std::string to_csv(const ResultDocument& doc);
std::string to_json_text(const ResultDocument& doc);

/// Writes the report to config.out (stdout when empty) and, when a path is
/// given and the document has rows, a whitespace-separated plot file
/// <path stem>.plot.dat next to it.
void emit(const ResultDocument& doc, const std::string& format, const std::string& out);

}  // namespace qlcq
