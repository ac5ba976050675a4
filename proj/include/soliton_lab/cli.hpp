#pragma once

// Command-line front end: run configuration, the four commands, report
// rendering (json, csv, text) and the exit-code contract
// 0 pass, 1 fail or inconclusive, 2 usage or unknown fixture, 3 numeric error.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "soliton_lab/skrp_family.hpp"

namespace soliton_lab::cli {

using Json = nlohmann::ordered_json;

inline constexpr std::uint64_t kDefaultSeed = 0x5eed2024ULL;

struct RunConfig {
  std::string command;
  std::optional<std::string> fixture;
  std::optional<SkrpParams> params;  // inline parameter block
  int samples = 200;
  double tol_residual = 1e-6;
  double tol_coefficient = 1e-6;
  double tol_dual = 1e-8;  // residual of the dualized pair
  std::string format = "json";
  std::optional<std::string> out;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> f_min;  // skrp profile grid
  std::optional<double> f_max;

  /// Throws ConfigError unless samples >= 10, tolerances > 0 and the format is known.
  void validate() const;
};

/// Reads a JSON run configuration; SkrpParams keys (m, kappa, c, A, B,
/// interval, s, a, p, anchor) may sit at the top level or under "params".
RunConfig config_from_json(const Json& doc, RunConfig base = {});
Json params_to_json(const SkrpParams& p);
SkrpParams params_from_json(const Json& doc, SkrpParams base = {});

struct CheckRecord {
  std::string name;
  std::string status;  // pass, fail, inconclusive
  double measured = 0.0;
  double tolerance = 0.0;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;  // optional leading text column
  std::string label_column;
};

struct Report {
  RunConfig config;
  std::string version;
  std::vector<CheckRecord> checks;
  Json data = Json::object();
  Table table;
  std::map<std::string, double> timings;  // seconds; text format only

  /// fail if any check fails, else inconclusive if any is, else pass.
  std::string status() const;
};

Report cmd_verify(const RunConfig& config);
Report cmd_dualize(const RunConfig& config);
Report cmd_skrp(const RunConfig& config);
Report cmd_completeness(const RunConfig& config);
Report run_command(const RunConfig& config);

std::string artifact_version();

/// Deterministic JSON: config echo, version, checks, data and table; no timings.
std::string render_json(const Report& report);
/// RFC 4180 with CRLF records; the table when present, else the checks.
std::string render_csv(const Report& report);
std::string render_text(const Report& report);
std::string render(const Report& report);

int exit_code(const Report& report);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

/// Full entry point; never throws.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace soliton_lab::cli
