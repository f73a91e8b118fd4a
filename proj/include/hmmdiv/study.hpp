#pragma once

// Batch runs over case tables: configuration parsing, running both engines
// over an alpha grid, band checks against reference values and table output.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hmmdiv/fredholm.hpp"
#include "hmmdiv/model.hpp"
#include "hmmdiv/monte_carlo.hpp"

namespace hmmdiv {

// Published values for one (case, alpha) cell.
struct ReferenceCell {
  double numerical = 0.0;
  double simulation = 0.0;
  double sd = 0.0;

  bool operator==(const ReferenceCell&) const = default;
};

struct CaseSpec {
  std::string name;
  ModelParams theta1;  // generating model
  ModelParams theta;   // alternative
  std::vector<double> alphas;  // 1.0 stands for KL
  McConfig mc;
  GridSpec grid;
  std::vector<ReferenceCell> reference;  // empty, or one per alpha

  Family family() const { return family_of(theta1); }
  void validate() const;
  bool operator==(const CaseSpec&) const = default;
};

struct StudyConfig {
  std::vector<CaseSpec> cases;

  void validate() const;
  bool operator==(const StudyConfig&) const = default;
};

// Throws ConfigError naming the offending key.
StudyConfig parse_config(const std::string& json_text);
StudyConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const StudyConfig& cfg);
std::string serialize_case(const CaseSpec& spec);
CaseSpec parse_case(const std::string& json_text);

// The eight two-lag cases with default engines and published values.
StudyConfig paper_cases();

struct Methods {
  bool mc = true;
  bool fredholm = true;
};
Methods parse_methods(const std::string& list);

struct ResultRow {
  std::string case_name;
  double alpha = 1.0;
  std::optional<double> fredholm;
  std::optional<double> mc_mean;
  std::optional<double> mc_sd;
  double fredholm_seconds = 0.0;
  double mc_seconds = 0.0;
  std::optional<FredholmDiagnostics> diagnostics;

  // (fredholm - mc) / mc * 100 when both are present and mc != 0.
  std::optional<double> relative_error_pct() const;
};

std::vector<ResultRow> run_case(const CaseSpec& spec, const Methods& methods);
std::vector<ResultRow> run_study(const StudyConfig& cfg, const Methods& methods);

// Band checks against the reference values. Each failure names its cell.
struct BandFailure {
  std::string case_name;
  double alpha;
  std::string what;
};
std::vector<BandFailure> check_bands(const StudyConfig& cfg, const std::vector<ResultRow>& rows);

std::string alpha_label(double alpha);
std::string format_table(const std::vector<ResultRow>& rows);
std::string format_csv(const std::vector<ResultRow>& rows);
std::string format_diagnostics(const std::vector<ResultRow>& rows);

}  // namespace hmmdiv
