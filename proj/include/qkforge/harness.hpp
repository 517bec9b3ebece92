#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qkforge/model_zoo.hpp"

namespace qkforge {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string model;         // built-in id, or empty when a prepotential is given
  std::string prepotential;  // expression in X1..Xn
  double degree = 2.0;
  int points = 100;
  unsigned long seed = 7;
  std::map<std::string, double> tol;  // overrides per check class
  bool exhaustive = false;
  std::string out;

  void validate() const;
};

// Tolerance classes and their defaults.
const std::map<std::string, double>& default_tolerances();

// Flat key=value lines; '#' starts a comment.  Keys: model, prepotential,
// degree, points, seed, exhaustive, out, tol.<class>.
RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);
// "<class>=<value>"
void apply_tolerance(RunConfig& cfg, const std::string& spec);

struct CheckRecord {
  std::string name;
  std::string anchor;
  int points = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool skipped = false;
  std::string reason;
  std::vector<double> worst_point;

  bool operator==(const CheckRecord&) const = default;
};

struct Report {
  std::string model;
  int n = 0;
  unsigned long seed = 0;
  int points = 0;
  bool exhaustive = false;
  std::string version = kVersion;
  std::vector<double> steps;  // default stencil steps at |x| = 1, orders 1..3
  std::vector<CheckRecord> checks;
  bool pass = true;

  bool operator==(const Report&) const = default;
};

nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);
std::string serialize(const Report& r);
int exit_status(const Report& r);

// The model named by the config, ready for the pipeline.
struct ResolvedModel {
  std::string id;
  FFunction F;
  const ModelFixture* fixture = nullptr;
  int n() const { return F.n(); }
};
ResolvedModel resolve_model(const RunConfig& cfg);

Report cli_verify(const RunConfig& cfg);

// QK metric, Sp(1) connection and reduced fields at one chart point.  With
// cp, the n = 1 Calderbank-Pedersen form is added together with its
// difference from the general formulas.
nlohmann::json cli_eval_metric(const RunConfig& cfg, const std::vector<double>& chart, bool cp);

// Human-readable table of a report.
std::string format_report(const Report& r);

}  // namespace qkforge
