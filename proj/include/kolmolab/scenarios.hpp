#pragma once
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kolmolab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string scenario;
  std::string model = "linear";
  int n = 2, d = 1;
  std::vector<double> model_params;
  std::vector<double> model_betas;  // optional per-variable Holder exponents
  double model_eta = 0.0;           // optional, 0 keeps the built-in default
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out_dir = "runs/out";
  int jobs = 1;
  std::map<std::string, double> params;  // scenario-specific knobs

  double param(const std::string& key, double fallback) const;
  void apply_override(const std::string& key_value);  // "key=value"
  void validate() const;

  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;  // canonical echo
};

struct Check {
  std::string name;
  double measured = 0.0;
  std::string relation;  // "<=", ">=", "==", "bool"
  double threshold = 0.0;
  bool pass = false;
};

struct ScenarioResult {
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> files;  // name -> bytes
  bool all_pass() const;
};

ScenarioResult run_scenario(const RunConfig& cfg);

/// Runs the scenario and persists artifacts + manifest under cfg.out_dir.
/// Returns 0 when every check passes, 1 otherwise.
int run_and_write(const RunConfig& cfg);

/// Renders the pass/fail summary of a previous run. Throws on corrupt manifests.
std::string render_report(const std::string& run_dir);

std::string checks_csv(const std::vector<Check>& checks);

}  // namespace kolmolab
