#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transversal/estimators.hpp"
#include "transversal/models.hpp"

namespace transversal {

/// One experiment as read from a TOML file.
struct ExperimentConfig {
  std::string id = "experiment";
  std::string estimator;
  std::uint64_t seed = 0;
  std::size_t n = 10000;
  double R = 50.0;
  std::optional<double> K;
  int r = 2;
  int r_max = 3;
  int k = 1;
  std::vector<std::string> test_functions;  // empty: the 20 built-ins
  bool empirical_intensity = false;
  std::size_t volume_samples = 100000;
  std::size_t oracle_systems = 200;
  std::size_t oracle_functions = 100;
  ModelSpec model{LatticeModel{}};
  std::optional<std::string> csv_path;
  std::optional<std::string> json_path;
};

/// Estimators accepted in [experiment].estimator.
const std::vector<std::string>& known_estimators();

/// Throws UsageError with the offending field named.
ExperimentConfig parse_config_string(const std::string& text, const std::string& source = "<string>");
ExperimentConfig parse_config_file(const std::string& path);

/// Parse a model table given as TOML text (the body of a [model] section).
ModelSpec parse_model_string(const std::string& text);

struct ResultRow {
  std::string estimator;
  std::optional<int> r;
  std::size_t n = 0;
  double R = 0.0;
  std::optional<double> K;
  double value = 0.0;
  double std_error = 0.0;
  double truncated_fraction = 0.0;
  bool lower_bound = false;
  double wall_ms = 0.0;
};

/// A machine-checkable acceptance threshold.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<Check> checks;
  nlohmann::json diagnostics = nlohmann::json::object();

  [[nodiscard]] bool all_passed() const;
};

struct RunOptions {
  unsigned threads = 0;
  /// Record wall-clock times; off by default so output is byte-stable.
  bool timing = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct SweepResult {
  ExperimentResult result;
  std::vector<Estimate> sequence;
  std::string verdict;
};

/// Re-run the experiment once per value of `param` (R, n, K, r) with the
/// same seed. Only single-estimate experiments can be swept.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param,
                      const std::vector<double>& values, const RunOptions& opts = {});

std::uint64_t fnv1a64(const std::string& text);

/// "kind#<16 hex digits of the description hash>".
std::string model_label(const ModelSpec& spec);

std::string csv_header();
std::string to_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows);

nlohmann::json sidecar_json(const ExperimentConfig& cfg, const ExperimentResult& result);

/// First `count` Palm configurations drawn from the experiment's seed.
nlohmann::json dump_configs(const ExperimentConfig& cfg, std::size_t count);

}  // namespace transversal
