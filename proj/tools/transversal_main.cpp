#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "transversal/errors.hpp"
#include "transversal/experiment.hpp"
#include "transversal/oracle.hpp"

using namespace transversal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAssert = 2;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ResourceError("write to '" + path + "' failed");
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--values: cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw UsageError("--values must list at least one number");
  return out;
}

struct OutputFlags {
  std::string csv;
  std::string json;
};

void emit(const ExperimentConfig& cfg, const ExperimentResult& res, const OutputFlags& flags) {
  const std::string csv = csv_header() + to_csv(cfg, res.rows);
  const std::string csv_path = !flags.csv.empty() ? flags.csv : cfg.csv_path.value_or("");
  if (csv_path.empty() || csv_path == "-")
    std::cout << csv;
  else
    write_file(csv_path, csv);
  const std::string json_path = !flags.json.empty() ? flags.json : cfg.json_path.value_or("");
  if (!json_path.empty()) write_file(json_path, sidecar_json(cfg, res).dump(2) + "\n");
}

int report_checks(const ExperimentResult& res, bool assert_mode) {
  for (const auto& c : res.checks)
    std::cerr << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << "\n";
  if (assert_mode && !res.all_passed()) {
    std::cerr << "acceptance threshold violated\n";
    return kExitAssert;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transverse measures, intensities and intersection covolumes"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 0;
  bool assert_mode = false;
  bool timing = false;
  OutputFlags flags;
  std::string dump_path;
  std::size_t dump_count = 10;

  auto* run = app.add_subcommand("run", "Run one experiment from a TOML config");
  run->add_option("config", config_path, "Experiment config (TOML)")->required();
  run->add_flag("--assert", assert_mode, "Exit 2 when an acceptance threshold is violated");
  run->add_option("--threads", threads, "Worker threads (0: all cores)");
  run->add_flag("--timing", timing, "Record wall-clock time per row");
  run->add_option("--csv", flags.csv, "CSV output path ('-' for stdout)");
  run->add_option("--json", flags.json, "JSON sidecar path");
  run->add_option("--dump-configs", dump_path, "Write the first Palm configurations as JSON");
  run->add_option("--dump-count", dump_count, "Number of configurations for --dump-configs");

  std::string param;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Re-run an experiment over a list of parameter values");
  sweep->add_option("config", config_path, "Experiment config (TOML)")->required();
  sweep->add_option("--param", param, "Parameter to vary: R, K, n or r")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_flag("--assert", assert_mode, "Exit 2 when the verdict contradicts the closed form");
  sweep->add_option("--threads", threads, "Worker threads (0: all cores)");
  sweep->add_flag("--timing", timing, "Record wall-clock time per row");
  sweep->add_option("--csv", flags.csv, "CSV output path ('-' for stdout)");
  sweep->add_option("--json", flags.json, "JSON sidecar path");

  bool all = false;
  std::uint64_t seed = 0;
  std::size_t systems = 200;
  std::size_t functions = 100;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact checks on random finite systems");
  oracle_cmd->add_flag("--all", all, "Run every check (the default)");
  oracle_cmd->add_option("--seed", seed, "Seed")->required();
  oracle_cmd->add_option("--systems", systems, "Number of random systems");
  oracle_cmd->add_option("--functions", functions, "Random test functions per identity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    RunOptions opts;
    opts.threads = threads;
    opts.timing = timing;

    if (*run) {
      const ExperimentConfig cfg = parse_config_file(config_path);
      if (!dump_path.empty()) write_file(dump_path, dump_configs(cfg, dump_count).dump(2) + "\n");
      const ExperimentResult res = run_experiment(cfg, opts);
      emit(cfg, res, flags);
      return report_checks(res, assert_mode);
    }
    if (*sweep) {
      const ExperimentConfig cfg = parse_config_file(config_path);
      const SweepResult res = run_sweep(cfg, param, parse_values(values), opts);
      emit(cfg, res.result, flags);
      std::cerr << "verdict: " << res.verdict << "\n";
      return report_checks(res.result, assert_mode);
    }
    if (*oracle_cmd) {
      (void)all;
      oracle::SuiteOptions so;
      so.systems = systems;
      so.functions = functions;
      bool ok = true;
      for (const auto& c : oracle::run_suite(seed, so)) {
        std::cout << (c.ok() ? "ok   " : "FAIL ") << c.name << " " << c.passed << "/" << c.total;
        if (!c.first_failure.empty()) std::cout << " first failure: " << c.first_failure;
        std::cout << "\n";
        ok = ok && c.ok();
      }
      return ok ? kExitOk : kExitAssert;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kExitError;
  }
  return kExitError;
}
