#include "transversal/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "transversal/errors.hpp"
#include "transversal/oracle.hpp"

namespace transversal {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void reject_unknown_keys(const toml::table& t, const std::string& section,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, node] : t) {
    const std::string k(key.str());
    if (!allowed.count(k)) throw UsageError("unknown key '" + section + "." + k + "'");
  }
}

double get_double(const toml::table& t, const std::string& section, const std::string& key) {
  const auto* node = t.get(key);
  if (!node) throw UsageError("missing field '" + section + "." + key + "'");
  if (auto v = node->value<double>()) return *v;
  throw UsageError("field '" + section + "." + key + "' must be a number");
}

double get_double_or(const toml::table& t, const std::string& section, const std::string& key,
                     double fallback) {
  return t.contains(key) ? get_double(t, section, key) : fallback;
}

std::int64_t get_int(const toml::table& t, const std::string& section, const std::string& key) {
  const auto* node = t.get(key);
  if (!node) throw UsageError("missing field '" + section + "." + key + "'");
  if (auto v = node->as_integer()) return v->get();
  throw UsageError("field '" + section + "." + key + "' must be an integer");
}

std::int64_t get_int_or(const toml::table& t, const std::string& section, const std::string& key,
                        std::int64_t fallback) {
  return t.contains(key) ? get_int(t, section, key) : fallback;
}

std::size_t get_count_or(const toml::table& t, const std::string& section, const std::string& key,
                         std::size_t fallback) {
  const std::int64_t v = get_int_or(t, section, key, static_cast<std::int64_t>(fallback));
  if (v < 1) throw UsageError("field '" + section + "." + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

std::string get_string(const toml::table& t, const std::string& section, const std::string& key) {
  const auto* node = t.get(key);
  if (!node) throw UsageError("missing field '" + section + "." + key + "'");
  if (auto v = node->value<std::string>()) return *v;
  throw UsageError("field '" + section + "." + key + "' must be a string");
}

std::vector<double> number_list(const toml::node& node, const std::string& field) {
  const auto* arr = node.as_array();
  if (!arr) throw UsageError("field '" + field + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : *arr) {
    auto v = x.value<double>();
    if (!v) throw UsageError("field '" + field + "' must contain only numbers");
    out.push_back(*v);
  }
  return out;
}

// Square basis from a list of rows, or a flat list for dimension 1.
std::pair<std::vector<double>, int> basis_rows(const toml::node& node, const std::string& field) {
  const auto* arr = node.as_array();
  if (!arr || arr->empty()) throw UsageError("field '" + field + "' must be a non-empty array");
  if (!(*arr)[0].is_array()) {
    auto flat = number_list(node, field);
    if (flat.size() != 1) throw UsageError("field '" + field + "' must be a list of rows");
    return {flat, 1};
  }
  const int dim = static_cast<int>(arr->size());
  std::vector<double> flat;
  for (const auto& row : *arr) {
    auto values = number_list(row, field);
    if (static_cast<int>(values.size()) != dim)
      throw UsageError("field '" + field + "' must be a square matrix");
    flat.insert(flat.end(), values.begin(), values.end());
  }
  return {flat, dim};
}

oracle::Rational parse_rational(const toml::node& node, const std::string& field) {
  if (auto i = node.as_integer()) return oracle::Rational(static_cast<long>(i->get()));
  auto s = node.value<std::string>();
  if (!s) throw UsageError("field '" + field + "' must hold rational strings like \"1/3\"");
  try {
    oracle::Rational q(*s);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw UsageError("field '" + field + "': cannot parse '" + *s + "' as a rational");
  }
}

ModelSpec parse_model(const toml::table& t, const std::string& section) {
  const std::string kind = get_string(t, section, "kind");
  if (kind == "lattice") {
    reject_unknown_keys(t, section, {"kind", "basis"});
    if (!t.contains("basis")) return ModelSpec::lattice({1.0}, 1);
    auto [basis, dim] = basis_rows(*t.get("basis"), section + ".basis");
    return ModelSpec::lattice(basis, dim);
  }
  if (kind == "cutproject") {
    reject_unknown_keys(t, section, {"kind", "basis", "window"});
    CutProjectModel m;
    if (t.contains("basis")) {
      auto [basis, dim] = basis_rows(*t.get("basis"), section + ".basis");
      if (dim != 2) throw UsageError("field '" + section + ".basis' must be a 2x2 matrix");
      std::copy(basis.begin(), basis.end(), m.basis.begin());
    }
    if (t.contains("window")) {
      auto w = number_list(*t.get("window"), section + ".window");
      if (w.size() != 2) throw UsageError("field '" + section + ".window' must be [w_lo, w_hi]");
      if (!(w[0] < w[1]))
        throw UsageError("field '" + section + ".window' must satisfy w_lo < w_hi (got [" +
                         fmt_double(w[0]) + ", " + fmt_double(w[1]) + "])");
      m.w_lo = w[0];
      m.w_hi = w[1];
    }
    return ModelSpec::cut_project(m);
  }
  if (kind == "poisson") {
    reject_unknown_keys(t, section, {"kind", "rate", "dim"});
    const double rate = get_double_or(t, section, "rate", 1.0);
    if (!(rate > 0.0)) throw UsageError("field '" + section + ".rate' must be positive");
    return ModelSpec::poisson(rate, static_cast<int>(get_int_or(t, section, "dim", 1)));
  }
  if (kind == "suspension") {
    reject_unknown_keys(t, section, {"kind", "eps", "alpha"});
    const double eps = get_double_or(t, section, "eps", 0.1);
    if (!(eps > 0.0 && eps < 1.0)) throw UsageError("field '" + section + ".eps' must lie in (0, 1)");
    return ModelSpec::suspension(eps, get_double_or(t, section, "alpha", (std::sqrt(5.0) - 1.0) / 2.0));
  }
  if (kind == "extension") {
    reject_unknown_keys(t, section, {"kind", "inner"});
    const auto* inner = t.get_as<toml::table>("inner");
    if (!inner) throw UsageError("missing table '" + section + ".inner'");
    return ModelSpec::extension(parse_model(*inner, section + ".inner"));
  }
  if (kind == "cyclic") {
    reject_unknown_keys(t, section, {"kind", "n", "weights", "phases"});
    const std::int64_t n = get_int(t, section, "n");
    if (n < 1) throw UsageError("field '" + section + ".n' must be >= 1");
    const auto* weights = t.get_as<toml::array>("weights");
    const auto* phases = t.get_as<toml::array>("phases");
    if (!weights) throw UsageError("field '" + section + ".weights' must be an array");
    if (!phases) throw UsageError("field '" + section + ".phases' must be an array");
    std::vector<oracle::Rational> mass;
    for (const auto& w : *weights) mass.push_back(parse_rational(w, section + ".weights"));
    std::vector<std::vector<std::int64_t>> ph;
    for (const auto& row : *phases) {
      const auto* arr = row.as_array();
      if (!arr) throw UsageError("field '" + section + ".phases' must be a list of phase lists");
      std::vector<std::int64_t> list;
      for (const auto& p : *arr) {
        auto v = p.value<std::int64_t>();
        if (!v) throw UsageError("field '" + section + ".phases' must contain integers");
        list.push_back(*v);
      }
      ph.push_back(std::move(list));
    }
    return ModelSpec::cyclic(oracle::CyclicSystem::make(n, mass, ph));
  }
  throw UsageError("field '" + section + ".kind': unknown model kind '" + kind + "'");
}

ExperimentConfig parse_table(const toml::table& root) {
  reject_unknown_keys(root, "", {"experiment", "model", "output"});
  const auto* exp = root.get_as<toml::table>("experiment");
  if (!exp) throw UsageError("missing table [experiment]");
  reject_unknown_keys(*exp, "experiment",
                      {"id", "estimator", "seed", "n", "R", "K", "r", "r_max", "k", "functions",
                       "empirical_intensity", "volume_samples", "systems", "function_trials"});
  ExperimentConfig cfg;
  if (exp->contains("id")) cfg.id = get_string(*exp, "experiment", "id");
  cfg.estimator = get_string(*exp, "experiment", "estimator");
  const auto& names = known_estimators();
  if (std::find(names.begin(), names.end(), cfg.estimator) == names.end())
    throw UsageError("field 'experiment.estimator': unknown estimator '" + cfg.estimator + "'");
  if (!exp->contains("seed")) throw UsageError("missing field 'experiment.seed' (a seed is mandatory)");
  const std::int64_t seed = get_int(*exp, "experiment", "seed");
  if (seed < 0) throw UsageError("field 'experiment.seed' must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.n = get_count_or(*exp, "experiment", "n", cfg.n);
  cfg.R = get_double_or(*exp, "experiment", "R", cfg.R);
  if (!(cfg.R > 0.0)) throw UsageError("field 'experiment.R' must be positive");
  if (exp->contains("K")) {
    cfg.K = get_double(*exp, "experiment", "K");
    if (!(*cfg.K > 0.0)) throw UsageError("field 'experiment.K' must be positive");
  }
  cfg.r = static_cast<int>(get_int_or(*exp, "experiment", "r", cfg.r));
  cfg.r_max = static_cast<int>(get_int_or(*exp, "experiment", "r_max", cfg.r_max));
  cfg.k = static_cast<int>(get_int_or(*exp, "experiment", "k", cfg.k));
  if (cfg.r < 1) throw UsageError("field 'experiment.r' must be >= 1");
  if (cfg.r_max < 2) throw UsageError("field 'experiment.r_max' must be >= 2");
  if (cfg.k < 1) throw UsageError("field 'experiment.k' must be >= 1");
  if (const auto* fs = exp->get_as<toml::array>("functions")) {
    for (const auto& f : *fs) {
      auto v = f.value<std::string>();
      if (!v) throw UsageError("field 'experiment.functions' must contain strings");
      TestFunction::parse(*v);
      cfg.test_functions.push_back(*v);
    }
  }
  if (const auto* e = exp->get("empirical_intensity")) {
    auto v = e->value<bool>();
    if (!v) throw UsageError("field 'experiment.empirical_intensity' must be a boolean");
    cfg.empirical_intensity = *v;
  }
  cfg.volume_samples = get_count_or(*exp, "experiment", "volume_samples", cfg.volume_samples);
  cfg.oracle_systems = get_count_or(*exp, "experiment", "systems", cfg.oracle_systems);
  cfg.oracle_functions = get_count_or(*exp, "experiment", "function_trials", cfg.oracle_functions);

  if (cfg.estimator != "oracle-suite") {
    const auto* model = root.get_as<toml::table>("model");
    if (!model) throw UsageError("missing table [model]");
    cfg.model = parse_model(*model, "model");
    cfg.model.validate();
  }
  if (const auto* out = root.get_as<toml::table>("output")) {
    reject_unknown_keys(*out, "output", {"csv", "json"});
    if (out->contains("csv")) cfg.csv_path = get_string(*out, "output", "csv");
    if (out->contains("json")) cfg.json_path = get_string(*out, "output", "json");
  }
  return cfg;
}

EstimatorOptions estimator_options(const ExperimentConfig& cfg, const RunOptions& opts) {
  EstimatorOptions e;
  e.threads = opts.threads;
  e.empirical_intensity = cfg.empirical_intensity;
  e.voronoi.volume_samples = cfg.volume_samples;
  return e;
}

ResultRow row_from(const std::string& name, std::optional<int> r, const Estimate& e) {
  ResultRow row;
  row.estimator = name;
  row.r = r;
  row.n = e.n;
  row.R = e.R;
  row.K = e.K;
  row.value = e.value;
  row.std_error = e.std_error;
  row.truncated_fraction = e.truncated_fraction;
  row.lower_bound = e.is_lower_bound;
  return row;
}

nlohmann::json estimate_json(const Estimate& e) {
  nlohmann::json j = {{"value", e.value},
                      {"stderr", e.std_error},
                      {"n", e.n},
                      {"R", e.R},
                      {"truncated_fraction", e.truncated_fraction},
                      {"is_lower_bound", e.is_lower_bound},
                      {"exact", e.exact}};
  if (e.K) j["K"] = *e.K;
  return j;
}

std::string describe_estimate(const Estimate& e) {
  return fmt_double(e.value) + " +- " + fmt_double(e.std_error);
}

void add_check(ExperimentResult& res, std::string name, bool passed, std::string detail) {
  res.checks.push_back({std::move(name), passed, std::move(detail)});
}

constexpr double kExactSlack = 1e-12;

bool within(double value, double target, double sigma) {
  return std::abs(value - target) <= 3.0 * sigma + kExactSlack * std::max(1.0, std::abs(target));
}

double intensity_radius(const ExperimentConfig& cfg) { return cfg.K.value_or(cfg.R / 2.0); }

void check_against_analytic(ExperimentResult& res, const std::string& what, const Estimate& e,
                            const AnalyticValues& a, int r) {
  auto it = a.covolume.find(r);
  if (it == a.covolume.end()) return;
  if (std::isinf(it->second)) {
    add_check(res, what + ":flagged", e.truncated_fraction > 0.99,
              "infinite covolume must show as boundary-flagged on >99% of samples, got " +
                  fmt_double(e.truncated_fraction));
  } else {
    add_check(res, what + ":closed-form", within(e.value, it->second, e.std_error),
              describe_estimate(e) + " vs " + fmt_double(it->second));
  }
}

ExperimentResult run_once(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentResult res;
  const Rng rng(cfg.seed);
  const EstimatorOptions eo = estimator_options(cfg, opts);
  const auto& model = cfg.model;
  const std::string& est = cfg.estimator;

  if (est == "intensity") {
    const Estimate e = estimate_intensity(model, intensity_radius(cfg), cfg.n, rng, eo);
    res.rows.push_back(row_from("intensity", std::nullopt, e));
    res.diagnostics["intensity"] = estimate_json(e);
    const auto a = analytic_values(model);
    if (a.intensity)
      add_check(res, "intensity:closed-form", within(e.value, *a.intensity, e.std_error),
                describe_estimate(e) + " vs " + fmt_double(*a.intensity));
  } else if (est == "kac") {
    const Estimate e = estimate_covolume_kac(model, cfg.r, cfg.n, cfg.R, rng, eo);
    res.rows.push_back(row_from("kac", cfg.r, e));
    res.diagnostics["kac"] = estimate_json(e);
    const auto a = analytic_values(model);
    check_against_analytic(res, "kac", e, a, cfg.r);
    if (a.covolume_upper && cfg.r == 2)
      add_check(res, "kac:upper-bound", e.value <= *a.covolume_upper + 3.0 * e.std_error,
                describe_estimate(e) + " vs upper bound " + fmt_double(*a.covolume_upper));
  } else if (est == "alt") {
    const double K = cfg.K.value_or(std::min(20.0, cfg.R / 4.0));
    const Estimate e = estimate_covolume_alt(model, cfg.n, K, cfg.R, rng, eo);
    res.rows.push_back(row_from("alt", 2, e));
    res.diagnostics["alt"] = estimate_json(e);
    check_against_analytic(res, "alt", e, analytic_values(model), 2);
  } else if (est == "mecke") {
    std::vector<TestFunction> fs;
    if (cfg.test_functions.empty())
      fs = builtin_test_functions();
    else
      for (const auto& id : cfg.test_functions) fs.push_back(TestFunction::parse(id));
    std::size_t above3 = 0;
    std::size_t above5 = 0;
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& f : fs) {
      const MeckeReport m = mecke_check(model, f, cfg.n, cfg.R, rng.fork(fnv1a64(f.id())), eo);
      ResultRow row = row_from("mecke:" + f.id(), std::nullopt, m.lhs);
      row.value = m.lhs.value - m.rhs.value;
      row.std_error = std::hypot(m.lhs.std_error, m.rhs.std_error);
      res.rows.push_back(row);
      reports.push_back({{"id", f.id()},
                         {"lhs", estimate_json(m.lhs)},
                         {"rhs", estimate_json(m.rhs)},
                         {"z", m.z_score}});
      above3 += m.z_score > 3.0 ? 1 : 0;
      above5 += m.z_score > 5.0 ? 1 : 0;
    }
    res.diagnostics["mecke"] = reports;
    const std::size_t budget = std::max<std::size_t>(1, fs.size() / 20);
    add_check(res, "mecke:|z|>3", above3 <= budget,
              std::to_string(above3) + " of " + std::to_string(fs.size()) + " (budget " +
                  std::to_string(budget) + ")");
    add_check(res, "mecke:|z|>5", above5 == 0, std::to_string(above5) + " of " + std::to_string(fs.size()));
  } else if (est == "inequality") {
    const InequalityReport rep = inequality_report(model, cfg.r_max, cfg.n, cfg.R, rng, eo);
    res.rows.push_back(row_from("intensity", std::nullopt, rep.intensity));
    for (std::size_t i = 0; i < rep.covolume.size(); ++i)
      res.rows.push_back(row_from("kac", static_cast<int>(i) + 1, rep.covolume[i]));
    const auto a = analytic_values(model);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : rep.rows) {
      ResultRow margin = row_from("inequality-margin", row.r, row.covolume);
      margin.value = row.covolume.value - row.bound;
      margin.std_error = std::hypot(row.covolume.std_error, row.bound_error);
      res.rows.push_back(margin);
      rows.push_back({{"r", row.r},
                      {"covolume", estimate_json(row.covolume)},
                      {"bound", row.bound},
                      {"bound_stderr", row.bound_error},
                      {"margin_z", row.margin_z}});
      const std::string tag = "inequality:r=" + std::to_string(row.r);
      add_check(res, tag + ":holds", row.margin_z >= -3.0, "margin z = " + fmt_double(row.margin_z));
      if (a.periodic && *a.periodic)
        add_check(res, tag + ":equality", std::abs(row.margin_z) <= 3.0, "margin z = " + fmt_double(row.margin_z));
      if (a.periodic && !*a.periodic && row.r == 2)
        add_check(res, tag + ":strict", row.margin_z > 3.0, "margin z = " + fmt_double(row.margin_z));
      if (a.covolume_upper && row.r == 2)
        add_check(res, tag + ":upper-bound",
                  row.covolume.value <= *a.covolume_upper + 3.0 * row.covolume.std_error,
                  describe_estimate(row.covolume) + " vs upper bound " + fmt_double(*a.covolume_upper));
    }
    res.diagnostics["intensity"] = estimate_json(rep.intensity);
    res.diagnostics["inequality"] = rows;
    if (a.intensity)
      add_check(res, "intensity:closed-form", within(rep.intensity.value, *a.intensity, rep.intensity.std_error),
                describe_estimate(rep.intensity) + " vs " + fmt_double(*a.intensity));
  } else if (est == "monotonicity") {
    const MonotonicityReport rep = monotonicity_report(model, cfg.n, cfg.R, rng, eo);
    res.rows.push_back(row_from("kac:base", 2, rep.covolume_base));
    res.rows.push_back(row_from("kac:enlarged", 2, rep.covolume_enlarged));
    res.diagnostics["monotonicity"] = {{"base", estimate_json(rep.covolume_base)},
                                       {"enlarged", estimate_json(rep.covolume_enlarged)},
                                       {"intensity_base", rep.intensity_base},
                                       {"intensity_enlarged", rep.intensity_enlarged}};
    const auto& b = rep.covolume_base;
    const auto& e = rep.covolume_enlarged;
    add_check(res, "monotonicity:enlarged=1", within(e.value, 1.0, e.std_error), describe_estimate(e));
    add_check(res, "monotonicity:base<=enlarged",
              b.value <= e.value + 3.0 * std::hypot(b.std_error, e.std_error),
              describe_estimate(b) + " vs " + describe_estimate(e));
  } else if (est == "lambda-probe") {
    const LambdaProbe p = lambda_probe(model, cfg.k, cfg.n, cfg.R, rng);
    ResultRow row;
    row.estimator = "lambda-probe";
    row.r = cfg.k;
    row.n = p.samples;
    row.R = cfg.R;
    row.value = p.gap;
    res.rows.push_back(row);
    res.diagnostics["lambda_probe"] = {{"gap", p.gap}, {"pooled", p.pooled}, {"samples", p.samples}};
  } else if (est == "oracle-suite") {
    oracle::SuiteOptions so;
    so.systems = cfg.oracle_systems;
    so.functions = cfg.oracle_functions;
    const auto checks = oracle::run_suite(cfg.seed, so);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : checks) {
      ResultRow row;
      row.estimator = "oracle:" + c.name;
      row.n = c.total;
      row.value = static_cast<double>(c.passed);
      res.rows.push_back(row);
      add_check(res, "oracle:" + c.name, c.ok(),
                std::to_string(c.passed) + "/" + std::to_string(c.total) +
                    (c.first_failure.empty() ? "" : " first failure: " + c.first_failure));
      j.push_back({{"name", c.name}, {"passed", c.passed}, {"total", c.total}, {"first_failure", c.first_failure}});
    }
    res.diagnostics["oracle"] = j;
  } else {
    throw UsageError("unknown estimator '" + est + "'");
  }
  return res;
}

}  // namespace

const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> names = {"intensity",  "kac",          "alt",
                                                 "mecke",      "inequality",   "monotonicity",
                                                 "lambda-probe", "oracle-suite"};
  return names;
}

ExperimentConfig parse_config_string(const std::string& text, const std::string& source) {
  try {
    return parse_table(toml::parse(std::string_view(text), std::string_view(source)));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw UsageError(os.str());
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config_string(buf.str(), path);
  return cfg;
}

ModelSpec parse_model_string(const std::string& text) {
  try {
    return parse_model(toml::parse(std::string_view(text), std::string_view("<model>")), "model");
  } catch (const toml::parse_error& e) {
    throw UsageError(std::string("model: ") + std::string(e.description()));
  }
}

bool ExperimentResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res = run_once(cfg, opts);
  if (opts.timing) {
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& row : res.rows) row.wall_ms = std::round(ms);
  }
  return res;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param,
                      const std::vector<double>& values, const RunOptions& opts) {
  if (cfg.estimator != "intensity" && cfg.estimator != "kac" && cfg.estimator != "alt")
    throw UsageError("sweep supports the intensity, kac and alt estimators, not '" + cfg.estimator + "'");
  if (values.size() < 2) throw UsageError("sweep needs at least two values");
  SweepResult out;
  nlohmann::json steps = nlohmann::json::array();
  for (double v : values) {
    ExperimentConfig c = cfg;
    if (param == "R") {
      c.R = v;
    } else if (param == "K") {
      c.K = v;
    } else if (param == "n") {
      c.n = static_cast<std::size_t>(v);
    } else if (param == "r") {
      c.r = static_cast<int>(v);
    } else {
      throw UsageError("sweep parameter must be one of R, K, n, r (got '" + param + "')");
    }
    ExperimentResult step = run_experiment(c, opts);
    const ResultRow& main = step.rows.front();
    Estimate e;
    e.value = main.value;
    e.std_error = main.std_error;
    e.n = main.n;
    e.R = main.R;
    e.K = main.K;
    e.truncated_fraction = main.truncated_fraction;
    e.is_lower_bound = main.lower_bound;
    out.sequence.push_back(e);
    steps.push_back({{"param", param}, {"value", v}, {"estimate", estimate_json(e)}});
    out.result.rows.insert(out.result.rows.end(), step.rows.begin(), step.rows.end());
  }
  out.verdict = sweep_verdict(out.sequence);
  out.result.diagnostics["sweep"] = {{"param", param}, {"steps", steps}, {"verdict", out.verdict}};

  const auto a = analytic_values(cfg.model);
  if (cfg.estimator == "kac" || cfg.estimator == "alt") {
    const int r = cfg.estimator == "alt" ? 2 : cfg.r;
    auto it = a.covolume.find(r);
    const bool infinite = it != a.covolume.end() && std::isinf(it->second);
    if (infinite) {
      add_check(out.result, "sweep:diverging", out.verdict == "diverging", "verdict " + out.verdict);
      double min_flagged = 1.0;
      for (const auto& e : out.sequence) min_flagged = std::min(min_flagged, e.truncated_fraction);
      add_check(out.result, "sweep:flagged", min_flagged > 0.99,
                "smallest flagged fraction " + fmt_double(min_flagged));
    } else if (param == "R") {
      add_check(out.result, "sweep:stable", out.verdict == "stable", "verdict " + out.verdict);
    }
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_label(const ModelSpec& spec) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(spec.describe())));
  return spec.kind() + "#" + buf;
}

std::string csv_header() {
  return "experiment_id,model,estimator,r,n,R,K,seed,value,stderr,truncated_fraction,lower_bound,wall_ms\n";
}

std::string to_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  const std::string model = cfg.estimator == "oracle-suite" ? "oracle" : model_label(cfg.model);
  std::string out;
  for (const auto& row : rows) {
    out += cfg.id + "," + model + "," + row.estimator + ",";
    out += (row.r ? std::to_string(*row.r) : "") + ",";
    out += std::to_string(row.n) + ",";
    out += fmt_double(row.R) + ",";
    out += (row.K ? fmt_double(*row.K) : "") + ",";
    out += std::to_string(cfg.seed) + ",";
    out += fmt_double(row.value) + ",";
    out += fmt_double(row.std_error) + ",";
    out += fmt_double(row.truncated_fraction) + ",";
    out += std::string(row.lower_bound ? "1" : "0") + ",";
    out += fmt_double(row.wall_ms) + "\n";
  }
  return out;
}

nlohmann::json sidecar_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::json j;
  j["experiment_id"] = cfg.id;
  j["estimator"] = cfg.estimator;
  j["seed"] = cfg.seed;
  if (cfg.estimator != "oracle-suite") {
    j["model"] = model_label(cfg.model);
    j["model_description"] = cfg.model.describe();
  }
  j["diagnostics"] = result.diagnostics;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  return j;
}

nlohmann::json dump_configs(const ExperimentConfig& cfg, std::size_t count) {
  const Rng rng(cfg.seed);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < count; ++i) {
    Rng s = rng.fork(i);
    const PalmSample p = sample_palm(cfg.model, cfg.R, s);
    out.push_back({{"label", p.label}, {"returns", to_json(p.returns)}});
  }
  return out;
}

}  // namespace transversal
