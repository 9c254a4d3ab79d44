// Acceptance suite: one PASS/FAIL line per criterion.
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "transversal/estimators.hpp"
#include "transversal/experiment.hpp"
#include "transversal/oracle.hpp"

using namespace transversal;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Verdict&)>& body) {
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  if (!v.pass) ++failures;
  std::printf("%s %d %s:%s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.str().c_str());
  std::fflush(stdout);
}

std::string show(const Estimate& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g +- %.2g", e.value, e.std_error);
  return buf;
}

ExperimentConfig experiment(const ModelSpec& model, const std::string& estimator, std::size_t n, double R) {
  ExperimentConfig cfg;
  cfg.id = estimator;
  cfg.estimator = estimator;
  cfg.seed = 7;
  cfg.n = n;
  cfg.R = R;
  cfg.model = model;
  return cfg;
}

const double kCutProjectDensity = 1.0 / (2.0 * std::sqrt(2.0));

// Points of the default cut-and-project set in [-L, L] per unit length.
double brute_cut_project_density(double L) {
  const double root2 = std::sqrt(2.0);
  long count = 0;
  const long span = static_cast<long>(L / root2) + 2;
  for (long n = -span; n <= span; ++n) {
    const double shift = n * root2;
    for (long m = static_cast<long>(std::ceil(shift)); m <= static_cast<long>(std::floor(1.0 + shift)); ++m)
      if (std::abs(m + shift) <= L) ++count;
  }
  return count / (2.0 * L);
}

}  // namespace

int main() {
  const Rng rng(7);

  criterion(1, "oracle exactness", [](Verdict& v) {
    oracle::SuiteOptions opts;
    opts.systems = 200;
    opts.functions = 100;
    opts.r_max = 3;
    for (const auto& c : oracle::run_suite(7, opts)) {
      v.detail << " " << c.name << "=" << c.passed << "/" << c.total;
      v.require(c.ok(), c.name + " " + c.first_failure);
    }
  });

  criterion(2, "lattice equality", [&](Verdict& v) {
    for (double step : {1.0, 2.0}) {
      const auto spec = ModelSpec::lattice({step});
      const double iota = 1.0 / step;
      const auto kac = estimate_covolume_kac(spec, 2, 10000, 20, rng);
      const auto est = estimate_intensity(spec, 10, 10000, rng);
      v.detail << " step " << step << ": I2=" << show(kac) << " iota_hat=" << show(est);
      v.require(kac.std_error == 0.0, "nonzero variance");
      v.require(std::abs(kac.value - iota) < 1e-12, "I2 != iota");
      v.require(std::abs(est.value - iota) <= 3.0 * est.std_error, "iota_hat off");
      v.require(!kac.is_lower_bound, "truncated lattice cells");
    }
  });

  criterion(3, "basic inequality", [&](Verdict& v) {
    struct Entry {
      const char* name;
      ModelSpec spec;
      std::size_t n;
      double R;
    };
    const std::vector<Entry> zoo = {
        {"lattice-Z", ModelSpec::lattice({1.0}), 2000, 20},
        {"lattice-2Z", ModelSpec::lattice({2.0}), 2000, 20},
        {"lattice-plane", ModelSpec::lattice({1.0, 0.0, 0.5, 1.0}, 2), 200, 4},
        {"cutproject", ModelSpec::cut_project(), 100000, 100},
        {"suspension", ModelSpec::suspension(0.1), 100000, 100},
        {"poisson", ModelSpec::poisson(1.0), 20000, 25},
        {"extension", ModelSpec::extension(ModelSpec::cut_project()), 20000, 100},
    };
    for (const auto& e : zoo) {
      const auto rep = inequality_report(e.spec, 3, e.n, e.R, rng);
      for (const auto& row : rep.rows) {
        v.detail << " " << e.name << "/r" << row.r << " z=" << row.margin_z;
        v.require(row.margin_z >= -3.0, std::string(e.name) + " violates the inequality");
      }
    }
    oracle::SuiteOptions opts;
    opts.systems = 200;
    opts.functions = 1;
    for (const auto& c : oracle::run_suite(8, opts)) {
      if (c.name != "basic-inequality" && c.name != "equality-iff-coset") continue;
      v.detail << " oracle " << c.name << "=" << c.passed << "/" << c.total;
      v.require(c.ok(), c.name);
    }
  });

  criterion(4, "suspension without gap", [&](Verdict& v) {
    const auto spec = ModelSpec::suspension(0.1);
    const auto rep = inequality_report(spec, 2, 100000, 200, rng);
    const auto& iota = rep.intensity;
    const auto& row = rep.rows.at(0);
    v.detail << " iota_hat=" << show(iota) << " I=" << show(row.covolume) << " margin_z=" << row.margin_z;
    v.require(std::abs(iota.value - 1.0 / 1.1) <= 3.0 * iota.std_error, "iota_hat != 1/1.1");
    v.require(row.margin_z > 3.0, "I not above iota_hat by 3 sigma");
    v.require(row.covolume.value <= 1.0 + 3.0 * row.covolume.std_error, "I above 1");
    const auto mono = monotonicity_report(spec, 100000, 200, rng);
    const auto& b = mono.covolume_base;
    const auto& t = mono.covolume_enlarged;
    v.detail << " I_Y=" << show(b) << " I_Ytilde=" << show(t);
    v.require(std::abs(t.value - 1.0) <= 3.0 * t.std_error + 1e-12, "I_Ytilde != 1");
    v.require(b.value <= t.value + 3.0 * std::hypot(b.std_error, t.std_error), "monotonicity");
  });

  criterion(5, "cut-and-project", [&](Verdict& v) {
    const auto spec = ModelSpec::cut_project();
    const double brute = brute_cut_project_density(1e5);
    const auto iota = estimate_intensity(spec, 50, 100000, rng.fork(1));
    v.detail << " brute=" << brute << " iota_hat=" << show(iota);
    v.require(std::abs(brute - kCutProjectDensity) < 1e-4, "brute-force density");
    v.require(std::abs(iota.value - kCutProjectDensity) <= 3.0 * iota.std_error, "iota_hat");

    auto cfg = experiment(spec, "kac", 100000, 50);
    const auto sweep = run_sweep(cfg, "R", {50, 100, 200});
    const auto& last = sweep.sequence.back();
    v.detail << " sweep:";
    for (const auto& e : sweep.sequence) v.detail << " " << show(e);
    v.detail << " verdict=" << sweep.verdict;
    v.require(sweep.verdict == "stable", "sweep not stable");
    const double gap_z = z_score(last.value, last.std_error, iota.value, iota.std_error);
    v.detail << " (I-iota)/sigma=" << gap_z;
    v.require(gap_z >= 3.0, "I not above iota_hat by 3 sigma");

    const auto alt = estimate_covolume_alt(spec, 100000, 20, 200, rng.fork(2));
    const double z = z_score(last.value, last.std_error, alt.value, alt.std_error);
    v.detail << " alt=" << show(alt) << " z(kac-alt)=" << z;
    v.require(std::abs(z) <= 3.0, "kac and alt disagree");
  });

  criterion(6, "poisson divergence", [&](Verdict& v) {
    const auto spec = ModelSpec::poisson(1.0);
    const auto iota = estimate_intensity(spec, 50, 100000, rng.fork(3));
    v.detail << " iota_hat=" << show(iota);
    v.require(std::abs(iota.value - 1.0) <= 3.0 * iota.std_error, "iota_hat != 1");
    const auto sweep = run_sweep(experiment(spec, "kac", 20000, 25), "R", {25, 50, 100});
    v.detail << " sweep:";
    for (std::size_t i = 0; i < sweep.sequence.size(); ++i) {
      const auto& e = sweep.sequence[i];
      v.detail << " " << show(e) << " flagged=" << e.truncated_fraction;
      v.require(e.is_lower_bound && e.truncated_fraction > 0.99, "not boundary-flagged");
      if (i > 0) v.require(e.value >= 1.5 * sweep.sequence[i - 1].value, "growth below 1.5x");
    }
    v.detail << " verdict=" << sweep.verdict;
    v.require(sweep.verdict == "diverging", "verdict");
  });

  criterion(7, "mecke certification", [&](Verdict& v) {
    for (const auto& [name, spec] : {std::pair{"poisson", ModelSpec::poisson(1.0)},
                                     std::pair{"cutproject", ModelSpec::cut_project()}}) {
      int above3 = 0;
      int above5 = 0;
      double worst = 0.0;
      for (const auto& f : builtin_test_functions()) {
        const auto m = mecke_check(spec, f, 100000, 40, rng.fork(fnv1a64(f.id())));
        worst = std::max(worst, m.z_score);
        above3 += m.z_score > 3.0;
        above5 += m.z_score > 5.0;
      }
      v.detail << " " << name << ": max|z|=" << worst << " over3=" << above3 << " over5=" << above5;
      v.require(above3 <= 1, std::string(name) + " too many |z|>3");
      v.require(above5 == 0, std::string(name) + " |z|>5");
    }
  });

  criterion(8, "factor invariance", [&](Verdict& v) {
    const std::vector<ModelSpec> inner = {ModelSpec::lattice({2.0}), ModelSpec::cut_project(),
                                          ModelSpec::poisson(1.0), ModelSpec::suspension(0.1)};
    const std::vector<std::string> estimators = {"intensity", "kac", "alt", "mecke", "inequality", "lambda-probe"};
    std::size_t compared = 0;
    for (const auto& m : inner) {
      std::vector<std::string> list = estimators;
      if (m.kind() == "suspension") list.push_back("monotonicity");
      for (const auto& est : list) {
        auto base = experiment(m, est, 2000, 30);
        base.K = 5;
        base.test_functions = {"phi2.count2", "phi5.gap1"};
        auto wrapped = base;
        wrapped.model = ModelSpec::extension(m);
        const auto a = run_experiment(base);
        const auto b = run_experiment(wrapped);
        bool same = a.rows.size() == b.rows.size();
        for (std::size_t i = 0; same && i < a.rows.size(); ++i) {
          const auto& x = a.rows[i];
          const auto& y = b.rows[i];
          same = x.estimator == y.estimator && x.value == y.value && x.std_error == y.std_error &&
                 x.truncated_fraction == y.truncated_fraction && x.lower_bound == y.lower_bound;
        }
        ++compared;
        v.require(same, m.kind() + "/" + est);
      }
    }
    v.detail << " " << compared << " model/estimator pairs compared";
  });

  criterion(9, "determinism across thread counts", [&](Verdict& v) {
    std::vector<ExperimentConfig> cfgs = {
        experiment(ModelSpec::cut_project(), "kac", 20000, 100),
        experiment(ModelSpec::poisson(1.0), "intensity", 20000, 20),
        experiment(ModelSpec::suspension(0.1), "inequality", 20000, 100),
        experiment(ModelSpec::cut_project(), "alt", 5000, 100),
        experiment(ModelSpec::poisson(1.0), "mecke", 5000, 40),
    };
    cfgs[3].K = 10;
    cfgs[4].test_functions = {"phi5.count10", "phi1.gap5"};
    for (const auto& cfg : cfgs) {
      std::string first;
      for (unsigned threads : {1u, 2u, 4u, 7u}) {
        RunOptions opts;
        opts.threads = threads;
        const std::string csv = to_csv(cfg, run_experiment(cfg, opts).rows);
        if (first.empty())
          first = csv;
        else
          v.require(csv == first, cfg.model.kind() + "/" + cfg.estimator + " threads=" + std::to_string(threads));
      }
    }
    v.detail << " " << cfgs.size() << " experiments at 1, 2, 4 and 7 threads";
  });

  return failures == 0 ? 0 : 1;
}
