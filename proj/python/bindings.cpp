#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "transversal/errors.hpp"
#include "transversal/estimators.hpp"
#include "transversal/experiment.hpp"
#include "transversal/models.hpp"
#include "transversal/oracle.hpp"
#include "transversal/voronoi.hpp"

namespace py = pybind11;
using namespace transversal;

namespace {

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["stderr"] = e.std_error;
  d["n"] = e.n;
  d["R"] = e.R;
  d["K"] = e.K ? py::cast(*e.K) : py::none();
  d["truncated_fraction"] = e.truncated_fraction;
  d["is_lower_bound"] = e.is_lower_bound;
  d["exact"] = e.exact;
  return d;
}

EstimatorOptions options(unsigned threads, bool empirical) {
  EstimatorOptions o;
  o.threads = threads;
  o.empirical_intensity = empirical;
  return o;
}

oracle::CyclicSystem cyclic_system(std::int64_t n, const std::vector<std::string>& weights,
                                   const std::vector<std::vector<std::int64_t>>& phases) {
  std::vector<oracle::Rational> mass;
  for (const auto& w : weights) {
    try {
      oracle::Rational q(w);
      q.canonicalize();
      mass.push_back(q);
    } catch (const std::invalid_argument&) {
      throw UsageError("cannot parse weight '" + w + "' as a rational");
    }
  }
  return oracle::CyclicSystem::make(n, mass, phases);
}

}  // namespace

PYBIND11_MODULE(_transversal, m) {
  m.doc() = "Transverse measures, intensities and intersection covolumes";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static("lattice", &ModelSpec::lattice, py::arg("basis"), py::arg("dim") = 1)
      .def_static(
          "cut_project",
          [](std::array<double, 4> basis, double w_lo, double w_hi) {
            CutProjectModel c;
            c.basis = basis;
            c.w_lo = w_lo;
            c.w_hi = w_hi;
            return ModelSpec::cut_project(c);
          },
          py::arg("basis") = CutProjectModel{}.basis, py::arg("w_lo") = 0.0, py::arg("w_hi") = 1.0)
      .def_static("poisson", &ModelSpec::poisson, py::arg("rate") = 1.0, py::arg("dim") = 1)
      .def_static("suspension", &ModelSpec::suspension, py::arg("eps") = 0.1,
                  py::arg("alpha") = SuspensionModel{}.alpha)
      .def_static("extension", &ModelSpec::extension, py::arg("inner"))
      .def_static(
          "cyclic",
          [](std::int64_t n, const std::vector<std::string>& weights,
             const std::vector<std::vector<std::int64_t>>& phases) {
            return ModelSpec::cyclic(cyclic_system(n, weights, phases));
          },
          py::arg("n"), py::arg("weights"), py::arg("phases"))
      .def_property_readonly("kind", &ModelSpec::kind)
      .def("describe", &ModelSpec::describe)
      .def("label", [](const ModelSpec& s) { return model_label(s); })
      .def("analytic_values",
           [](const ModelSpec& s) {
             const auto a = analytic_values(s);
             py::dict d;
             d["intensity"] = a.intensity ? py::cast(*a.intensity) : py::none();
             d["covolume"] = a.covolume;
             d["covolume_upper"] = a.covolume_upper ? py::cast(*a.covolume_upper) : py::none();
             d["periodic"] = a.periodic ? py::cast(*a.periodic) : py::none();
             return d;
           })
      .def("__repr__", &ModelSpec::describe);

  m.def(
      "sample_palm",
      [](const ModelSpec& spec, double R, std::uint64_t seed, std::uint64_t index) {
        Rng rng = Rng(seed).fork(index);
        return sample_palm(spec, R, rng).returns.coords();
      },
      py::arg("spec"), py::arg("R"), py::arg("seed"), py::arg("index") = 0,
      "Palm return times (R^1 models) of draw `index` from `seed`.");
  m.def(
      "sample_ambient",
      [](const ModelSpec& spec, double R, std::uint64_t seed, std::uint64_t index) {
        Rng rng = Rng(seed).fork(index);
        return sample_ambient(spec, R, rng).returns.coords();
      },
      py::arg("spec"), py::arg("R"), py::arg("seed"), py::arg("index") = 0);

  m.def(
      "cell_at_identity",
      [](std::vector<double> points, double R) {
        const auto c = cell_at_identity(Config::real1d(std::move(points), R, false));
        return py::make_tuple(c.measure, c.truncated);
      },
      py::arg("points"), py::arg("R"), "Voronoi cell of 0 in R^1: (measure, truncated).");
  m.def(
      "tessellate_cyclic",
      [](std::vector<std::int64_t> residues, std::int64_t n) {
        return tessellate(Config::cyclic(std::move(residues), n));
      },
      py::arg("residues"), py::arg("n"));

  m.def(
      "estimate_intensity",
      [](const ModelSpec& spec, double K, std::size_t n, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        const auto e = estimate_intensity(spec, K, n, Rng(seed), options(threads, false));
        py::gil_scoped_acquire acquire;
        return estimate_dict(e);
      },
      py::arg("spec"), py::arg("K"), py::arg("n"), py::arg("seed"), py::arg("threads") = 0);
  m.def(
      "estimate_covolume_kac",
      [](const ModelSpec& spec, int r, std::size_t n, double R, std::uint64_t seed, unsigned threads,
         bool empirical_intensity) {
        py::gil_scoped_release release;
        const auto e = estimate_covolume_kac(spec, r, n, R, Rng(seed), options(threads, empirical_intensity));
        py::gil_scoped_acquire acquire;
        return estimate_dict(e);
      },
      py::arg("spec"), py::arg("r"), py::arg("n"), py::arg("R"), py::arg("seed"), py::arg("threads") = 0,
      py::arg("empirical_intensity") = false);
  m.def(
      "estimate_covolume_alt",
      [](const ModelSpec& spec, std::size_t n, double K, double R, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        const auto e = estimate_covolume_alt(spec, n, K, R, Rng(seed), options(threads, false));
        py::gil_scoped_acquire acquire;
        return estimate_dict(e);
      },
      py::arg("spec"), py::arg("n"), py::arg("K"), py::arg("R"), py::arg("seed"), py::arg("threads") = 0);
  m.def(
      "mecke_check",
      [](const ModelSpec& spec, const std::string& function_id, std::size_t n, double R, std::uint64_t seed,
         unsigned threads) {
        const auto f = TestFunction::parse(function_id);
        MeckeReport rep;
        {
          py::gil_scoped_release release;
          rep = mecke_check(spec, f, n, R, Rng(seed), options(threads, false));
        }
        py::dict d;
        d["lhs"] = estimate_dict(rep.lhs);
        d["rhs"] = estimate_dict(rep.rhs);
        d["z"] = rep.z_score;
        d["function"] = rep.test_function_id;
        return d;
      },
      py::arg("spec"), py::arg("function_id"), py::arg("n"), py::arg("R"), py::arg("seed"), py::arg("threads") = 0);
  m.def("builtin_test_functions", [] {
    std::vector<std::string> ids;
    for (const auto& f : builtin_test_functions()) ids.push_back(f.id());
    return ids;
  });
  m.def(
      "inequality_report",
      [](const ModelSpec& spec, int r_max, std::size_t n, double R, std::uint64_t seed, unsigned threads) {
        InequalityReport rep;
        {
          py::gil_scoped_release release;
          rep = inequality_report(spec, r_max, n, R, Rng(seed), options(threads, false));
        }
        py::list rows;
        for (const auto& row : rep.rows) {
          py::dict d;
          d["r"] = row.r;
          d["covolume"] = estimate_dict(row.covolume);
          d["bound"] = row.bound;
          d["bound_stderr"] = row.bound_error;
          d["margin_z"] = row.margin_z;
          rows.append(d);
        }
        py::dict out;
        out["intensity"] = estimate_dict(rep.intensity);
        out["rows"] = rows;
        return out;
      },
      py::arg("spec"), py::arg("r_max"), py::arg("n"), py::arg("R"), py::arg("seed"), py::arg("threads") = 0);

  m.def(
      "exact_covolume",
      [](std::int64_t n, const std::vector<std::string>& weights,
         const std::vector<std::vector<std::int64_t>>& phases, int r) {
        const auto c = oracle::exact_covolume(cyclic_system(n, weights, phases), r);
        return py::make_tuple(c.direct.get_str(), c.kac.get_str());
      },
      py::arg("n"), py::arg("weights"), py::arg("phases"), py::arg("r"),
      "(direct, kac) covolumes as rational strings.");
  m.def(
      "exact_intensity",
      [](std::int64_t n, const std::vector<std::string>& weights,
         const std::vector<std::vector<std::int64_t>>& phases) {
        return oracle::exact_intensity(cyclic_system(n, weights, phases)).get_str();
      },
      py::arg("n"), py::arg("weights"), py::arg("phases"));
  m.def(
      "oracle_suite",
      [](std::uint64_t seed, std::size_t systems, std::size_t functions) {
        oracle::SuiteOptions so;
        so.systems = systems;
        so.functions = functions;
        std::vector<oracle::SuiteCheck> checks;
        {
          py::gil_scoped_release release;
          checks = oracle::run_suite(seed, so);
        }
        py::list out;
        for (const auto& c : checks) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["total"] = c.total;
          d["first_failure"] = c.first_failure;
          out.append(d);
        }
        return out;
      },
      py::arg("seed"), py::arg("systems") = 200, py::arg("functions") = 100);

  m.def(
      "run_config",
      [](const std::string& toml_text, unsigned threads) {
        const auto cfg = parse_config_string(toml_text);
        RunOptions opts;
        opts.threads = threads;
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg, opts);
        }
        py::list checks;
        for (const auto& c : res.checks) checks.append(py::make_tuple(c.name, c.passed, c.detail));
        return py::make_tuple(csv_header() + to_csv(cfg, res.rows), checks);
      },
      py::arg("toml_text"), py::arg("threads") = 0, "Run a TOML experiment: (csv text, checks).");
}
