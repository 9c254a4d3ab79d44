#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "transversal/errors.hpp"
#include "transversal/experiment.hpp"

using namespace transversal;

namespace {

const char* kLattice = R"(
[experiment]
id = "z"
estimator = "inequality"
seed = 3
n = 200
R = 20

[model]
kind = "lattice"
basis = [[1.0]]
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config_string(kLattice);
  CHECK(cfg.id == "z");
  CHECK(cfg.seed == 3);
  CHECK(cfg.n == 200);
  CHECK(cfg.model.kind() == "lattice");

  const auto cp = parse_config_string(R"(
[experiment]
estimator = "kac"
seed = 1
[model]
kind = "cutproject"
basis = [[1.0, 1.0], [1.4142135623730951, -1.4142135623730951]]
window = [0.0, 0.5]
)");
  CHECK(cp.model.describe() != ModelSpec::cut_project().describe());

  const auto cyc = parse_config_string(R"(
[experiment]
estimator = "kac"
seed = 1
[model]
kind = "cyclic"
n = 4
weights = ["1/2", "1/2"]
phases = [[0], [1, 3]]
)");
  CHECK(cyc.model.kind() == "cyclic");

  const auto ext = parse_config_string(R"(
[experiment]
estimator = "kac"
seed = 1
[model]
kind = "extension"
[model.inner]
kind = "poisson"
rate = 2.0
)");
  CHECK(ext.model.describe() == ModelSpec::extension(ModelSpec::poisson(2.0)).describe());
}

TEST_CASE("config errors name the field") {
  CHECK_THROWS_WITH_AS(parse_config_string("[experiment]\nestimator = \"kac\"\n[model]\nkind = \"poisson\"\n"),
                       doctest::Contains("experiment.seed"), UsageError);
  CHECK_THROWS_WITH_AS(parse_config_string("[experiment]\nestimator = \"kac\"\nseed = 1\n[model]\n"
                                           "kind = \"cutproject\"\nwindow = [1.0, 0.0]\n"),
                       doctest::Contains("model.window"), UsageError);
  CHECK_THROWS_WITH_AS(parse_config_string("[experiment]\nestimator = \"nope\"\nseed = 1\n"),
                       doctest::Contains("experiment.estimator"), UsageError);
  CHECK_THROWS_WITH_AS(parse_config_string("[experiment]\nestimator = \"kac\"\nseed = 1\nwindow = 3\n"),
                       doctest::Contains("experiment.window"), UsageError);
  CHECK_THROWS_AS(parse_config_string("[experiment\n"), UsageError);
  CHECK_THROWS_WITH_AS(parse_config_string("[experiment]\nestimator = \"kac\"\nseed = 1\n[model]\n"
                                           "kind = \"cyclic\"\nn = 4\nweights = [\"x\"]\nphases = [[0]]\n"),
                       doctest::Contains("model.weights"), UsageError);
}

TEST_CASE("csv rows") {
  const auto cfg = parse_config_string(kLattice);
  const auto res = run_experiment(cfg);
  CHECK(res.all_passed());
  const std::string csv = to_csv(cfg, res.rows);
  CHECK(csv_header() ==
        "experiment_id,model,estimator,r,n,R,K,seed,value,stderr,truncated_fraction,lower_bound,wall_ms\n");
  CHECK(csv.find("z," + model_label(cfg.model) + ",kac,2,200,20,,3,1,0,0,0,0\n") != std::string::npos);
  CHECK(to_csv(cfg, run_experiment(cfg).rows) == csv);
  CHECK(model_label(cfg.model).rfind("lattice#", 0) == 0);
  CHECK(model_label(cfg.model).size() == std::string("lattice#").size() + 16);
  const auto side = sidecar_json(cfg, res);
  CHECK(side["seed"] == 3);
  CHECK(side["checks"].size() == res.checks.size());
}

TEST_CASE("failed thresholds are reported") {
  auto cfg = parse_config_string(kLattice);
  cfg.estimator = "kac";
  cfg.model = ModelSpec::poisson(1.0);
  cfg.R = 10;
  const auto res = run_experiment(cfg);
  CHECK(res.all_passed());
  cfg.estimator = "intensity";
  cfg.model = ModelSpec::suspension(0.1);
  cfg.n = 20000;
  cfg.K = 20;
  const auto ok = run_experiment(cfg);
  CHECK(ok.all_passed());
}

TEST_CASE("sweeps") {
  auto cfg = parse_config_string(kLattice);
  cfg.estimator = "kac";
  const auto lattice = run_sweep(cfg, "R", {10, 20, 40});
  CHECK(lattice.verdict == "stable");
  for (const auto& e : lattice.sequence) CHECK(e.value == 1.0);
  CHECK_THROWS_AS((void)run_sweep(cfg, "alpha", {1, 2}), UsageError);
  cfg.estimator = "mecke";
  CHECK_THROWS_AS((void)run_sweep(cfg, "R", {1, 2}), UsageError);
}

TEST_CASE("dumped configurations") {
  auto cfg = parse_config_string(kLattice);
  const auto dump = dump_configs(cfg, 3);
  REQUIRE(dump.size() == 3);
  CHECK(config_from_json(dump[0]["returns"]).contains_identity());
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
