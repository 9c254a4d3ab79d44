#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "transversal/errors.hpp"
#include "transversal/geometry.hpp"
#include "transversal/models.hpp"
#include "transversal/rng.hpp"

using namespace transversal;

namespace {

std::vector<double> values(const Config& c) { return c.coords(); }

}  // namespace

TEST_CASE("canonical order") {
  CHECK(canonical_order(GroupPoint::real(0.0), GroupPoint::real(1.0)) == std::strong_ordering::less);
  CHECK(canonical_order(GroupPoint::real({1.0, -3.0}), GroupPoint::real({1.0, 2.0})) ==
        std::strong_ordering::less);
  CHECK(canonical_order(GroupPoint::cyclic(3, 4), GroupPoint::cyclic(1, 4)) ==
        std::strong_ordering::greater);
  CHECK(canonical_order(GroupPoint::cyclic(-1, 4), GroupPoint::cyclic(3, 4)) ==
        std::strong_ordering::equal);
  CHECK_THROWS_AS((void)canonical_order(GroupPoint::real(0.0), GroupPoint::cyclic(0, 4)), UsageError);
  CHECK_THROWS_AS((void)canonical_order(GroupPoint::cyclic(0, 3), GroupPoint::cyclic(0, 4)), UsageError);
}

TEST_CASE("modular helpers") {
  CHECK(mod_floor(-1, 4) == 3);
  CHECK(mod_floor(9, 4) == 1);
  CHECK(cyclic_distance(0, 3, 4) == 1);
  CHECK(cyclic_distance(1, 4, 6) == 3);
}

TEST_CASE("config construction sorts, clips and merges") {
  const Config c = Config::real1d({3.0, -1.0, 0.0, 20.0, 1e-12}, 10.0, false);
  CHECK(values(c) == std::vector<double>{-1.0, 0.0, 3.0});
  CHECK(c.contains_identity());
  CHECK(c.identity_index() == 1);
  const Config exact = Config::real1d({0.0, 1e-12}, 10.0, true);
  CHECK(exact.size() == 2);
  const Config z = Config::cyclic({5, -1, 2, 2}, 4);
  CHECK(z.residues() == std::vector<std::int64_t>{1, 2, 3});
}

TEST_CASE("intersection") {
  const Config a = Config::real1d({-1, 0, 2}, 10, true);
  const Config b = Config::real1d({0, 2, 5}, 10, true);
  CHECK(values(intersect(a, b)) == std::vector<double>{0, 2});
  CHECK(intersect(a, a) == a);
  CHECK_THROWS_AS((void)intersect(a, Config::real1d({0}, 5, true)), UsageError);
  const Config z = intersect(Config::cyclic({0, 1, 3}, 6), Config::cyclic({1, 3, 5}, 6));
  CHECK(z.residues() == std::vector<std::int64_t>{1, 3});
}

TEST_CASE("independent Poisson samples meet only at the identity") {
  const Rng rng(11);
  const auto spec = ModelSpec::poisson(1.0);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    Rng s1 = rng.fork(2 * i);
    Rng s2 = rng.fork(2 * i + 1);
    const Config both = intersect(sample_palm(spec, 20, s1).returns, sample_palm(spec, 20, s2).returns);
    REQUIRE(values(both) == std::vector<double>{0.0});
  }
}

TEST_CASE("difference sets") {
  const Config a = Config::real1d({0, 1, 2}, 10, true);
  CHECK(values(difference_set(a, a, Window{1})) == std::vector<double>{-1, 0, 1});

  std::vector<double> xs;
  std::vector<double> ys;
  for (int k = -10; k <= 10; ++k) {
    xs.push_back(k - 0.25);
    ys.push_back(k - 0.75);
  }
  const Config d = difference_set(Config::real1d(xs, 11, false), Config::real1d(ys, 11, false), Window{2});
  const auto got = values(d);
  const std::vector<double> want{-1.5, -0.5, 0.5, 1.5};
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

  const Config o = Config::real1d({0}, 5, true);
  CHECK(values(difference_set(o, o, Window{1})) == std::vector<double>{0});
}

TEST_CASE("shift and restriction") {
  const Config c = Config::real1d({-4, -1, 0, 3}, 5, true);
  CHECK(values(c.shifted_by_minus(GroupPoint::real(-1.0))) == std::vector<double>{-3, 0, 1, 4});
  CHECK(values(c.restricted(2)) == std::vector<double>{-1, 0});
  const Config z = Config::cyclic({0, 1}, 5);
  CHECK(z.shifted_by_minus(GroupPoint::cyclic(2, 5)).residues() == std::vector<std::int64_t>{3, 4});
}

TEST_CASE("json round trip") {
  const Config c = Config::real({0, 0, 1.5, -2, 3, 0.25}, 2, Window{4}, false);
  CHECK(config_from_json(to_json(c)) == c);
  const Config z = Config::cyclic({0, 2}, 6);
  CHECK(config_from_json(to_json(z)) == z);
}
