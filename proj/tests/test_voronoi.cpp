#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "transversal/errors.hpp"
#include "transversal/geometry.hpp"
#include "transversal/rng.hpp"
#include "transversal/voronoi.hpp"

using namespace transversal;

TEST_CASE("one-dimensional cells") {
  const auto c = cell_at_identity(Config::real1d({-1, 0, 2}, 10, true));
  CHECK(c.measure == doctest::Approx(1.5));
  CHECK_FALSE(c.truncated);

  const auto lone = cell_at_identity(Config::real1d({0}, 5, true));
  CHECK(lone.measure == doctest::Approx(10.0));
  CHECK(lone.truncated);
  CHECK(lone.lower_bound);

  const auto one_side = cell_at_identity(Config::real1d({0, 2}, 5, true));
  CHECK(one_side.measure == doctest::Approx(6.0));
  CHECK(one_side.truncated);

  CHECK_THROWS_AS((void)cell_at_identity(Config::real1d({1, 2}, 5, true)), PreconditionError);
}

TEST_CASE("cyclic cells and ties") {
  const Config p = Config::cyclic({0, 2}, 4);
  CHECK(cell_at_identity(p).measure == 2.0);
  CHECK(p.residues()[cyclic_owner(p, 1)] == 0);
  CHECK(p.residues()[cyclic_owner(p, 3)] == 2);
  CHECK(tessellate(Config::cyclic({0, 3}, 6)) == std::vector<double>{3, 3});
  CHECK(tessellate(Config::cyclic({0, 1, 2, 3, 4}, 5)) == std::vector<double>{1, 1, 1, 1, 1});
}

TEST_CASE("unit lattice cells") {
  std::vector<double> xs;
  for (int k = -5; k <= 5; ++k) xs.push_back(k);
  const auto cells = tessellate(Config::real1d(xs, 5, true));
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) CHECK(cells[i] == doctest::Approx(1.0));
}

TEST_CASE("tessellation partitions the window and the group") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs{0.0};
    const int k = 1 + static_cast<int>(rng.uniform() * 20);
    for (int i = 0; i < k; ++i) xs.push_back(rng.uniform(-10, 10));
    const auto cells = tessellate(Config::real1d(xs, 10, false));
    double total = 0;
    for (double m : cells) total += m;
    CHECK(total == doctest::Approx(20.0));
  }
  for (std::int64_t n = 1; n <= 9; ++n) {
    for (std::int64_t mask = 1; mask < (1 << n); ++mask) {
      std::vector<std::int64_t> res;
      for (std::int64_t b = 0; b < n; ++b)
        if (mask >> b & 1) res.push_back(b);
      const auto cells = tessellate(Config::cyclic(res, n));
      double total = 0;
      for (double m : cells) total += m;
      REQUIRE(total == static_cast<double>(n));
    }
  }
}

TEST_CASE("cells shrink when points are added") {
  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> xs{0.0};
    for (int i = 0; i < 6; ++i) xs.push_back(rng.uniform(-8, 8));
    std::vector<double> more = xs;
    for (int i = 0; i < 4; ++i) more.push_back(rng.uniform(-8, 8));
    const double small = cell_at_identity(Config::real1d(more, 8, false)).measure;
    const double big = cell_at_identity(Config::real1d(xs, 8, false)).measure;
    CHECK(small <= big + 1e-12);
  }
}

TEST_CASE("cyclic cells are translation equivariant") {
  for (std::int64_t n = 2; n <= 8; ++n) {
    for (std::int64_t mask = 1; mask < (1 << n); ++mask) {
      if (!(mask & 1)) continue;
      std::vector<std::int64_t> res;
      for (std::int64_t b = 0; b < n; ++b)
        if (mask >> b & 1) res.push_back(b);
      const Config p = Config::cyclic(res, n);
      const auto cells = tessellate(p);
      for (std::size_t i = 0; i < res.size(); ++i) {
        const Config moved = p.shifted_by_minus(GroupPoint::cyclic(res[i], n));
        CHECK(cell_at_identity(moved).measure == cells[i]);
      }
    }
  }
}

TEST_CASE("planar cells by Monte Carlo") {
  std::vector<double> flat;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) {
      flat.push_back(i);
      flat.push_back(j);
    }
  const Config grid = Config::real(flat, 2, Window{3}, true);
  Rng rng(1);
  const auto cell = cell_at_identity(grid, &rng, VoronoiOptions{200000});
  CHECK(std::abs(cell.measure - 1.0) < 0.02);
  CHECK_FALSE(cell.truncated);
  CHECK_THROWS_AS((void)cell_at_identity(grid), UsageError);

  const Config lone = Config::real({0.0, 0.0}, 2, Window{1}, true);
  Rng rng2(2);
  const auto full = cell_at_identity(lone, &rng2);
  CHECK(full.measure == doctest::Approx(4.0));
  CHECK(full.truncated);
}
