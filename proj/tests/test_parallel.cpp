#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "transversal/parallel.hpp"
#include "transversal/rng.hpp"

using namespace transversal;

TEST_CASE("forked streams do not depend on the parent's state") {
  Rng a(42);
  const Rng b(42);
  (void)a();
  (void)a();
  Rng fa = a.fork(3);
  Rng fb = b.fork(3);
  for (int i = 0; i < 10; ++i) CHECK(fa() == fb());
  CHECK(a.fork(3).key() != a.fork(4).key());
  CHECK(Rng(1).key() != Rng(2).key());
}

TEST_CASE("parallel_map is independent of the worker count") {
  const Rng rng(7);
  auto draw = [&](std::size_t i) {
    Rng s = rng.fork(i);
    return s.uniform();
  };
  const auto one = parallel_map<double>(5000, 1, draw);
  const auto many = parallel_map<double>(5000, 8, draw);
  CHECK(one == many);
  CHECK(pairwise_sum(one) == pairwise_sum(many));
}

TEST_CASE("parallel_map rethrows worker exceptions") {
  auto boom = [](std::size_t i) -> int {
    if (i == 777) throw std::runtime_error("boom");
    return 0;
  };
  CHECK_THROWS_AS(parallel_map<int>(2000, 4, boom), std::runtime_error);
}

TEST_CASE("summary statistics") {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto s = summarize(xs);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.variance == doctest::Approx(5.0 / 3.0));
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  const std::vector<double> flat(1000, 0.1);
  CHECK(summarize(flat).variance == doctest::Approx(0.0));
  std::vector<double> ones(1 << 20, 1.0);
  CHECK(pairwise_sum(ones) == static_cast<double>(1 << 20));
}
