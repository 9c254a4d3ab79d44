#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "transversal/errors.hpp"
#include "transversal/models.hpp"
#include "transversal/parallel.hpp"

using namespace transversal;

namespace {

const double kRoot2 = std::sqrt(2.0);

// {m + n sqrt2 : m - n sqrt2 in [h_lo, h_hi], |m + n sqrt2| <= R} by a
// plain double loop over (m, n).
std::vector<double> brute_strip(double h_lo, double h_hi, double R) {
  std::vector<double> out;
  const int span = static_cast<int>(std::ceil((R + std::max(std::abs(h_lo), std::abs(h_hi))) / kRoot2)) + 2;
  for (int n = -span; n <= span; ++n)
    for (int m = -2 * span; m <= 2 * span; ++m) {
      const double g = m + n * kRoot2;
      const double h = m - n * kRoot2;
      if (h >= h_lo && h <= h_hi && std::abs(g) <= R) out.push_back(g);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ModelSpec> zoo() {
  return {ModelSpec::lattice({1.0}), ModelSpec::lattice({2.0}), ModelSpec::lattice({1, 0, 0.5, 1}, 2),
          ModelSpec::cut_project(), ModelSpec::poisson(1.0), ModelSpec::poisson(2.0, 2),
          ModelSpec::suspension(0.1), ModelSpec::extension(ModelSpec::cut_project())};
}

}  // namespace

TEST_CASE("palm return sets contain the identity") {
  const Rng rng(1);
  for (const auto& spec : zoo()) {
    for (std::uint64_t i = 0; i < 500; ++i) {
      Rng s = rng.fork(i);
      REQUIRE(sample_palm(spec, 10, s).returns.contains_identity());
    }
  }
}

TEST_CASE("lattice samples") {
  const Rng rng(2);
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng s = rng.fork(i);
    const auto a = sample_ambient(ModelSpec::lattice({1.0}), 10, s);
    const auto& xs = a.returns.coords();
    REQUIRE((xs.size() == 20 || xs.size() == 21));
    for (std::size_t j = 1; j < xs.size(); ++j) CHECK(xs[j] - xs[j - 1] == doctest::Approx(1.0));
  }
  Rng s(3);
  const auto p = sample_palm(ModelSpec::lattice({2.0}), 5, s);
  CHECK(p.returns.coords() == std::vector<double>{-4, -2, 0, 2, 4});
  CHECK(p.returns.exact());
  CHECK_THROWS_AS((void)sample_palm(ModelSpec::lattice({1e-6}), 100, s), ResourceError);
}

TEST_CASE("cut-and-project strips match brute-force enumeration") {
  const CutProjectModel m;
  const auto got = strip_points(m, -30, 30, -0.7, 0.3);
  const auto want = brute_strip(-0.7, 0.3, 30);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

  const Rng rng(4);
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng s = rng.fork(i);
    const auto p = sample_palm(ModelSpec::cut_project(), 25, s);
    const double w = p.label.at(0);
    const auto ref = brute_strip(w - 1.0, w, 25);
    REQUIRE(p.returns.size() == ref.size());
  }
  CutProjectModel wide;
  wide.w_hi = 1e9;
  CHECK_THROWS_AS((void)strip_points(wide, -1e6, 1e6, -1e9, 0), ResourceError);
}

TEST_CASE("cut-and-project differences lie in the model set of W - W") {
  auto in_difference_set = [](double d) {
    const int span = static_cast<int>(std::abs(d) / kRoot2) + 3;
    for (int n = -span; n <= span; ++n) {
      const double m = std::round(d - n * kRoot2);
      if (std::abs(m + n * kRoot2 - d) < 1e-9 && std::abs(m - n * kRoot2) <= 1.0 + 1e-9) return true;
    }
    return false;
  };
  const Rng rng(5);
  for (std::uint64_t i = 0; i < 40; ++i) {
    Rng s = rng.fork(i);
    const auto sample = sample_ambient(ModelSpec::cut_project(), 15, s);
    const auto& xs = sample.returns.coords();
    for (double a : xs)
      for (double b : xs) REQUIRE(in_difference_set(a - b));
  }
}

TEST_CASE("poisson ambient count") {
  const Rng rng(6);
  const auto spec = ModelSpec::poisson(2.0);
  auto counts = parallel_map<double>(10000, 0, [&](std::size_t i) {
    Rng s = rng.fork(i);
    return static_cast<double>(sample_ambient(spec, 50, s).returns.size());
  });
  const auto st = summarize(counts);
  CHECK(std::abs(st.mean - 200.0) <= 3.0 * st.std_error);
}

TEST_CASE("suspension return times") {
  const SuspensionModel m;
  const auto spec = ModelSpec::suspension(0.1);
  const Rng rng(7);
  std::size_t long_first = 0;
  const std::size_t draws = 20000;
  for (std::uint64_t i = 0; i < draws; ++i) {
    Rng s = rng.fork(i);
    const auto p = sample_palm(spec, 30, s);
    const auto& xs = p.returns.coords();
    for (std::size_t j = 1; j < xs.size(); ++j) {
      const double gap = xs[j] - xs[j - 1];
      REQUIRE((gap == 1.0 || gap == 2.0));
    }
    const std::size_t zero = p.returns.identity_index();
    if (xs[zero + 1] == 2.0) ++long_first;
    CHECK(m.roof(p.label[0]) == xs[zero + 1]);
  }
  const double freq = static_cast<double>(long_first) / draws;
  CHECK(std::abs(freq - 0.1) <= 3.0 * std::sqrt(0.1 * 0.9 / draws));

  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng s = rng.fork(draws + i);
    const auto a = sample_ambient(spec, 20, s);
    const double t = a.label[1];
    const auto& xs = a.returns.coords();
    REQUIRE(std::find_if(xs.begin(), xs.end(), [&](double x) { return std::abs(x + t) < 1e-9; }) != xs.end());
    for (std::size_t j = 1; j < xs.size(); ++j) {
      const double gap = xs[j] - xs[j - 1];
      CHECK((std::abs(gap - 1.0) < 1e-9 || std::abs(gap - 2.0) < 1e-9));
    }
  }
}

TEST_CASE("extension leaves return sets unchanged") {
  for (const auto& inner : zoo()) {
    const auto ext = ModelSpec::extension(inner);
    const Rng rng(8);
    for (std::uint64_t i = 0; i < 100; ++i) {
      Rng a = rng.fork(i);
      Rng b = rng.fork(i);
      const auto pa = sample_palm(inner, 12, a);
      const auto pb = sample_palm(ext, 12, b);
      REQUIRE(pa.returns == pb.returns);
      CHECK(pb.label.size() == pa.label.size() + 1);
      Rng c = rng.fork(i + 1000);
      Rng d = rng.fork(i + 1000);
      REQUIRE(sample_ambient(inner, 12, c).returns == sample_ambient(ext, 12, d).returns);
    }
  }
}

TEST_CASE("closed-form values") {
  const auto z = analytic_values(ModelSpec::lattice({1.0}));
  CHECK(*z.intensity == 1.0);
  CHECK(z.covolume.at(2) == 1.0);
  CHECK(*z.periodic);
  const auto two = analytic_values(ModelSpec::lattice({2.0}));
  CHECK(two.covolume.at(2) == 0.5);
  CHECK(two.covolume.at(3) == 0.25);
  const auto s = analytic_values(ModelSpec::suspension(0.1));
  CHECK(*s.intensity == doctest::Approx(1.0 / 1.1));
  CHECK(*s.covolume_upper == 1.0);
  const auto p = analytic_values(ModelSpec::poisson(3.0));
  CHECK(*p.intensity == 3.0);
  CHECK(std::isinf(p.covolume.at(2)));
  const auto cp = analytic_values(ModelSpec::cut_project());
  CHECK(*cp.intensity == doctest::Approx(1.0 / (2.0 * kRoot2)));
  CHECK_FALSE(*cp.periodic);
  const auto e = analytic_values_enlarged(SuspensionModel{});
  CHECK(*e.intensity == 1.0);
  CHECK(e.covolume.at(2) == 1.0);
}

TEST_CASE("return-time gaps") {
  const Rng rng(9);
  CHECK(lambda_probe(ModelSpec::lattice({1.0}), 3, 100, 10, rng).gap == doctest::Approx(1.0));
  const auto cp = lambda_probe(ModelSpec::cut_project(), 1, 500, 20, rng);
  CHECK(cp.gap > 0.1);
  const double coarse = lambda_probe(ModelSpec::poisson(1.0), 1, 100, 10, rng).gap;
  const double fine = lambda_probe(ModelSpec::poisson(1.0), 1, 10000, 10, rng).gap;
  CHECK(fine < coarse);
}

TEST_CASE("model validation") {
  CutProjectModel bad;
  bad.w_lo = 1.0;
  bad.w_hi = 0.0;
  CHECK_THROWS_WITH_AS(ModelSpec::cut_project(bad), doctest::Contains("window"), UsageError);
  CutProjectModel rational;
  rational.basis = {1.0, 1.0, 2.0, 3.0};
  CHECK_THROWS_AS(ModelSpec::cut_project(rational), UsageError);
  CHECK_THROWS_AS(ModelSpec::lattice({1, 2, 2, 4}, 2), UsageError);
  CHECK_THROWS_AS(ModelSpec::poisson(-1.0), UsageError);
  CHECK_THROWS_AS(ModelSpec::suspension(1.5), UsageError);
  CHECK(looks_irrational(kRoot2));
  CHECK_FALSE(looks_irrational(0.75));
  CHECK_FALSE(looks_irrational(355.0 / 113.0));
  CHECK(determinant({1, 2, 3, 4}, 2) == doctest::Approx(-2.0));
}

TEST_CASE("model descriptions are canonical") {
  CHECK(ModelSpec::cut_project().describe() == ModelSpec::cut_project().describe());
  CHECK(ModelSpec::poisson(1.0).describe() != ModelSpec::poisson(2.0).describe());
  CHECK(ModelSpec::extension(ModelSpec::poisson(1.0)).kind() == "extension");
}
