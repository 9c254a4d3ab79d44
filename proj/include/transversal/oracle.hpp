#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "transversal/errors.hpp"
#include "transversal/rng.hpp"

/// Exact finite model: Z_n acting freely on finitely many orbits, with a cross
/// section and rational measures. Every quantity is an exact rational.
namespace transversal::oracle {

using Rational = mpq_class;

/// Finite free Z_n-space. State (orbit o, phase p) has index o * n + p and the
/// action is g.(o, p) = (o, p - g), so the return set of g.x is that of x
/// shifted by -g.
struct FiniteGSpace {
  std::int64_t n = 1;
  std::int64_t orbits = 0;
  std::vector<char> cross;  // cross-section membership, one flag per state

  [[nodiscard]] std::int64_t size() const { return n * orbits; }
  [[nodiscard]] std::int64_t orbit_of(std::int64_t s) const { return s / n; }
  [[nodiscard]] std::int64_t phase_of(std::int64_t s) const { return s % n; }
  [[nodiscard]] std::int64_t state(std::int64_t o, std::int64_t p) const;
  [[nodiscard]] std::int64_t act(std::int64_t g, std::int64_t s) const;
  [[nodiscard]] bool in_cross(std::int64_t s) const { return cross[s] != 0; }
  /// Sorted residues g with g.s in the cross section.
  [[nodiscard]] std::vector<std::int64_t> returns(std::int64_t s) const;
  [[nodiscard]] std::vector<std::int64_t> cross_states() const;
};

/// Exact nonnegative measure on the states of a FiniteGSpace.
struct ExactMeasure {
  std::vector<Rational> mass;

  [[nodiscard]] Rational total() const;
  friend bool operator==(const ExactMeasure&, const ExactMeasure&) = default;
};

ExactMeasure operator*(const Rational& c, const ExactMeasure& m);

/// A system (X, mu, Y) with mu invariant and of total mass 1.
struct CyclicSystem {
  FiniteGSpace space;
  ExactMeasure mu;

  /// `orbit_mass[o]` is the mu-mass of orbit o (spread evenly over its n
  /// states); `phases[o]` lists the cross-section phases of orbit o.
  static CyclicSystem make(std::int64_t n, const std::vector<Rational>& orbit_mass,
                           const std::vector<std::vector<std::int64_t>>& phases);

  /// Exhaustive check of every structural invariant; throws UsageError.
  void validate() const;

  [[nodiscard]] std::string describe() const;
};

/// Raised by exact_inverse when the input measure is not invariant under the
/// partial transformation {from} -> {to} = {g.from}.
class InvarianceViolation : public Error {
 public:
  InvarianceViolation(std::int64_t from, std::int64_t to, std::int64_t g, Rational dom,
                      Rational rng);
  std::int64_t from_state;
  std::int64_t to_state;
  std::int64_t shift;
  Rational domain_mass;
  Rational range_mass;
};

/// Test function on Z_n x Y, indexed g * space.size() + y.
using TestTable = std::vector<Rational>;

/// Cover element: pairs (h, y) mapped injectively to h.y.
using CoverPiece = std::vector<std::pair<std::int64_t, std::int64_t>>;

/// Transverse measure of mu on the cross section (weight 1/n on Z_n).
ExactMeasure exact_transverse(const FiniteGSpace& space, const ExactMeasure& mu);
ExactMeasure exact_transverse(const CyclicSystem& sys);

/// Injective cover built from singleton base sets {g}, visited in
/// `base_order` (defaults to 0, 1, ..., n-1).
std::vector<CoverPiece> exact_injective_cover(const FiniteGSpace& space,
                                              std::vector<std::int64_t> base_order = {});

/// Exhaustive check: pieces disjoint, action injective on each, images
/// partition X. Returns a description of the first failure, if any.
std::optional<std::string> verify_injective_cover(const FiniteGSpace& space,
                                                  const std::vector<CoverPiece>& cover);

/// rho(g, x) = sum over pieces C of 1_C(-g, g.x), stored at g * size + x.
std::vector<int> exact_partition_of_unity(const FiniteGSpace& space,
                                          const std::vector<CoverPiece>& cover);

/// First pair (y, g.y) inside the cross section with nu(y) != nu(g.y), if any.
std::optional<InvarianceViolation> find_invariance_violation(const FiniteGSpace& space,
                                                             const ExactMeasure& nu);

/// Invariant measure on X corresponding to a point-shift invariant measure nu
/// on the cross section. Throws InvarianceViolation otherwise.
ExactMeasure exact_inverse(const FiniteGSpace& space, const ExactMeasure& nu,
                           std::vector<std::int64_t> base_order = {});

/// (nu(f_X), nu(f_Y)) with f_X(y) = sum_{g in Y_y} f(-g, g.y) and
/// f_Y(y) = sum_{g in Y_y} f(g, y).
std::pair<Rational, Rational> exact_mecke(const FiniteGSpace& space, const ExactMeasure& nu,
                                          const TestTable& f);

/// (mu(x -> sum_{g in Y_x} f(g, g.x)), (counting x mu_Y)(f)).
std::pair<Rational, Rational> exact_campbell(const CyclicSystem& sys, const TestTable& f);

Rational exact_intensity(const CyclicSystem& sys);

/// Diagonal action on the orbits of X^r that meet Y^r. State (k, p) is the
/// tuple `representatives[k]` shifted to phase offset p; its cross section is
/// Y^r.
struct IntersectionSpace {
  FiniteGSpace space;
  std::vector<std::vector<std::int64_t>> representatives;  // states of X at phase offset 0

  [[nodiscard]] std::vector<std::int64_t> components(const FiniteGSpace& base,
                                                     std::int64_t s) const;
};

inline constexpr double kCovolumeBudget = 1e7;

IntersectionSpace intersection_space(const FiniteGSpace& base, int r);

struct CovolumeResult {
  Rational direct;  // total mass of the inverse correspondence on Y^[r]
  Rational kac;     // Voronoi sum over Y^r
};

/// Intersection covolume of order r, computed two independent ways.
/// Throws ResourceError past the tuple budget.
CovolumeResult exact_covolume(const CyclicSystem& sys, int r);

/// True iff every return set is a coset of one common subgroup of Z_n.
bool coset_predicate(const FiniteGSpace& space);

struct InequalityRow {
  int r = 1;
  Rational covolume_next;  // I^{r+1}
  Rational bound;          // iota * I^r
  bool holds = false;
  bool equality = false;
};

struct InequalityTable {
  Rational intensity;
  bool cosets = false;
  std::vector<InequalityRow> rows;
};

InequalityTable exact_basic_inequality(const CyclicSystem& sys, int r_max);

/// n in [2, 8], 1 to 3 orbits, random positive orbit masses, cross section
/// drawn uniformly among subsets meeting each orbit.
CyclicSystem random_system(Rng& rng);

TestTable random_test_table(const FiniteGSpace& space, Rng& rng);

struct SuiteCheck {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  std::string first_failure;

  [[nodiscard]] bool ok() const { return passed == total; }
};

struct SuiteOptions {
  std::size_t systems = 200;
  std::size_t functions = 100;
  int r_max = 3;
};

/// Every exact identity over a batch of random systems.
std::vector<SuiteCheck> run_suite(std::uint64_t seed, const SuiteOptions& opts = {});

}  // namespace transversal::oracle
