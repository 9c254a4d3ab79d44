#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "transversal/models.hpp"
#include "transversal/rng.hpp"
#include "transversal/voronoi.hpp"

namespace transversal {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double R = 0.0;
  std::optional<double> K;
  double truncated_fraction = 0.0;
  bool is_lower_bound = false;
  /// Computed by exact enumeration (finite models); std_error is then 0.
  bool exact = false;
};

struct EstimatorOptions {
  unsigned threads = 0;  // 0: all hardware threads
  /// Estimate the intensity inside Kac averages instead of using the
  /// closed-form value.
  bool empirical_intensity = false;
  VoronoiOptions voronoi;
};

/// Mean of |Y_x ∩ K| / m(K) over n ambient draws, K = [-K_radius, K_radius]^d.
Estimate estimate_intensity(const ModelSpec& spec, double K_radius, std::size_t n, const Rng& rng,
                            const EstimatorOptions& opts = {});

/// iota^r times the mean Voronoi cell of the identity in the intersection of
/// r independent Palm return sets.
Estimate estimate_covolume_kac(const ModelSpec& spec, int r, std::size_t n, double R,
                               const Rng& rng, const EstimatorOptions& opts = {});

/// Mean of |(Y_x - Y_z) ∩ K| / m(K) over n independent ambient pairs. A pair
/// is flagged when the count changes after dropping points of Y_z within K of
/// the window edge.
Estimate estimate_covolume_alt(const ModelSpec& spec, std::size_t n, double K_radius, double R,
                               const Rng& rng, const EstimatorOptions& opts = {});

/// f(g, y) = bump_a(g) * weight_b(Y_y).
struct TestFunction {
  enum class Weight { One, Count, Gap };
  double a = 1.0;
  Weight weight = Weight::One;
  double b = 0.0;

  [[nodiscard]] std::string id() const;
  /// Parses "phi5.one", "phi5.count10", "phi2.gap1".
  static TestFunction parse(const std::string& id);
  /// Reach of f around the identity: a + b.
  [[nodiscard]] double reach() const { return a + b; }
};

/// The 20 built-in functions: a in {1, 2, 5, 8} times the five weights
/// {one, count2, count10, gap1, gap5}.
std::vector<TestFunction> builtin_test_functions();

struct MeckeReport {
  Estimate lhs;
  Estimate rhs;
  double z_score = 0.0;
  std::string test_function_id;
};

/// Both sides of the Mecke equation from independent Palm streams.
MeckeReport mecke_check(const ModelSpec& spec, const TestFunction& f, std::size_t n, double R,
                        const Rng& rng, const EstimatorOptions& opts = {});

struct InequalityRow {
  int r = 2;
  Estimate covolume;  // I^r
  double bound = 0.0;  // iota * I^{r-1}
  double bound_error = 0.0;
  double margin_z = 0.0;  // (I^r - bound) / combined error
};

struct InequalityReport {
  Estimate intensity;
  std::vector<Estimate> covolume;  // r = 1 .. r_max
  std::vector<InequalityRow> rows;  // r = 2 .. r_max
};

InequalityReport inequality_report(const ModelSpec& spec, int r_max, std::size_t n, double R,
                                   const Rng& rng, const EstimatorOptions& opts = {});

struct MonotonicityReport {
  Estimate covolume_base;      // cross section Y
  Estimate covolume_enlarged;  // Y plus the upper sheet
  double intensity_base = 0.0;
  double intensity_enlarged = 0.0;
};

/// Order-2 Kac covolumes of the suspension's cross section and of its
/// completely periodic enlargement. Throws UsageError for other models.
MonotonicityReport monotonicity_report(const ModelSpec& spec, std::size_t n, double R,
                                       const Rng& rng, const EstimatorOptions& opts = {});

/// "diverging" when every step grows by >= 1.5x, "stable" when the last two
/// values agree within 3 combined standard errors, otherwise "undetermined".
std::string sweep_verdict(const std::vector<Estimate>& sequence);

/// (a - b) / sqrt(se_a^2 + se_b^2), with 0/0 read as 0 and x/0 as +-inf.
double z_score(double a, double se_a, double b, double se_b);

}  // namespace transversal
