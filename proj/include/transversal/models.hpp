#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "transversal/geometry.hpp"
#include "transversal/oracle.hpp"
#include "transversal/rng.hpp"

namespace transversal {

/// Lattice in R^d; basis rows are the generators (row-major, dim x dim).
struct LatticeModel {
  int dim = 1;
  std::vector<double> basis{1.0};
};

/// Cut-and-project scheme in G x H = R x R. Basis rows are lattice
/// generators (g, h); the window is the interval [w_lo, w_hi] in H.
struct CutProjectModel {
  std::array<double, 4> basis{1.0, 1.0, std::sqrt(2.0), -std::sqrt(2.0)};
  double w_lo = 0.0;
  double w_hi = 1.0;
};

/// Homogeneous Poisson process of the given rate on R^d.
struct PoissonModel {
  double rate = 1.0;
  int dim = 1;
};

/// Suspension flow over the rotation z -> z + alpha (mod 1) under the roof
/// 1 + indicator of [1 - eps, 1). Cross section: the base at height 0.
struct SuspensionModel {
  double eps = 0.1;
  double alpha = (std::sqrt(5.0) - 1.0) / 2.0;

  [[nodiscard]] double roof(double z) const { return z >= 1.0 - eps ? 2.0 : 1.0; }
};

struct ModelSpec;

/// Wraps a model with an independent auxiliary label; return sets unchanged.
struct ExtensionModel {
  std::shared_ptr<const ModelSpec> inner;
};

/// Exact finite model, sampled from its rational weights.
struct CyclicModel {
  std::shared_ptr<const oracle::CyclicSystem> system;
  std::vector<double> ambient_cdf;  // cumulative mu over states
  std::vector<double> palm_cdf;     // cumulative transverse measure over states
};

struct ModelSpec {
  using Variant = std::variant<LatticeModel, CutProjectModel, PoissonModel, SuspensionModel,
                               ExtensionModel, CyclicModel>;
  Variant variant;

  static ModelSpec lattice(std::vector<double> basis, int dim = 1);
  static ModelSpec cut_project(CutProjectModel m = {});
  static ModelSpec poisson(double rate, int dim = 1);
  static ModelSpec suspension(double eps, double alpha = (std::sqrt(5.0) - 1.0) / 2.0);
  static ModelSpec extension(ModelSpec inner);
  static ModelSpec cyclic(oracle::CyclicSystem system);

  /// Short kind name: lattice, cutproject, poisson, suspension, extension, cyclic.
  [[nodiscard]] std::string kind() const;
  /// Canonical full description; equal descriptions mean equal models.
  [[nodiscard]] std::string describe() const;
  [[nodiscard]] Group group() const;
  /// Throws UsageError naming the offending field.
  void validate() const;
};

/// A sampled point with its return-time set cut to the window.
struct Sample {
  std::vector<double> label;
  Config returns;
};

using PalmSample = Sample;
using AmbientSample = Sample;

/// Draw x from the invariant probability measure; returns Y_x cut to radius R.
AmbientSample sample_ambient(const ModelSpec& spec, double R, Rng& rng);

/// Draw y from the normalized transverse measure; returns Y_y (contains 0).
PalmSample sample_palm(const ModelSpec& spec, double R, Rng& rng);

/// Palm draw for the suspension's completely periodic enlargement: the base
/// plus the sheet over [1 - eps, 1) at height 1.
PalmSample sample_palm_enlarged(const SuspensionModel& m, double R, Rng& rng);

struct AnalyticValues {
  std::optional<double> intensity;
  std::map<int, double> covolume;  // order r -> I^r; +inf when known infinite
  std::optional<double> covolume_upper;
  /// Known to transversely factor onto a lattice (equality in the basic
  /// inequality), or known not to.
  std::optional<bool> periodic;
};

/// Closed-form values; only fields that are known are filled.
AnalyticValues analytic_values(const ModelSpec& spec);

/// The enlarged suspension cross section has intensity and covolume 1.
AnalyticValues analytic_values_enlarged(const SuspensionModel& m);

struct LambdaProbe {
  double gap = std::numeric_limits<double>::infinity();
  std::size_t pooled = 0;   // distinct pooled return times
  std::size_t samples = 0;  // Palm draws
};

/// Smallest nonzero |g| in the k-fold sum set of pooled Palm return sets.
LambdaProbe lambda_probe(const ModelSpec& spec, int k, std::size_t n_samples, double R,
                         const Rng& rng);

/// Points gamma_G of the cut-and-project lattice with gamma_G in [g_lo, g_hi]
/// and gamma_H in [h_lo, h_hi], sorted. Throws ResourceError when the
/// enumeration box is too large.
std::vector<double> strip_points(const CutProjectModel& m, double g_lo, double g_hi, double h_lo,
                                 double h_hi);

/// False when x is within 1e-9 of a rational with denominator <= 10^4.
bool looks_irrational(double x);

/// Determinant of a row-major square matrix.
double determinant(std::vector<double> a, int dim);

}  // namespace transversal
