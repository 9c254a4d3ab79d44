#include "transversal/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transversal/errors.hpp"

namespace transversal {

std::size_t cyclic_owner(const Config& P, std::int64_t x) {
  const std::int64_t n = P.group().order;
  const auto& ps = P.residues();
  std::size_t best = ps.size();
  std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
  std::int64_t best_offset = n;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::int64_t d = cyclic_distance(x, ps[i], n);
    const std::int64_t off = mod_floor(x - ps[i], n);
    if (d < best_dist || (d == best_dist && off < best_offset)) {
      best = i;
      best_dist = d;
      best_offset = off;
    }
  }
  return best;
}

namespace {

VoronoiCellResult cell_1d(const Config& P) {
  const auto& xs = P.coords();
  const double R = P.radius();
  auto zero = std::lower_bound(xs.begin(), xs.end(), 0.0);
  VoronoiCellResult res;
  double left = -R;
  double right = R;
  if (zero != xs.begin())
    left = 0.5 * *(zero - 1);
  else
    res.truncated = true;
  if (zero + 1 != xs.end())
    right = 0.5 * *(zero + 1);
  else
    res.truncated = true;
  res.measure = right - left;
  res.lower_bound = res.truncated;
  return res;
}

VoronoiCellResult cell_cyclic(const Config& P) {
  const std::size_t id = P.identity_index();
  std::int64_t count = 0;
  for (std::int64_t x = 0; x < P.group().order; ++x)
    if (cyclic_owner(P, x) == id) ++count;
  return {static_cast<double>(count), false, false};
}

VoronoiCellResult cell_monte_carlo(const Config& P, Rng& rng, std::size_t samples) {
  const int d = P.group().dim;
  const double R = P.radius();
  const std::size_t id = P.identity_index();
  const auto& pts = P.coords();
  std::vector<double> x(d);
  std::size_t hits = 0;
  bool truncated = false;
  for (std::size_t s = 0; s < samples; ++s) {
    double edge = R;
    double norm2 = 0.0;
    for (int c = 0; c < d; ++c) {
      x[c] = rng.uniform(-R, R);
      norm2 += x[c] * x[c];
      edge = std::min(edge, R - std::abs(x[c]));
    }
    bool mine = true;
    for (std::size_t i = 0; i < P.size() && mine; ++i) {
      if (i == id) continue;
      double q = 0.0;
      for (int c = 0; c < d; ++c) q += (x[c] - pts[i * d + c]) * (x[c] - pts[i * d + c]);
      // Ties have Lebesgue measure zero; break them toward the smaller point.
      if (q < norm2 || (q == norm2 && i < id)) mine = false;
    }
    if (!mine) continue;
    ++hits;
    if (edge * edge <= norm2) truncated = true;
  }
  VoronoiCellResult res;
  res.measure = static_cast<double>(hits) / static_cast<double>(samples) * std::pow(2.0 * R, d);
  res.truncated = truncated;
  res.lower_bound = truncated;
  return res;
}

}  // namespace

VoronoiCellResult cell_at_identity(const Config& P, Rng* rng, const VoronoiOptions& opts) {
  if (!P.contains_identity())
    throw PreconditionError("Voronoi cell requested at the identity of a configuration without it");
  if (P.group().is_cyclic()) return cell_cyclic(P);
  if (P.group().dim == 1) return cell_1d(P);
  if (rng == nullptr) throw UsageError("Voronoi volumes in dimension >= 2 need a random stream");
  if (opts.volume_samples == 0) throw UsageError("volume_samples must be positive");
  return cell_monte_carlo(P, *rng, opts.volume_samples);
}

std::vector<double> tessellate(const Config& P) {
  if (P.empty()) throw UsageError("tessellate: empty configuration");
  std::vector<double> out(P.size(), 0.0);
  if (P.group().is_cyclic()) {
    for (std::int64_t x = 0; x < P.group().order; ++x) out[cyclic_owner(P, x)] += 1.0;
    return out;
  }
  if (P.group().dim != 1) throw UsageError("tessellate is available on R^1 and Z_n only");
  const auto& xs = P.coords();
  const double R = P.radius();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double left = i == 0 ? -R : 0.5 * (xs[i - 1] + xs[i]);
    const double right = i + 1 == xs.size() ? R : 0.5 * (xs[i] + xs[i + 1]);
    out[i] = right - left;
  }
  return out;
}

}  // namespace transversal
