#include "transversal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "transversal/errors.hpp"

namespace transversal {

Group Group::real(int dim) {
  if (dim < 1) throw UsageError("group dimension must be >= 1, got " + std::to_string(dim));
  return Group{Kind::Real, dim, 0};
}

Group Group::cyclic(std::int64_t n) {
  if (n < 1) throw UsageError("cyclic group order must be >= 1, got " + std::to_string(n));
  return Group{Kind::Cyclic, 0, n};
}

std::string Group::name() const {
  return is_real() ? "R^" + std::to_string(dim) : "Z_" + std::to_string(order);
}

std::int64_t mod_floor(std::int64_t v, std::int64_t n) {
  const std::int64_t r = v % n;
  return r < 0 ? r + n : r;
}

std::int64_t cyclic_distance(std::int64_t a, std::int64_t b, std::int64_t n) {
  const std::int64_t d = mod_floor(a - b, n);
  return std::min(d, n - d);
}

GroupPoint GroupPoint::real(std::vector<double> coords) {
  for (double c : coords)
    if (!std::isfinite(c)) throw UsageError("group point coordinates must be finite");
  GroupPoint p;
  p.group = Group::real(static_cast<int>(coords.size()));
  p.coords = std::move(coords);
  return p;
}

GroupPoint GroupPoint::cyclic(std::int64_t residue, std::int64_t n) {
  GroupPoint p;
  p.group = Group::cyclic(n);
  p.residue = mod_floor(residue, n);
  return p;
}

std::strong_ordering canonical_order(const GroupPoint& a, const GroupPoint& b) {
  if (!(a.group == b.group))
    throw UsageError("cannot compare points of " + a.group.name() + " and " + b.group.name());
  if (a.group.is_cyclic()) return a.residue <=> b.residue;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    if (a.coords[i] < b.coords[i]) return std::strong_ordering::less;
    if (a.coords[i] > b.coords[i]) return std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

namespace {

bool lex_less(const double* a, const double* b, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

bool same_point(const double* a, const double* b, int dim, bool exact) {
  if (exact) return std::equal(a, a + dim, b);
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s <= kMatchTolerance * kMatchTolerance;
}

bool inside_box(const double* p, int dim, double radius) {
  for (int i = 0; i < dim; ++i)
    if (std::abs(p[i]) > radius) return false;
  return true;
}

// Sort flat points lexicographically and merge coincidences. Points within
// tolerance need not be adjacent in lexicographic order when dim >= 2, so
// every point is compared against all later points whose first coordinate is
// within tolerance.
std::vector<double> normalize_points(std::vector<double> flat, int dim, bool exact) {
  const std::size_t k = flat.size() / dim;
  if (dim == 1) {
    std::sort(flat.begin(), flat.end());
    std::vector<double> out;
    out.reserve(k);
    for (double x : flat) {
      if (out.empty() || !same_point(&out.back(), &x, 1, exact))
        out.push_back(x);
      else if (x == 0.0)
        out.back() = 0.0;  // a merged cluster keeps the identity exactly
    }
    return out;
  }
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(&flat[a * dim], &flat[b * dim], dim);
  });
  std::vector<char> dropped(k, 0);
  std::vector<double> out;
  out.reserve(flat.size());
  for (std::size_t i = 0; i < k; ++i) {
    if (dropped[i]) continue;
    const double* p = &flat[idx[i] * dim];
    out.insert(out.end(), p, p + dim);
    for (std::size_t j = i + 1; j < k; ++j) {
      const double* q = &flat[idx[j] * dim];
      if (q[0] - p[0] > (exact ? 0.0 : kMatchTolerance)) break;
      if (!dropped[j] && same_point(p, q, dim, exact)) dropped[j] = 1;
    }
  }
  return out;
}

void require_same_group(const Config& a, const Config& b) {
  if (!(a.group() == b.group()))
    throw UsageError("configurations live in different groups: " + a.group().name() + " vs " +
                     b.group().name());
}

}  // namespace

Config Config::real(std::vector<double> flat, int dim, Window window, bool exact) {
  if (!(window.radius > 0.0) || !std::isfinite(window.radius))
    throw UsageError("window radius must be positive and finite");
  if (dim < 1 || flat.size() % static_cast<std::size_t>(dim) != 0)
    throw UsageError("flat coordinate array does not match dimension");
  for (double c : flat)
    if (!std::isfinite(c)) throw UsageError("configuration coordinates must be finite");

  std::vector<double> kept;
  kept.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size(); i += dim)
    if (inside_box(&flat[i], dim, window.radius)) kept.insert(kept.end(), &flat[i], &flat[i] + dim);

  Config c;
  c.group_ = Group::real(dim);
  c.window_ = window;
  c.exact_ = exact;
  c.coords_ = normalize_points(std::move(kept), dim, exact);
  return c;
}

Config Config::cyclic(std::vector<std::int64_t> residues, std::int64_t n) {
  Config c;
  c.group_ = Group::cyclic(n);
  c.window_ = Window{static_cast<double>(n)};
  c.exact_ = true;
  for (auto& r : residues) r = mod_floor(r, n);
  std::sort(residues.begin(), residues.end());
  residues.erase(std::unique(residues.begin(), residues.end()), residues.end());
  c.residues_ = std::move(residues);
  return c;
}

std::size_t Config::size() const {
  return group_.is_cyclic() ? residues_.size() : coords_.size() / group_.dim;
}

std::span<const double> Config::point(std::size_t i) const {
  return {coords_.data() + i * group_.dim, static_cast<std::size_t>(group_.dim)};
}

GroupPoint Config::at(std::size_t i) const {
  if (group_.is_cyclic()) return GroupPoint::cyclic(residues_[i], group_.order);
  auto p = point(i);
  return GroupPoint::real(std::vector<double>(p.begin(), p.end()));
}

std::size_t Config::identity_index() const {
  if (group_.is_cyclic()) {
    auto it = std::lower_bound(residues_.begin(), residues_.end(), 0);
    return (it != residues_.end() && *it == 0) ? static_cast<std::size_t>(it - residues_.begin())
                                               : size();
  }
  const int d = group_.dim;
  const std::vector<double> zero(d, 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    if (std::equal(zero.begin(), zero.end(), coords_.begin() + i * d)) return i;
  return size();
}

bool Config::contains_identity() const { return identity_index() < size(); }

Config Config::shifted_by_minus(const GroupPoint& g) const {
  if (!(g.group == group_)) throw UsageError("shift by a point of a different group");
  if (group_.is_cyclic()) {
    std::vector<std::int64_t> r = residues_;
    for (auto& v : r) v -= g.residue;
    return cyclic(std::move(r), group_.order);
  }
  std::vector<double> flat = coords_;
  const int d = group_.dim;
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= g.coords[i % d];
  return real(std::move(flat), d, window_, exact_);
}

Config Config::restricted(double radius) const {
  if (group_.is_cyclic()) return *this;
  Config c = real(coords_, group_.dim, Window{radius}, exact_);
  return c;
}

Config intersect(const Config& a, const Config& b) {
  require_same_group(a, b);
  if (a.group().is_cyclic()) {
    std::vector<std::int64_t> out;
    std::set_intersection(a.residues().begin(), a.residues().end(), b.residues().begin(),
                          b.residues().end(), std::back_inserter(out));
    return Config::cyclic(std::move(out), a.group().order);
  }
  if (!(a.window() == b.window())) throw UsageError("intersect: windows differ");
  const bool exact = a.exact() && b.exact();
  const double tol = exact ? 0.0 : kMatchTolerance;
  const int d = a.group().dim;
  const auto& pa = a.coords();
  const auto& pb = b.coords();
  const std::size_t nb = b.size();
  std::vector<char> used(nb, 0);
  std::vector<double> out;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double* p = &pa[i * d];
    while (lo < nb && pb[lo * d] < p[0] - tol) ++lo;
    for (std::size_t j = lo; j < nb && pb[j * d] <= p[0] + tol; ++j) {
      if (!used[j] && same_point(p, &pb[j * d], d, exact)) {
        used[j] = 1;
        out.insert(out.end(), p, p + d);
        break;
      }
    }
  }
  return Config::real(std::move(out), d, a.window(), exact);
}

Config difference_set(const Config& a, const Config& b, Window K) {
  require_same_group(a, b);
  if (a.group().is_cyclic()) {
    const std::int64_t n = a.group().order;
    std::vector<char> hit(n, 0);
    for (auto p : a.residues())
      for (auto q : b.residues()) hit[mod_floor(p - q, n)] = 1;
    std::vector<std::int64_t> out;
    for (std::int64_t g = 0; g < n; ++g)
      if (hit[g]) out.push_back(g);
    return Config::cyclic(std::move(out), n);
  }
  const bool exact = a.exact() && b.exact();
  const int d = a.group().dim;
  const double k = K.radius;
  std::vector<double> out;
  if (d == 1) {
    const auto& qs = b.coords();
    for (double p : a.coords()) {
      auto first = std::lower_bound(qs.begin(), qs.end(), p - k);
      for (auto it = first; it != qs.end() && *it <= p + k; ++it) out.push_back(p - *it);
    }
  } else {
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) {
        bool inside = true;
        for (int c = 0; c < d && inside; ++c) {
          diff[c] = a.coords()[i * d + c] - b.coords()[j * d + c];
          inside = std::abs(diff[c]) <= k;
        }
        if (inside) out.insert(out.end(), diff.begin(), diff.end());
      }
  }
  return Config::real(std::move(out), d, K, exact);
}

nlohmann::json to_json(const Config& c) {
  nlohmann::json j;
  j["group"] = c.group().name();
  j["exact"] = c.exact();
  if (c.group().is_cyclic()) {
    j["n"] = c.group().order;
    j["points"] = c.residues();
    return j;
  }
  j["R"] = c.radius();
  j["dim"] = c.group().dim;
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto p = c.point(i);
    if (c.group().dim == 1)
      pts.push_back(p[0]);
    else
      pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["points"] = std::move(pts);
  return j;
}

Config config_from_json(const nlohmann::json& j) {
  if (j.contains("n")) return Config::cyclic(j.at("points").get<std::vector<std::int64_t>>(), j.at("n"));
  const int dim = j.value("dim", 1);
  std::vector<double> flat;
  for (const auto& p : j.at("points")) {
    if (p.is_array())
      for (const auto& x : p) flat.push_back(x.get<double>());
    else
      flat.push_back(p.get<double>());
  }
  return Config::real(std::move(flat), dim, Window{j.at("R").get<double>()}, j.value("exact", false));
}

}  // namespace transversal
