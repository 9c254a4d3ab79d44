#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace transversal {

/// Matching tolerance for inexact configurations, in group length units.
inline constexpr double kMatchTolerance = 1e-9;

/// The ambient group: either R^d or Z_n.
struct Group {
  enum class Kind { Real, Cyclic };

  Kind kind = Kind::Real;
  int dim = 1;              // R^d only
  std::int64_t order = 0;   // Z_n only

  static Group real(int dim = 1);
  static Group cyclic(std::int64_t n);

  [[nodiscard]] bool is_real() const { return kind == Kind::Real; }
  [[nodiscard]] bool is_cyclic() const { return kind == Kind::Cyclic; }
  [[nodiscard]] std::string name() const;

  friend bool operator==(const Group&, const Group&) = default;
};

/// Single element of R^d or Z_n.
struct GroupPoint {
  Group group;
  std::vector<double> coords;  // size dim for R^d
  std::int64_t residue = 0;    // in [0, n) for Z_n

  static GroupPoint real(std::vector<double> coords);
  static GroupPoint real(double x) { return real(std::vector<double>{x}); }
  static GroupPoint cyclic(std::int64_t residue, std::int64_t n);

  friend bool operator==(const GroupPoint&, const GroupPoint&) = default;
};

/// Canonical residue of v modulo n, in [0, n).
std::int64_t mod_floor(std::int64_t v, std::int64_t n);

/// Cyclic distance on Z_n.
std::int64_t cyclic_distance(std::int64_t a, std::int64_t b, std::int64_t n);

/// Total order used for tie-breaking: lexicographic on R^d, natural on
/// canonical residues of Z_n. Throws UsageError for points of different groups.
std::strong_ordering canonical_order(const GroupPoint& a, const GroupPoint& b);

/// Box [-radius, radius]^d in R^d. Ignored for Z_n, whose window is the group.
struct Window {
  double radius = 1.0;

  friend bool operator==(const Window&, const Window&) = default;
};

/// Finite point set: a locally finite subset of the group cut to a window.
///
/// Points are stored sorted under canonical_order. Construction clips to the
/// window and merges points closer than kMatchTolerance (exact equality when
/// the config is flagged exact). Real points live in one flat coordinate
/// array of size `size() * dim`. Immutable after construction.
class Config {
 public:
  Config() = default;

  static Config real(std::vector<double> flat_coords, int dim, Window window, bool exact);
  static Config real1d(std::vector<double> xs, double radius, bool exact) {
    return real(std::move(xs), 1, Window{radius}, exact);
  }
  static Config cyclic(std::vector<std::int64_t> residues, std::int64_t n);

  [[nodiscard]] const Group& group() const { return group_; }
  [[nodiscard]] const Window& window() const { return window_; }
  [[nodiscard]] double radius() const { return window_.radius; }
  [[nodiscard]] bool exact() const { return exact_; }
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] bool empty() const { return size() == 0; }

  /// Flat coordinates (R^d).
  [[nodiscard]] const std::vector<double>& coords() const { return coords_; }
  [[nodiscard]] std::span<const double> point(std::size_t i) const;
  /// Residues (Z_n).
  [[nodiscard]] const std::vector<std::int64_t>& residues() const { return residues_; }

  [[nodiscard]] GroupPoint at(std::size_t i) const;
  [[nodiscard]] bool contains_identity() const;
  /// Index of the identity, or size() if absent.
  [[nodiscard]] std::size_t identity_index() const;

  /// Translate every point by -g (the return set of g.x given that of x).
  /// For R^d the result is re-clipped to the same window.
  [[nodiscard]] Config shifted_by_minus(const GroupPoint& g) const;

  /// Restrict R^d points to the sub-box of the given radius.
  [[nodiscard]] Config restricted(double radius) const;

  friend bool operator==(const Config&, const Config&) = default;

 private:
  Group group_;
  Window window_;
  bool exact_ = true;
  std::vector<double> coords_;
  std::vector<std::int64_t> residues_;
};

/// Points present in both configurations. Windows must match.
Config intersect(const Config& a, const Config& b);

/// {p - q : p in a, q in b} cut to the box K, deduplicated.
Config difference_set(const Config& a, const Config& b, Window K);

nlohmann::json to_json(const Config& c);
Config config_from_json(const nlohmann::json& j);

}  // namespace transversal
