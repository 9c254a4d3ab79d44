#pragma once

#include <cstddef>
#include <vector>

#include "transversal/geometry.hpp"
#include "transversal/rng.hpp"

namespace transversal {

struct VoronoiCellResult {
  double measure = 0.0;
  /// The cell may extend past the window; measure is then of cell ∩ window.
  bool truncated = false;
  /// Same as truncated: measure is a certified lower bound.
  bool lower_bound = false;
};

struct VoronoiOptions {
  /// Monte-Carlo draws for cell volumes in R^d, d >= 2.
  std::size_t volume_samples = 100000;
};

/// Haar measure of the cell of the identity in the equivariant Voronoi
/// tessellation of P.
///
/// R^1: the half-open interval [left midpoint, right midpoint), with a missing
/// neighbour replaced by the window edge. Z_n: exact enumeration under cyclic
/// distance, ties going to the centre p whose offset x - p has the smallest
/// canonical residue. R^d, d >= 2: Monte-Carlo, requires `rng`.
///
/// Throws PreconditionError if P does not contain the identity.
VoronoiCellResult cell_at_identity(const Config& P, Rng* rng = nullptr,
                                   const VoronoiOptions& opts = {});

/// Cell measure of every point of P, in the order of P (R^1 and Z_n only).
/// Boundary cells in R^1 are cut at the window edge.
std::vector<double> tessellate(const Config& P);

/// Index into P of the centre owning x in Z_n.
std::size_t cyclic_owner(const Config& P, std::int64_t x);

}  // namespace transversal
