// SPDX-License-Identifier: Apache-2.0
//
// Zeros of sections inside the level-j fundamental domain: argument-principle
// winding numbers on parallelogram cells, quadtree subdivision, Newton polish.
#pragma once

#include <vector>

#include "covertower/lattice.hpp"
#include "covertower/sections.hpp"

namespace covertower {

/// Closed parallelogram {origin + s e1 + t e2 : s, t in [0, 1]}, positively oriented.
struct Cell {
  Complex origin{0.0, 0.0};
  Complex e1{1.0, 0.0};
  Complex e2{0.0, 1.0};

  static Cell of(const Lattice& lat, Complex origin = {0.0, 0.0}) { return {origin, lat.g1(), lat.g2()}; }
  Complex center() const { return origin + 0.5 * (e1 + e2); }
  double size() const { return std::max(std::abs(e1), std::abs(e2)); }
  /// Scale about the center by `factor`.
  Cell dilated(double factor) const {
    return {center() - 0.5 * factor * (e1 + e2), factor * e1, factor * e2};
  }
  /// Cell coordinates (s, t) of z.
  std::array<double, 2> coords(Complex z) const;
};

struct Zero {
  Complex point;
  int multiplicity = 1;
};

struct ZeroSet {
  int level = 0;
  std::vector<Zero> zeros;
  int total = 0;
  int anomalies = 0;  // clusters or multiple zeros left unresolved at min cell size
};

struct ZeroOptions {
  double tol = 1e-10;         // Newton target for the weighted |s|
  double guard = 1e-9;        // boundary guard relative to the rms of a unit section
  double min_cell = 1e-6;     // minimum cell size relative to tau_j
  double snap = 0.25;         // integer-snap tolerance of the quadrature winding
};

/// Number of zeros inside `cell` counted with multiplicity. On a zero within
/// the guard of the boundary the cell is dilated by 1 + 1e-4 and retried (at
/// most 5 times). Throws BoundaryZeroError, NonIntegerWinding.
int winding_count(const Section& s, const Cell& cell, const ZeroOptions& opt = {});

/// All zeros in F_j with multiplicities; total is checked against the
/// degree N d0 I_j (ZeroCountMismatch otherwise).
ZeroSet locate_zeros(const Section& s, const ZeroOptions& opt = {});

/// Zeros reduced into F_0, multiplicities kept.
std::vector<Zero> pushforward_zeros(const ZeroSet& zs, const Tower& tower);

}  // namespace covertower
