// SPDX-License-Identifier: Apache-2.0
//
// Deterministic reductions and periodic trapezoid rules on lattice cells.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "covertower/lattice.hpp"

namespace covertower {

/// Pairwise (cascade) summation in a fixed order; error O(log n * eps).
template <class T>
T pairwise_sum(std::span<const T> xs) {
  constexpr std::size_t kLeaf = 16;
  if (xs.size() <= kLeaf) {
    T acc{};
    for (const T& x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& xs) {
  return pairwise_sum(std::span<const T>(xs));
}

/// Uniform n1 x n2 periodic grid on the cell {origin + s g1 + t g2 : s,t in [0,1)}.
/// The trapezoid rule with these nodes is spectrally accurate for smooth
/// integrands that are periodic with respect to (g1, g2).
struct CellGrid {
  Complex origin{0.0, 0.0};
  Complex g1, g2;
  int n1 = 16, n2 = 16;

  static CellGrid of(const Lattice& lat, int n1, int n2, Complex origin = {0.0, 0.0}) {
    return CellGrid{origin, lat.g1(), lat.g2(), n1, n2};
  }
  std::size_t size() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
  double weight() const {
    return std::imag(std::conj(g1) * g2) / (static_cast<double>(n1) * static_cast<double>(n2));
  }
  /// Node k in row-major order (t slow, s fast).
  Complex node(std::size_t k) const {
    const auto a = static_cast<double>(k % static_cast<std::size_t>(n1));
    const auto b = static_cast<double>(k / static_cast<std::size_t>(n1));
    return origin + (a / n1) * g1 + (b / n2) * g2;
  }
};

/// Trapezoid integral of f over the grid's cell, reduced pairwise by rows.
template <class T, class F>
T integrate(const CellGrid& grid, F&& f) {
  std::vector<T> row(static_cast<std::size_t>(grid.n1));
  std::vector<T> rows(static_cast<std::size_t>(grid.n2));
  for (int b = 0; b < grid.n2; ++b) {
    for (int a = 0; a < grid.n1; ++a) {
      row[static_cast<std::size_t>(a)] =
          f(grid.node(static_cast<std::size_t>(b) * static_cast<std::size_t>(grid.n1) + static_cast<std::size_t>(a)));
    }
    rows[static_cast<std::size_t>(b)] = pairwise_sum(std::span<const T>(row));
  }
  return pairwise_sum(std::span<const T>(rows)) * grid.weight();
}

/// Level-j grid with `per_cell` nodes per level-0 generator length, so the
/// resolution is the same at every level.
CellGrid level_grid(const Tower& tower, int j, int per_cell);

}  // namespace covertower
