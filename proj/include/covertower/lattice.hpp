// SPDX-License-Identifier: Apache-2.0
//
// Translation lattices in the complex plane and finite towers of sublattices.
//
// A tower Gamma_0 > Gamma_1 > ... > Gamma_{depth-1} describes the chain of flat
// tori C/Gamma_j covering C/Gamma_0. Distances are Euclidean (|dz|), so the
// minimal deck displacement tau_j of level j is the shortest nonzero vector
// of Gamma_j.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace covertower {

using Complex = std::complex<double>;

/// Integer 2x2 matrix {a b; c d}. Used both as a sublattice step (new
/// generators in terms of the old ones, column-wise: g1' = a g1 + c g2,
/// g2' = b g1 + d g2) and as a cumulative basis change relative to level 0.
struct IntMat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;

  std::int64_t det() const { return a * d - b * c; }
  IntMat2 operator*(const IntMat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  bool operator==(const IntMat2&) const = default;
};

/// Rank-2 lattice g1*Z + g2*Z with positively oriented basis.
class Lattice {
 public:
  /// Throws LatticeError unless Im(conj(g1) g2) > 0.
  Lattice(Complex g1, Complex g2);

  Complex g1() const { return g1_; }
  Complex g2() const { return g2_; }
  double area() const { return area_; }

  /// Real coordinates (s, t) with z = s g1 + t g2.
  std::array<double, 2> coords(Complex z) const {
    return {std::imag(std::conj(z) * g2_) / area_, std::imag(std::conj(g1_) * z) / area_};
  }
  Complex point(double s, double t) const { return s * g1_ + t * g2_; }

  /// Visit every lattice point gamma = m g1 + n g2 with |gamma - center| <= radius.
  /// Calls f(gamma, m, n) in a fixed (n outer, m inner) order; no allocation.
  template <class F>
  void for_each_point_in_disk(Complex center, double radius, F&& f) const {
    if (!(radius >= 0.0)) return;
    const auto [s0, t0] = coords(center);
    const double ds = radius * std::abs(g2_) / area_;
    const double dt = radius * std::abs(g1_) / area_;
    const auto m_lo = static_cast<std::int64_t>(std::floor(s0 - ds)) - 1;
    const auto m_hi = static_cast<std::int64_t>(std::ceil(s0 + ds)) + 1;
    const auto n_lo = static_cast<std::int64_t>(std::floor(t0 - dt)) - 1;
    const auto n_hi = static_cast<std::int64_t>(std::ceil(t0 + dt)) + 1;
    const double r2 = radius * radius;
    for (std::int64_t n = n_lo; n <= n_hi; ++n) {
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const Complex gamma = static_cast<double>(m) * g1_ + static_cast<double>(n) * g2_;
        if (std::norm(gamma - center) <= r2) f(gamma, m, n);
      }
    }
  }

 private:
  Complex g1_, g2_;
  double area_;
};

/// Length of the shortest nonzero lattice vector (Lagrange-Gauss reduction).
double shortest_vector(const Lattice& lat);

/// All lattice points with |gamma - center| <= radius, sorted by distance to
/// center (ties broken by coefficients, so the order is deterministic).
std::vector<Complex> points_in_disk(const Lattice& lat, Complex center, double radius);

/// Representative of z in the half-open fundamental parallelogram
/// F = {s g1 + t g2 : s, t in [0, 1)}.
Complex reduce(const Lattice& lat, Complex z);

struct TowerLevel {
  int j = 0;
  Lattice lattice;
  std::int64_t index = 1;       // I_j = [Gamma_0 : Gamma_j]
  double tau = 0.0;             // shortest nonzero vector of Gamma_j
  IntMat2 basis{};              // Gamma_j generators in Gamma_0 coordinates
  std::vector<Complex> coset_reps;  // Gamma_0 / Gamma_j, reduced into F_j
};

class Tower {
 public:
  /// Chain generated from `base` by successive sublattice steps.
  /// Throws QuantizationError unless area(base)/pi is a positive integer,
  /// LatticeError if a step has determinant < 2.
  Tower(const Lattice& base, const std::vector<IntMat2>& steps);

  int depth() const { return static_cast<int>(levels_.size()); }
  int d0() const { return d0_; }
  /// Throws LevelOutOfRange.
  const TowerLevel& level(int j) const;
  const std::vector<TowerLevel>& levels() const { return levels_; }
  const Lattice& base() const { return levels_.front().lattice; }

 private:
  std::vector<TowerLevel> levels_;
  int d0_ = 0;
};

/// Gamma_j = ratio^j * scale * (Z + iZ), j = 0..depth-1.
/// Throws QuantizationError if scale^2/pi is not a positive integer,
/// DepthError if depth < 1.
Tower make_product_tower(double scale, int ratio, int depth);

/// Coset representatives of Gamma_0 / Gamma_j inside F_j. Throws LevelOutOfRange.
const std::vector<Complex>& coset_reps(const Tower& tower, int j);

/// Upper bound on the number of points of a lattice with shortest vector tau
/// in any closed disk of radius R (disjoint tau/2-disks).
inline double packing_count_bound(double radius, double tau) {
  const double h = 0.5 * tau;
  return (radius + h) * (radius + h) / (h * h);
}

}  // namespace covertower
