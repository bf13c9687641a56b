// SPDX-License-Identifier: Apache-2.0
//
// Universal-cover model: the Bergman kernel of entire functions with weight
// exp(-N|z|^2) against Lebesgue measure,
//
//     K(z, w) = (N/pi) exp(N z conj(w)),   |K(z, w)|_{h^N} = (N/pi) exp(-N|z-w|^2 / 2).
//
// Everything downstream works with the "gauged" value
// k(z, w) = K(z, w) exp(-N(|z|^2 + |w|^2)/2), whose modulus is the pointwise
// norm and which never overflows.
#pragma once

#include <complex>
#include <span>

#include "covertower/lattice.hpp"

namespace covertower {

/// Tensor power N of L over a base torus of degree d0. N*d0 must be even so
/// that lattice translations act without a character.
struct BundleParams {
  int N = 2;
  int d0 = 1;

  /// Throws DomainError on N < 1, d0 < 1 or odd N*d0.
  static BundleParams make(int N, int d0);
  double n() const { return static_cast<double>(N); }
  /// Diagonal of the Fock kernel, N/pi.
  double diag() const;
};

struct KernelValue {
  Complex coef;      // holomorphic frame coefficient (may overflow far from 0)
  Complex gauged;    // coef * exp(-N(|z|^2+|w|^2)/2)
  double wmag = 0;   // |gauged|
  double tail = 0;   // certified bound on the omitted part of a truncated sum
};

KernelValue fock_kernel(const BundleParams& p, Complex z, Complex w);

/// Agmon constant used throughout: wmag(d) <= (N/pi) exp(-beta sqrt(N) d), d >= 1.
inline constexpr double kAgmonBeta = 0.5;

/// max_d wmag(d) / exp(-beta sqrt(N) d). Throws DomainError if any d < 1.
double agmon_check(const BundleParams& p, std::span<const double> dists);

/// Relative deviation between K(z, w) and the reproducing integral
/// int_{|u|<=R} K(z,u) conj(K(w,u)) e^{-N|u|^2} dm(u), midpoint rule on a
/// grid x grid mesh of [-R, R]^2.
double reproducing_residual(const BundleParams& p, Complex z, Complex w, double R, int grid);

}  // namespace covertower
