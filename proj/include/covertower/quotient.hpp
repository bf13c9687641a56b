// SPDX-License-Identifier: Apache-2.0
//
// Bergman kernels of L^N over the level-j torus C/Gamma_j, realized as the
// automorphy-weighted Poincare series of the Fock kernel:
//
//   K_j(z, w) = (N/pi) sum_{gamma in Gamma_j} exp{N[z conj(gamma) - |gamma|^2/2 + (z - gamma) conj(w)]}.
//
// Each term has pointwise norm (N/pi) exp(-N|z - w - gamma|^2 / 2), so the
// series is truncated to a disk around z - w whose radius is certified by a
// lattice packing bound on the Gaussian tail.
#pragma once

#include <complex>

#include "covertower/fock.hpp"
#include "covertower/lattice.hpp"

namespace covertower {

struct TruncationPolicy {
  double rtol = 1e-13;       // tail bound relative to N/pi
  double max_radius = 64.0;  // hard cap on the truncation radius

  /// Throws DomainError unless rtol in (0,1) and max_radius >= tau0.
  void validate(double tau0) const;
};

/// Density of the Bergman metric Omega_j against dx dy.
struct MetricDensity {
  double value = 0.0;
};

/// Certified bound on sum_{|gamma - c| > radius} (N/pi) exp(-N|gamma - c|^2/2)
/// over any lattice with shortest vector tau.
double gaussian_tail_bound(double n, double tau, double radius);

/// Level-j quotient kernel with its truncation radius resolved once.
class QuotientKernel {
 public:
  /// Throws TruncationError if rtol is unreachable within max_radius.
  QuotientKernel(const Tower& tower, const BundleParams& p, int j, const TruncationPolicy& trunc = {});

  KernelValue operator()(Complex z, Complex w) const;
  double wmag(Complex z, Complex w) const;
  double diagonal(Complex z) const;

  /// Identity (gamma = 0) term and the remainder, summed over a disk of radius
  /// radius() + extra around z - w. The identity term equals the Fock kernel.
  struct Split {
    Complex identity;
    Complex rest;
  };
  Split split(Complex z, Complex w, double extra = 0.0) const;

  /// Termwise sums on the diagonal: S = sum T, G = sum gamma T,
  /// Gc = sum conj(gamma) T, A = sum |gamma|^2 T with
  /// T = exp(-N|gamma|^2/2 + 2iN Im(z conj(gamma))).
  struct DiagonalJet {
    Complex S, G, Gc, A;
  };
  DiagonalJet diagonal_jet(Complex z) const;

  /// (1/4) Laplacian of log K_j(z, z). Throws BaseLocusError if the diagonal vanishes.
  MetricDensity metric_density(Complex z) const;

  /// |K_j(z,w)|_{h^N} / sqrt(|K_j(z,z)| |K_j(w,w)|), clamped into [0, 1].
  double normalized(Complex z, Complex w) const;

  const BundleParams& params() const { return p_; }
  const Lattice& lattice() const { return lattice_; }
  int level() const { return j_; }
  double tau() const { return tau_; }
  double radius() const { return radius_; }
  double tail() const { return tail_; }

 private:
  BundleParams p_;
  Lattice lattice_;
  int j_;
  double tau_;
  double radius_;
  double tail_;
};

KernelValue quotient_kernel(const Tower& tower, const BundleParams& p, int j, Complex z, Complex w,
                            const TruncationPolicy& trunc = {});

/// Periodic-trapezoid integral of the diagonal over F_j; equals N d0 I_j.
/// `grid` is the node count per level-0 generator length.
double kernel_trace(const Tower& tower, const BundleParams& p, int j, int grid, const TruncationPolicy& trunc = {});

/// Relative defect of K_j o K_j = K_j at (z, w), quadrature over F_j.
/// Throws DivisionDegenerate if |K_j(z, w)| < 1e-300.
double idempotence_residual(const Tower& tower, const BundleParams& p, int j, Complex z, Complex w, int grid,
                            const TruncationPolicy& trunc = {});

double normalized_kernel(const Tower& tower, const BundleParams& p, int j, Complex z, Complex w,
                         const TruncationPolicy& trunc = {});

MetricDensity bergman_metric_density(const Tower& tower, const BundleParams& p, int j, Complex z,
                                     const TruncationPolicy& trunc = {});

/// sup over a grid x grid mesh of F_0 x F_0 of | |K_j(z,w)|_h - |K(z,w)|_h |.
double stability_gap(const Tower& tower, const BundleParams& p, int j, int grid, const TruncationPolicy& trunc = {});

struct DiagonalMin {
  double value = 0.0;
  Complex at{0.0, 0.0};
};

/// Minimum of the diagonal over a grid x grid mesh of F_0 (the diagonal is
/// Gamma_0-periodic, so this covers all of F_j).
DiagonalMin base_locus_min(const Tower& tower, const BundleParams& p, int j, int grid,
                           const TruncationPolicy& trunc = {});

}  // namespace covertower
