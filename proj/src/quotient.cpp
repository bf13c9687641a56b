// SPDX-License-Identifier: Apache-2.0
#include "covertower/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "covertower/errors.hpp"
#include "covertower/quadrature.hpp"

namespace covertower {

void TruncationPolicy::validate(double tau0) const {
  if (!(rtol > 0.0 && rtol < 1.0)) throw DomainError("truncation rtol must lie in (0, 1)");
  if (!(max_radius >= tau0)) throw DomainError("truncation max_radius must be >= tau_0");
}

double gaussian_tail_bound(double n, double tau, double radius) {
  // Disks of radius delta <= tau/2 around lattice points are disjoint; a point
  // at distance r > radius is dominated by the mean of f(|x - c| - delta) over
  // its disk, and the union lies outside radius - delta. Integrating the
  // Gaussian radially gives the bracket below; delta is optimized over a
  // small ladder (every rung is a valid bound).
  if (radius <= 0.0) return std::numeric_limits<double>::infinity();
  const double cap = std::min(0.5 * tau, 0.5 * radius);
  double best = std::numeric_limits<double>::infinity();
  for (double frac : {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125}) {
    const double delta = cap * frac;
    const double b = radius - 2.0 * delta;
    const double radial = std::exp(-0.5 * n * b * b) / n +
                          delta * std::sqrt(std::numbers::pi / (2.0 * n)) * std::erfc(b * std::sqrt(0.5 * n));
    best = std::min(best, 2.0 / (delta * delta) * radial);
  }
  return n / std::numbers::pi * best;
}

QuotientKernel::QuotientKernel(const Tower& tower, const BundleParams& p, int j, const TruncationPolicy& trunc)
    : p_(BundleParams::make(p.N, p.d0)),
      lattice_(tower.level(j).lattice),
      j_(j),
      tau_(tower.level(j).tau),
      radius_(0.0),
      tail_(0.0) {
  trunc.validate(tower.level(0).tau);
  const double target = trunc.rtol * p_.diag();
  constexpr double kStep = 0.05;
  for (double r = kStep; r <= trunc.max_radius + 1e-12; r += kStep) {
    const double t = gaussian_tail_bound(p_.n(), tau_, r);
    if (t <= target) {
      radius_ = r;
      tail_ = t;
      return;
    }
  }
  throw TruncationError("rtol " + std::to_string(trunc.rtol) + " unreachable within max_radius " +
                        std::to_string(trunc.max_radius) + " at level " + std::to_string(j));
}

KernelValue QuotientKernel::operator()(Complex z, Complex w) const {
  const double n = p_.n();
  const Complex c = z - w;
  const Complex wc = std::conj(w);
  Complex sum{0.0, 0.0};
  lattice_.for_each_point_in_disk(c, radius_, [&](Complex g, std::int64_t, std::int64_t) {
    const double phase = n * (std::imag(z * std::conj(g + w)) - std::imag(g * wc));
    sum += std::exp(Complex(-0.5 * n * std::norm(c - g), phase));
  });
  KernelValue kv;
  kv.gauged = p_.diag() * sum;
  kv.wmag = std::abs(kv.gauged);
  kv.coef = kv.gauged * std::exp(0.5 * n * (std::norm(z) + std::norm(w)));
  kv.tail = tail_;
  return kv;
}

double QuotientKernel::wmag(Complex z, Complex w) const { return (*this)(z, w).wmag; }

double QuotientKernel::diagonal(Complex z) const { return std::abs(diagonal_jet(z).S) * p_.diag(); }

QuotientKernel::Split QuotientKernel::split(Complex z, Complex w, double extra) const {
  const double n = p_.n();
  const Complex c = z - w;
  const Complex wc = std::conj(w);
  Split out{{0.0, 0.0}, {0.0, 0.0}};
  out.identity = p_.diag() * std::exp(Complex(-0.5 * n * std::norm(c), n * std::imag(z * wc)));
  lattice_.for_each_point_in_disk(c, radius_ + extra, [&](Complex g, std::int64_t m, std::int64_t k) {
    if (m == 0 && k == 0) return;
    const double phase = n * (std::imag(z * std::conj(g + w)) - std::imag(g * wc));
    out.rest += p_.diag() * std::exp(Complex(-0.5 * n * std::norm(c - g), phase));
  });
  return out;
}

QuotientKernel::DiagonalJet QuotientKernel::diagonal_jet(Complex z) const {
  const double n = p_.n();
  DiagonalJet jet{};
  lattice_.for_each_point_in_disk(Complex{0.0, 0.0}, radius_, [&](Complex g, std::int64_t, std::int64_t) {
    const Complex t = std::exp(Complex(-0.5 * n * std::norm(g), 2.0 * n * std::imag(z * std::conj(g))));
    jet.S += t;
    jet.G += g * t;
    jet.Gc += std::conj(g) * t;
    jet.A += std::norm(g) * t;
  });
  return jet;
}

MetricDensity QuotientKernel::metric_density(Complex z) const {
  // log K(z,w) = N z conj(w) + log Khat(z,w) where each term of Khat has
  // d/dz = N conj(gamma), d/dconj(w) = -N gamma; the mixed derivative of
  // log Khat on the diagonal is -N^2 (S A - Gc G) / S^2.
  const DiagonalJet jet = diagonal_jet(z);
  if (std::abs(jet.S) * p_.diag() < 1e-300) {
    throw BaseLocusError("diagonal vanishes at z = (" + std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + ")");
  }
  const double n = p_.n();
  const Complex q = (jet.S * jet.A - jet.Gc * jet.G) / (jet.S * jet.S);
  return MetricDensity{n - n * n * std::real(q)};
}

double QuotientKernel::normalized(Complex z, Complex w) const {
  if (z == w) return 1.0;
  const double dz = diagonal(z);
  const double dw = diagonal(w);
  if (dz < 1e-300 || dw < 1e-300) throw BaseLocusError("normalized kernel with vanishing diagonal");
  return std::clamp(wmag(z, w) / std::sqrt(dz * dw), 0.0, 1.0);
}

KernelValue quotient_kernel(const Tower& tower, const BundleParams& p, int j, Complex z, Complex w,
                            const TruncationPolicy& trunc) {
  return QuotientKernel(tower, p, j, trunc)(z, w);
}

double kernel_trace(const Tower& tower, const BundleParams& p, int j, int grid, const TruncationPolicy& trunc) {
  const QuotientKernel k(tower, p, j, trunc);
  return integrate<double>(level_grid(tower, j, grid), [&](Complex z) { return k.diagonal(z); });
}

double idempotence_residual(const Tower& tower, const BundleParams& p, int j, Complex z, Complex w, int grid,
                            const TruncationPolicy& trunc) {
  const QuotientKernel k(tower, p, j, trunc);
  const Complex direct = k(z, w).gauged;
  if (std::abs(direct) < 1e-300) throw DivisionDegenerate("|K_j(z, w)| below 1e-300");
  const Complex composed = integrate<Complex>(level_grid(tower, j, grid), [&](Complex u) {
    return k(z, u).gauged * std::conj(k(w, u).gauged);
  });
  return std::abs(composed - direct) / std::abs(direct);
}

double normalized_kernel(const Tower& tower, const BundleParams& p, int j, Complex z, Complex w,
                         const TruncationPolicy& trunc) {
  return QuotientKernel(tower, p, j, trunc).normalized(z, w);
}

MetricDensity bergman_metric_density(const Tower& tower, const BundleParams& p, int j, Complex z,
                                     const TruncationPolicy& trunc) {
  return QuotientKernel(tower, p, j, trunc).metric_density(z);
}

double stability_gap(const Tower& tower, const BundleParams& p, int j, int grid, const TruncationPolicy& trunc) {
  const QuotientKernel k(tower, p, j, trunc);
  const CellGrid cell = CellGrid::of(tower.base(), grid, grid);
  // The remainder is dominated by the translates nearest to z - w; reaching
  // past tau_j keeps them even when they lie below the truncation tolerance.
  const double extra = std::abs(tower.base().g1()) + std::abs(tower.base().g2()) + k.tau();
  double gap = 0.0;
  for (std::size_t a = 0; a < cell.size(); ++a) {
    const Complex z = cell.node(a);
    for (std::size_t b = 0; b < cell.size(); ++b) {
      const Complex w = cell.node(b);
      // | |T0 + R| - |T0| | without cancellation: the remainder R can be far
      // below the rounding level of T0.
      const auto s = k.split(z, w, extra);
      const double t0 = std::abs(s.identity);
      const double num = 2.0 * std::real(s.identity * std::conj(s.rest)) + std::norm(s.rest);
      const double den = std::abs(s.identity + s.rest) + t0;
      if (den > 0.0) gap = std::max(gap, std::abs(num) / den);
    }
  }
  return gap;
}

DiagonalMin base_locus_min(const Tower& tower, const BundleParams& p, int j, int grid,
                           const TruncationPolicy& trunc) {
  const QuotientKernel k(tower, p, j, trunc);
  const CellGrid cell = CellGrid::of(tower.base(), grid, grid);
  DiagonalMin best{std::numeric_limits<double>::infinity(), {0.0, 0.0}};
  for (std::size_t a = 0; a < cell.size(); ++a) {
    const Complex z = cell.node(a);
    const double v = k.diagonal(z);
    if (v < best.value) best = {v, z};
  }
  return best;
}

}  // namespace covertower
