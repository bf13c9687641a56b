// SPDX-License-Identifier: Apache-2.0
#include "covertower/fock.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <vector>

#include "covertower/errors.hpp"
#include "covertower/quadrature.hpp"

namespace covertower {

BundleParams BundleParams::make(int N, int d0) {
  if (N < 1) throw DomainError("N must be >= 1");
  if (d0 < 1) throw DomainError("d0 must be >= 1");
  if ((static_cast<long>(N) * d0) % 2 != 0) {
    throw DomainError("N*d0 must be even (N=" + std::to_string(N) + ", d0=" + std::to_string(d0) + ")");
  }
  return BundleParams{N, d0};
}

double BundleParams::diag() const { return n() / std::numbers::pi; }

KernelValue fock_kernel(const BundleParams& p, Complex z, Complex w) {
  const double n = p.n();
  const double c = p.diag();
  KernelValue kv;
  kv.coef = c * std::exp(n * z * std::conj(w));
  kv.gauged = c * std::exp(Complex(-0.5 * n * std::norm(z - w), n * std::imag(z * std::conj(w))));
  kv.wmag = c * std::exp(-0.5 * n * std::norm(z - w));
  return kv;
}

double agmon_check(const BundleParams& p, std::span<const double> dists) {
  const double n = p.n();
  double worst = 0.0;
  for (double d : dists) {
    if (!(d >= 1.0)) throw DomainError("Agmon check requires dist >= 1 (got " + std::to_string(d) + ")");
    // Ratio in log space; exp(-N d^2/2) underflows long before the ratio does.
    const double log_ratio = std::log(p.diag()) - 0.5 * n * d * d + kAgmonBeta * std::sqrt(n) * d;
    worst = std::max(worst, std::exp(log_ratio));
  }
  return worst;
}

double reproducing_residual(const BundleParams& p, Complex z, Complex w, double R, int grid) {
  const double h = 2.0 * R / grid;
  std::vector<Complex> row(static_cast<std::size_t>(grid));
  std::vector<Complex> rows(static_cast<std::size_t>(grid));
  for (int b = 0; b < grid; ++b) {
    const double y = -R + (b + 0.5) * h;
    for (int a = 0; a < grid; ++a) {
      const double x = -R + (a + 0.5) * h;
      const Complex u(x, y);
      Complex v{0.0, 0.0};
      if (std::norm(u) <= R * R) {
        v = fock_kernel(p, z, u).gauged * std::conj(fock_kernel(p, w, u).gauged);
      }
      row[static_cast<std::size_t>(a)] = v;
    }
    rows[static_cast<std::size_t>(b)] = pairwise_sum(std::span<const Complex>(row));
  }
  const Complex integral = pairwise_sum(std::span<const Complex>(rows)) * (h * h);
  const Complex exact = fock_kernel(p, z, w).gauged;
  return std::abs(integral - exact) / std::abs(exact);
}

}  // namespace covertower
