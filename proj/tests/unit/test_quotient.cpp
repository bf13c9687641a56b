// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "covertower/errors.hpp"
#include "covertower/quadrature.hpp"
#include "covertower/quotient.hpp"

using namespace covertower;

namespace {

const double kPi = std::numbers::pi;
const double kRootPi = std::sqrt(kPi);

// Gauged kernel by a plain sum over a coefficient box, holomorphic form.
Complex brute_kernel(const Lattice& lat, double N, Complex z, Complex w, int box) {
  Complex sum = 0.0;
  for (int m = -box; m <= box; ++m) {
    for (int n = -box; n <= box; ++n) {
      const Complex g = static_cast<double>(m) * lat.g1() + static_cast<double>(n) * lat.g2();
      sum += std::exp(N * (z * std::conj(g) - 0.5 * std::norm(g) + (z - g) * std::conj(w)));
    }
  }
  return N / kPi * sum * std::exp(-0.5 * N * (std::norm(z) + std::norm(w)));
}

double theta(double q, bool alternating) {
  double s = 0.0;
  for (int n = -20; n <= 20; ++n) s += (alternating && (n % 2) ? -1.0 : 1.0) * std::pow(q, n * n);
  return s;
}

struct Fixture {
  Tower tower = make_product_tower(kRootPi, 2, 4);
  BundleParams p = BundleParams::make(2, 1);
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "series matches a brute-force lattice sum") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, kRootPi);
  for (int j = 0; j < 2; ++j) {
    const QuotientKernel k(tower, p, j);
    for (int i = 0; i < 20; ++i) {
      const Complex z(u(gen), u(gen)), w(u(gen), u(gen));
      const Complex want = brute_kernel(tower.level(j).lattice, 2.0, z, w, 8);
      const KernelValue got = k(z, w);
      CHECK(std::abs(got.gauged - want) <= 1e-12);
      CHECK(got.wmag == doctest::Approx(std::abs(want)).epsilon(1e-11));
      CHECK(got.tail <= 1e-13 * p.diag());
    }
  }
}

TEST_CASE_FIXTURE(Fixture, "diagonal values against theta functions") {
  const double q = std::exp(-kPi);
  const double at_zero = 2 / kPi * std::pow(theta(q, false), 2);
  CHECK(quotient_kernel(tower, p, 0, 0.0, 0.0).wmag == doctest::Approx(at_zero).epsilon(1e-13));
  CHECK(at_zero == doctest::Approx(0.751428163461841786).epsilon(1e-14));
  CHECK(at_zero == doctest::Approx(2 / kPi * (1 + 4 * std::exp(-kPi))).epsilon(1e-2));
  const DiagonalMin m = base_locus_min(tower, p, 0, 64);
  const double deep = 2 / kPi * std::pow(theta(q, true), 2);
  CHECK(deep == doctest::Approx(0.531339949958421825).epsilon(1e-14));
  CHECK(m.value == doctest::Approx(deep).epsilon(1e-12));
  CHECK(m.value > 0.1);
  CHECK(m.value <= 2 / kPi);
  // Deep hole at (a/4)(1 + i) modulo (a/2) Z^2.
  const double h = kRootPi / 2;
  CHECK(std::fmod(m.at.real(), h) == doctest::Approx(kRootPi / 4));
  CHECK(std::fmod(m.at.imag(), h) == doctest::Approx(kRootPi / 4));
}

TEST_CASE_FIXTURE(Fixture, "hermitian symmetry and deck invariance") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int j = 0; j < 3; ++j) {
    const QuotientKernel k(tower, p, j);
    for (int i = 0; i < 30; ++i) {
      const Complex z(u(gen), u(gen)), w(u(gen), u(gen));
      CHECK(std::abs(k(z, w).gauged - std::conj(k(w, z).gauged)) <= 1e-12);
      const Complex g0 = static_cast<double>(i % 3 - 1) * tower.base().g1() + static_cast<double>(i % 2) * tower.base().g2();
      const double a = k.wmag(z, w), b = k.wmag(z + g0, w + g0);
      CHECK(std::abs(a - b) <= 1e-9 * std::max(a, 1e-300));
    }
  }
}

TEST_CASE_FIXTURE(Fixture, "normalized kernel") {
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, 2 * kRootPi);
  for (int j = 0; j < 3; ++j) {
    const QuotientKernel k(tower, p, j);
    const Lattice& lat = tower.level(j).lattice;
    for (int i = 0; i < 100; ++i) {
      const Complex z(u(gen), u(gen)), w(u(gen), u(gen));
      const double P = k.normalized(z, w);
      CHECK(P >= 0.0);
      CHECK(P <= 1.0);
      CHECK(P < 1.0 - 1e-6);
      CHECK(k.normalized(z, z) == 1.0);
      CHECK(k.normalized(z + lat.g1() - lat.g2(), z) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(k.normalized(z + lat.g1(), w) == doctest::Approx(P).epsilon(1e-10));
    }
  }
  // Fock limit at a deep level.
  CHECK(normalized_kernel(tower, p, 3, 0.3, 1.3) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE_FIXTURE(Fixture, "trace equals dimension") {
  for (int j = 0; j < 3; ++j) {
    const double dim = 2.0 * static_cast<double>(tower.level(j).index);
    CHECK(std::abs(kernel_trace(tower, p, j, 64) - dim) <= 1e-8 * dim);
  }
}

TEST_CASE_FIXTURE(Fixture, "idempotence") {
  CHECK(idempotence_residual(tower, p, 0, 0.0, 0.0, 64) <= 1e-8);
  CHECK(idempotence_residual(tower, p, 1, {0.4, 0.7}, {0.4, 0.7}, 64) <= 1e-8);
  CHECK(idempotence_residual(tower, p, 1, {0.4, 0.7}, {1.1, 0.2}, 64) <= 1e-8);
  const double coarse = idempotence_residual(tower, p, 0, {0.3, 0.2}, {1.0, 1.4}, 4);
  const double fine = idempotence_residual(tower, p, 0, {0.3, 0.2}, {1.0, 1.4}, 16);
  CHECK(fine < coarse);
}

TEST_CASE_FIXTURE(Fixture, "metric density") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, kRootPi);
  for (int j = 0; j < 3; ++j) {
    const QuotientKernel k(tower, p, j);
    for (int i = 0; i < 20; ++i) {
      const Complex z(u(gen), u(gen));
      // (1/4) Laplacian of log K(z,z) with log K = log(gauged diagonal) + N|z|^2.
      const double hstep = 1e-3;
      auto f = [&](Complex x) { return std::log(k.diagonal(x)); };
      const double lap = (f(z + hstep) + f(z - hstep) + f(z + Complex(0, hstep)) + f(z - Complex(0, hstep)) - 4 * f(z)) /
                         (hstep * hstep);
      const double fd = p.n() + lap / 4;
      const double an = k.metric_density(z).value;
      CHECK(an >= 0.0);
      CHECK(std::abs(an - fd) <= 1e-5);
    }
    // Total mass is N times the area of F_0.
    const double mass = integrate<double>(CellGrid::of(tower.base(), 64, 64), [&](Complex z) { return k.metric_density(z).value; });
    CHECK(mass == doctest::Approx(p.n() * kPi).epsilon(1e-10));
  }
  CHECK(bergman_metric_density(tower, p, 3, {0.2, 0.9}).value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE_FIXTURE(Fixture, "stability gap") {
  // Independent sup over the same nodes.
  for (int j = 0; j < 2; ++j) {
    const CellGrid g = CellGrid::of(tower.base(), 8, 8);
    double want = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
      for (std::size_t b = 0; b < g.size(); ++b) {
        const Complex z = g.node(a), w = g.node(b);
        want = std::max(want, std::abs(std::abs(brute_kernel(tower.level(j).lattice, 2.0, z, w, 6)) - fock_kernel(p, z, w).wmag));
      }
    }
    CHECK(stability_gap(tower, p, j, 8) == doctest::Approx(want).epsilon(1e-9));
  }
  double prev = INFINITY;
  for (int j = 0; j < 4; ++j) {
    const double g = stability_gap(tower, p, j, 8);
    CHECK(g > 0.0);
    CHECK(g < prev);
    prev = g;
  }
  // Gaussian decay is faster than exp(-tau_j) with one constant fitted at j=0.
  const double c = stability_gap(tower, p, 0, 8) * std::exp(tower.level(0).tau);
  for (int j = 1; j < 4; ++j) CHECK(stability_gap(tower, p, j, 8) <= c * std::exp(-tower.level(j).tau));
}

TEST_CASE("truncation") {
  const Tower tower = make_product_tower(kRootPi, 2, 2);
  const auto p = BundleParams::make(2, 1);
  CHECK_THROWS_AS(QuotientKernel(tower, p, 0, TruncationPolicy{1e-13, 2.0}), TruncationError);
  CHECK_THROWS_AS(TruncationPolicy({2.0, 64.0}).validate(1.0), DomainError);
  CHECK_THROWS_AS(TruncationPolicy({1e-10, 0.5}).validate(1.0), DomainError);
  // The certified bound dominates the actual tail.
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Lattice& lat = tower.base();
  for (double R : {1.0, 2.5, 4.0, 6.0}) {
    for (int i = 0; i < 10; ++i) {
      const Complex c(u(gen), u(gen));
      double tail = 0.0;
      for (int m = -20; m <= 20; ++m) {
        for (int n = -20; n <= 20; ++n) {
          const Complex g = static_cast<double>(m) * lat.g1() + static_cast<double>(n) * lat.g2();
          if (std::abs(g - c) > R) tail += 2 / kPi * std::exp(-std::norm(g - c));
        }
      }
      CHECK(tail <= gaussian_tail_bound(2.0, kRootPi, R));
    }
  }
}
