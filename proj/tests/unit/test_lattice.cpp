// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "covertower/errors.hpp"
#include "covertower/lattice.hpp"

using namespace covertower;

namespace {

const double kRootPi = std::sqrt(std::numbers::pi);

// Brute force over a generous coefficient box.
std::vector<Complex> brute_disk(const Lattice& lat, Complex c, double r, int box) {
  std::vector<Complex> out;
  for (int m = -box; m <= box; ++m) {
    for (int n = -box; n <= box; ++n) {
      const Complex g = static_cast<double>(m) * lat.g1() + static_cast<double>(n) * lat.g2();
      if (std::abs(g - c) <= r) out.push_back(g);
    }
  }
  return out;
}

double brute_shortest(const Lattice& lat, int box) {
  double best = INFINITY;
  for (int m = -box; m <= box; ++m) {
    for (int n = -box; n <= box; ++n) {
      if (m == 0 && n == 0) continue;
      best = std::min(best, std::abs(static_cast<double>(m) * lat.g1() + static_cast<double>(n) * lat.g2()));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("lattice rejects degenerate or negatively oriented bases") {
  CHECK_THROWS_AS(Lattice({1, 0}, {2, 0}), LatticeError);
  CHECK_THROWS_AS(Lattice({0, 1}, {1, 0}), LatticeError);
  CHECK(Lattice({1, 0}, {0, 1}).area() == doctest::Approx(1.0));
}

TEST_CASE("shortest vector") {
  CHECK(shortest_vector(Lattice({1, 0}, {0, 1})) == doctest::Approx(1.0));
  CHECK(shortest_vector(Lattice({kRootPi, 0}, {0, kRootPi})) == doctest::Approx(brute_shortest(Lattice({kRootPi, 0}, {0, kRootPi}), 2)));
  CHECK(shortest_vector(Lattice({kRootPi, 0}, {0, kRootPi})) == doctest::Approx(1.7724539).epsilon(1e-7));
  const Lattice hex({1, 0}, {0.5, std::sqrt(3.0) / 2});
  CHECK(shortest_vector(hex) == doctest::Approx(1.0));
  // Skewed bases reduce to the same answer as enumeration.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 50; ++k) {
    const Complex g1(u(gen), u(gen));
    Complex g2(u(gen), u(gen));
    if (std::imag(std::conj(g1) * g2) < 0) g2 = -g2;
    if (std::abs(std::imag(std::conj(g1) * g2)) < 0.3) continue;
    const Lattice lat(g1, g2);
    CHECK(shortest_vector(lat) == doctest::Approx(brute_shortest(lat, 30)).epsilon(1e-12));
  }
}

TEST_CASE("points in disk") {
  const Lattice z2({1, 0}, {0, 1});
  CHECK(points_in_disk(z2, 0.0, 1.2).size() == 5);
  const auto at0 = points_in_disk(z2, 0.0, 0.0);
  REQUIRE(at0.size() == 1);
  CHECK(at0[0] == Complex(0, 0));
  const auto half = points_in_disk(z2, 0.5, 0.6);
  REQUIRE(half.size() == 2);
  CHECK(std::abs(half[0] - half[1]) == doctest::Approx(1.0));

  SUBCASE("matches brute force and is sorted") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-5, 5), ur(0, 10);
    const Lattice skew({1.3, 0.2}, {0.4, 1.1});
    for (int k = 0; k < 100; ++k) {
      const Complex c(u(gen), u(gen));
      const double r = ur(gen);
      const auto got = points_in_disk(skew, c, r);
      const auto want = brute_disk(skew, c, r, 40);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 1; i < got.size(); ++i) CHECK(std::abs(got[i - 1] - c) <= std::abs(got[i] - c) + 1e-12);
      // Packing bound on the count.
      CHECK(static_cast<double>(got.size()) <= packing_count_bound(r, shortest_vector(skew)));
    }
  }
}

TEST_CASE("reduce") {
  const Lattice z2({1, 0}, {0, 1});
  const Complex r = reduce(z2, {2.3, 0.7});
  CHECK(r.real() == doctest::Approx(0.3));
  CHECK(r.imag() == doctest::Approx(0.7));
  CHECK(reduce(z2, {0.25, 0.5}) == Complex(0.25, 0.5));
  const Lattice sq({kRootPi, 0}, {0, kRootPi});
  const Complex m = reduce(sq, {-0.1, 0.0});
  CHECK(m.real() == doctest::Approx(kRootPi - 0.1));
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50, 50);
  const Lattice skew({1.3, 0.2}, {0.4, 1.1});
  for (int k = 0; k < 1000; ++k) {
    const Complex z(u(gen), u(gen));
    const Complex a = reduce(skew, z);
    const auto [s, t] = skew.coords(a);
    CHECK(s >= 0.0);
    CHECK(s < 1.0);
    CHECK(t >= 0.0);
    CHECK(t < 1.0);
    CHECK(reduce(skew, a) == a);
    const auto [ds, dt] = skew.coords(z - a);
    CHECK(std::abs(ds - std::round(ds)) < 1e-9);
    CHECK(std::abs(dt - std::round(dt)) < 1e-9);
  }
}

TEST_CASE("product towers") {
  const Tower t = make_product_tower(kRootPi, 2, 3);
  REQUIRE(t.depth() == 3);
  CHECK(t.d0() == 1);
  const double want_tau[] = {kRootPi, 2 * kRootPi, 4 * kRootPi};
  const std::int64_t want_index[] = {1, 4, 16};
  for (int j = 0; j < 3; ++j) {
    CHECK(t.level(j).tau == doctest::Approx(want_tau[j]));
    CHECK(t.level(j).index == want_index[j]);
    CHECK(t.level(j).coset_reps.size() == static_cast<std::size_t>(want_index[j]));
  }
  for (int j = 0; j + 1 < 3; ++j) CHECK(t.level(j + 1).tau >= 2.0 * t.level(j).tau - 1e-12);

  const Tower t2 = make_product_tower(std::sqrt(2 * std::numbers::pi), 2, 1);
  CHECK(t2.d0() == 2);
  CHECK(t2.level(0).tau == doctest::Approx(std::sqrt(2 * std::numbers::pi)));

  const Tower t3 = make_product_tower(kRootPi, 3, 2);
  CHECK(t3.level(1).index == 9);
  CHECK(t3.level(1).tau == doctest::Approx(brute_shortest(t3.level(1).lattice, 3)));
  CHECK(t3.level(1).tau == doctest::Approx(3 * kRootPi));
}

TEST_CASE("tower errors") {
  CHECK_THROWS_AS(make_product_tower(1.0, 2, 2), QuantizationError);
  CHECK_THROWS_AS(make_product_tower(kRootPi, 2, 0), DepthError);
  CHECK_THROWS_AS(make_product_tower(kRootPi, 1, 2), LatticeError);
  const Tower t = make_product_tower(kRootPi, 2, 2);
  CHECK_THROWS_AS(t.level(2), LevelOutOfRange);
  CHECK_THROWS_AS(coset_reps(t, -1), LevelOutOfRange);
  CHECK_THROWS_AS(Tower(Lattice({kRootPi, 0}, {0, kRootPi}), {IntMat2{1, 0, 0, 1}}), LatticeError);
}

TEST_CASE("coset representatives") {
  const Tower t = make_product_tower(kRootPi, 2, 2);
  const auto& r0 = coset_reps(t, 0);
  REQUIRE(r0.size() == 1);
  CHECK(r0[0] == Complex(0, 0));
  auto r1 = coset_reps(t, 1);
  const Complex a(kRootPi, 0), ia(0, kRootPi);
  for (Complex want : {Complex(0, 0), a, ia, a + ia}) {
    CHECK(std::any_of(r1.begin(), r1.end(), [&](Complex c) { return std::abs(c - want) < 1e-12; }));
  }
  const Tower t3 = make_product_tower(kRootPi, 3, 2);
  const auto& r3 = coset_reps(t3, 1);
  REQUIRE(r3.size() == 9);
  const Lattice& l1 = t3.level(1).lattice;
  for (std::size_t i = 0; i < r3.size(); ++i) {
    const auto [s, u] = l1.coords(r3[i]);
    CHECK(s >= 0.0);
    CHECK(s < 1.0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    for (std::size_t k = 0; k < i; ++k) {
      const auto [ds, dt] = l1.coords(r3[i] - r3[k]);
      const bool congruent = std::abs(ds - std::round(ds)) < 1e-9 && std::abs(dt - std::round(dt)) < 1e-9;
      CHECK_FALSE(congruent);
    }
  }
}

TEST_CASE("explicit matrix towers") {
  // Index-2 then index-3 steps with a shear.
  const Lattice base({kRootPi, 0}, {0, kRootPi});
  const Tower t(base, {IntMat2{2, 0, 0, 1}, IntMat2{1, 1, 0, 3}});
  REQUIRE(t.depth() == 3);
  CHECK(t.level(1).index == 2);
  CHECK(t.level(2).index == 6);
  CHECK(t.level(2).coset_reps.size() == 6);
  for (int j = 1; j < 3; ++j) {
    CHECK(t.level(j).tau >= t.level(j - 1).tau - 1e-12);
    CHECK(t.level(j).tau == doctest::Approx(brute_shortest(t.level(j).lattice, 12)));
  }
}
