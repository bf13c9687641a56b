// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "covertower/currents.hpp"
#include "covertower/errors.hpp"
#include "covertower/quadrature.hpp"

using namespace covertower;

namespace {

const double kPi = std::numbers::pi;
const double kRootPi = std::sqrt(kPi);

// -(1/4 pi^2) int_0^{t^2} log(1-s)/s ds by tanh-sinh.
double gtilde_oracle(double t) {
  if (t == 0.0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> q;
  const double v = q.integrate([](double s) { return s < 1e-12 ? 1.0 : -std::log1p(-s) / s; }, 0.0, t * t);
  return v / (4 * kPi * kPi);
}

struct Fixture {
  Tower tower = make_product_tower(kRootPi, 2, 4);
  BundleParams p = BundleParams::make(2, 1);
};

}  // namespace

TEST_CASE("Gtilde values") {
  CHECK(gtilde(0.0) == 0.0);
  CHECK(std::abs(gtilde(1.0) - 1.0 / 24) <= 1e-15);
  // Li2(1/4) / (4 pi^2), 32 digits from an arbitrary-precision evaluation.
  CHECK(gtilde(0.5) == doctest::Approx(0.00677972054921447557880028699426).epsilon(1e-15));
  CHECK_THROWS_AS(gtilde(-0.1), DomainError);
  CHECK_THROWS_AS(gtilde(1.1), DomainError);
  CHECK_THROWS_AS(gtilde_integral(1.5), DomainError);
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    const double g = gtilde(t);
    CHECK(g <= t * t / 24);
    CHECK(g >= prev);
    prev = g;
    CHECK(std::abs(g - gtilde_integral(t)) <= 1e-10);
    if (i % 50 == 0) CHECK(std::abs(g - gtilde_oracle(t)) <= 1e-12);
  }
}

TEST_CASE_FIXTURE(Fixture, "test forms") {
  for (const auto& id : TestForm::preset_ids()) {
    const TestForm psi = TestForm::preset(tower.base(), id);
    CHECK(psi.id() == id);
    const double mean_lap = integrate<double>(CellGrid::of(tower.base(), 32, 32), [&](Complex z) { return psi.laplacian(z); });
    CHECK(std::abs(mean_lap) <= 1e-10);
    for (const Complex z : {Complex(0.3, 0.1), Complex(-1.2, 2.7)}) {
      CHECK(psi.value(z + tower.base().g1()) == doctest::Approx(psi.value(z)).epsilon(1e-12));
      CHECK(psi.value(z - tower.base().g2()) == doctest::Approx(psi.value(z)).epsilon(1e-12));
      const double h = 1e-4;
      const double fd = (psi.value(z + h) + psi.value(z - h) + psi.value(z + Complex(0, h)) + psi.value(z - Complex(0, h)) -
                         4 * psi.value(z)) / (h * h);
      CHECK(std::abs(fd - psi.laplacian(z)) <= 1e-4 * std::max(1.0, std::abs(fd)));
      CHECK(psi.ddbar_density(z) == 0.5 * psi.laplacian(z));
    }
  }
  CHECK(TestForm::preset(tower.base(), "const").harmonic());
  CHECK_FALSE(TestForm::preset(tower.base(), "psi1").harmonic());
  CHECK_THROWS_AS(TestForm::preset(tower.base(), "nope"), DomainError);
  CHECK_THROWS_AS(TestForm::from_modes(tower.base(), "x", {{Complex(0.3, 0.0)}}), DomainError);
  const TestForm dual = TestForm::from_modes(tower.base(), "x", {{Complex(1.0 / kRootPi, 0.0)}});
  CHECK(dual.terms()[0].m1 == 1);
  CHECK(dual.terms()[0].m2 == 0);
  CHECK(TestForm::preset(tower.base(), "const").limit_pairing(2) == doctest::Approx(2.0));
  CHECK(TestForm::preset(tower.base(), "psi1").limit_pairing(2) == 0.0);
  CHECK(TestForm::preset(tower.base(), "psi1").ddbar_l1() == doctest::Approx(4.0 * kPi).epsilon(1e-6));
}

TEST_CASE_FIXTURE(Fixture, "pairing with zero currents") {
  const TestForm one = TestForm::preset(tower.base(), "const");
  const TestForm psi = TestForm::preset(tower.base(), "mixed");
  ZeroSet single;
  single.level = 0;
  single.zeros = {{Complex(0.4, 1.1), 1}};
  single.total = 1;
  CHECK(pair_current(single, tower, psi) == doctest::Approx(psi.value({0.4, 1.1})));
  for (int j = 0; j < 3; ++j) {
    const auto f = build_frame(tower, p, j);
    StreamRng rng(1, 0, static_cast<std::uint64_t>(j));
    const ZeroSet zs = locate_zeros(sample_sphere(f, rng));
    CHECK(pair_current(zs, tower, one) == 2.0);
  }
}

TEST_CASE_FIXTURE(Fixture, "expected pairing") {
  const TestForm one = TestForm::preset(tower.base(), "const");
  for (int j = 0; j < 3; ++j) CHECK(expected_pairing_theory(tower, p, j, one, 64) == doctest::Approx(2.0).epsilon(1e-10));
  const TestForm psi = TestForm::preset(tower.base(), "psi1");
  CHECK(std::abs(expected_pairing_theory(tower, p, 3, psi, 64)) <= 1e-12);
}

TEST_CASE_FIXTURE(Fixture, "variance quadrature") {
  const TestForm one = TestForm::preset(tower.base(), "const");
  CHECK(variance_theory(tower, p, 0, one, 16).value == 0.0);
  CHECK_THROWS_AS(variance_theory(tower, p, 0, one, 4), DomainError);
  const TestForm psi = TestForm::preset(tower.base(), "psi1");
  const TestForm twice(tower.base(), "2psi1", {{1, 0, 2.0, 0.0}});
  const VarianceTheory v0 = variance_theory(tower, p, 0, psi, 16);
  CHECK(v0.value > 0.0);
  CHECK(v0.quad_error < 1e-2 * v0.value);
  CHECK(variance_theory(tower, p, 0, twice, 16).value == doctest::Approx(4 * v0.value).epsilon(1e-12));
  double prev = v0.value;
  for (int j = 1; j < 4; ++j) {
    const double v = variance_theory(tower, p, j, psi, 12).value;
    CHECK(v < prev);
    prev = v;
  }
  // Monte Carlo fallback agrees with the tensor rule.
  const VarianceTheory mc = variance_theory(tower, p, 1, psi, 16, {}, 2e5);
  CHECK(mc.monte_carlo);
  const VarianceTheory grid = variance_theory(tower, p, 1, psi, 16);
  CHECK(std::abs(mc.value - grid.value) <= 4 * mc.quad_error + grid.quad_error);
}

TEST_CASE_FIXTURE(Fixture, "bound of the variance theorem") {
  const TestForm psi = TestForm::preset(tower.base(), "psi3");
  CHECK(variance_paper_bound(tower, 0, TestForm::preset(tower.base(), "const"), 1.0) == 0.0);
  CHECK_THROWS_AS(variance_paper_bound(tower, 0, psi, 0.0), DomainError);
  const double l1 = psi.ddbar_l1();
  CHECK(variance_paper_bound(tower, 3, psi, 1.0) ==
        doctest::Approx((std::exp(-tower.level(1).tau) + std::pow(2.0, -1.5)) * l1 * l1));
  const Tower deep = make_product_tower(kRootPi, 2, 12);
  CHECK(variance_paper_bound(deep, 11, psi, 1.0) < 0.03 * variance_paper_bound(deep, 0, psi, 1.0));
}

TEST_CASE("summary statistics") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const PairingStats s = summarize(xs, 1, 0, 200);
  CHECK(s.mean == 2.5);
  CHECK(s.var == doctest::Approx(5.0 / 3));
  CHECK(s.stderr_mean == doctest::Approx(std::sqrt(5.0 / 12)));
  CHECK(s.var_stderr > 0.0);
  CHECK(s.samples == 4);
  CHECK_THROWS_AS(summarize({1.0}, 1, 0, 0), DomainError);
}

TEST_CASE_FIXTURE(Fixture, "empirical statistics") {
  const std::vector<TestForm> forms{TestForm::preset(tower.base(), "const"), TestForm::preset(tower.base(), "psi1")};
  SamplingPlan plan;
  plan.n_samples = 200;
  plan.master_seed = 77;
  const EmpiricalRun a = empirical_stats(tower, p, 0, forms, plan);
  const EmpiricalRun b = empirical_stats(tower, p, 0, forms, plan);
  CHECK(a.failures == 0);
  CHECK(a.stats[0].mean == 2.0);
  CHECK(a.stats[0].var == 0.0);
  CHECK(a.pairings == b.pairings);
  CHECK(a.stats[1].var > 0.0);
  plan.mode = SamplingMode::Onb;
  plan.n_samples = 20;
  const EmpiricalRun onb = empirical_stats(tower, p, 1, forms, plan);
  CHECK(onb.stats[0].mean == 2.0);
  // Basis averages concentrate far more than single sections.
  CHECK(onb.stats[1].var < a.stats[1].var);
  plan.n_samples = 1;
  CHECK_THROWS_AS(empirical_stats(tower, p, 0, forms, plan), DomainError);
}
