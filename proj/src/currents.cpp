// SPDX-License-Identifier: Apache-2.0
#include "covertower/currents.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "covertower/errors.hpp"
#include "covertower/quadrature.hpp"
#include "covertower/rng.hpp"

namespace covertower {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<Complex, 2> dual_basis(const Lattice& base) {
  // Solve Re(conj(h_k) g_l) = delta_kl.
  const double x1 = base.g1().real(), y1 = base.g1().imag();
  const double x2 = base.g2().real(), y2 = base.g2().imag();
  const double det = x1 * y2 - x2 * y1;
  return {Complex(y2 / det, -x2 / det), Complex(-y1 / det, x1 / det)};
}

double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Sum x^n/n^2 for n >= 1 with compensated accumulation; x in [0, 1/2].
double dilog_series(double x) {
  double sum = 0.0, comp = 0.0, power = 1.0;
  for (int n = 1; n < 200; ++n) {
    power *= x;
    const double term = power / (static_cast<double>(n) * n);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

}  // namespace

TestForm::TestForm(const Lattice& base, std::string id, std::vector<FormTerm> terms)
    : base_(base), id_(std::move(id)), terms_(std::move(terms)) {
  const auto h = dual_basis(base_);
  freqs_.reserve(terms_.size());
  for (const auto& t : terms_) freqs_.push_back(static_cast<double>(t.m1) * h[0] + static_cast<double>(t.m2) * h[1]);
}

TestForm TestForm::from_modes(const Lattice& base, std::string id, const std::vector<Mode>& modes) {
  std::vector<FormTerm> terms;
  for (const auto& md : modes) {
    const double a = dot(md.lambda, base.g1());
    const double b = dot(md.lambda, base.g2());
    if (std::abs(a - std::round(a)) > 1e-9 || std::abs(b - std::round(b)) > 1e-9) {
      throw DomainError("frequency is not in the dual lattice of Gamma_0");
    }
    terms.push_back({static_cast<int>(std::lround(a)), static_cast<int>(std::lround(b)), md.amp, md.phase});
  }
  return TestForm(base, std::move(id), std::move(terms));
}

std::vector<std::string> TestForm::preset_ids() { return {"const", "psi1", "psi2", "psi3", "mixed"}; }

TestForm TestForm::preset(const Lattice& base, const std::string& id) {
  if (id == "const") return TestForm(base, id, {{0, 0, 1.0, 0.0}});
  if (id == "psi1") return TestForm(base, id, {{1, 0, 1.0, 0.0}});
  if (id == "psi2") return TestForm(base, id, {{0, 1, 1.0, 0.5}});
  if (id == "psi3") return TestForm(base, id, {{1, 1, 1.0, 0.0}});
  if (id == "mixed") return TestForm(base, id, {{1, 0, 0.6, 0.3}, {1, -1, 0.4, 1.1}, {0, 2, 0.25, 0.0}});
  throw DomainError("unknown test-form preset '" + id + "'");
}

double TestForm::value(Complex z) const {
  double v = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    v += terms_[k].amp * std::cos(2.0 * kPi * dot(freqs_[k], z) + terms_[k].phase);
  }
  return v;
}

double TestForm::laplacian(Complex z) const {
  double v = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const double scale = -4.0 * kPi * kPi * std::norm(freqs_[k]);
    v += scale * terms_[k].amp * std::cos(2.0 * kPi * dot(freqs_[k], z) + terms_[k].phase);
  }
  return v;
}

bool TestForm::harmonic() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const FormTerm& t) { return (t.m1 == 0 && t.m2 == 0) || t.amp == 0.0; });
}

double TestForm::limit_pairing(int N) const {
  double mean = 0.0;
  for (const auto& t : terms_) {
    if (t.m1 == 0 && t.m2 == 0) mean += t.amp * std::cos(t.phase);
  }
  return static_cast<double>(N) / kPi * base_.area() * mean;
}

double TestForm::ddbar_l1(double rtol) const {
  // Nested adaptive rule in cell coordinates; the absolute value has kinks a fixed mesh resolves only to O(h^2).
  using boost::math::quadrature::gauss_kronrod;
  auto row = [&](double s) {
    auto f = [&](double t) { return std::abs(ddbar_density(base_.point(s, t))); };
    return gauss_kronrod<double, 21>::integrate(f, 0.0, 1.0, 12, rtol);
  };
  return gauss_kronrod<double, 21>::integrate(row, 0.0, 1.0, 12, rtol) * base_.area();
}

double pair_current(const ZeroSet& zs, const Tower& tower, const TestForm& psi) {
  const auto pushed = pushforward_zeros(zs, tower);
  std::vector<double> vals;
  vals.reserve(pushed.size());
  for (const auto& z : pushed) vals.push_back(z.multiplicity * psi.value(z.point));
  return pairwise_sum(vals) / static_cast<double>(tower.level(zs.level).index);
}

double expected_pairing_theory(const Tower& tower, const BundleParams& p, int j, const TestForm& psi, int grid,
                               const TruncationPolicy& trunc) {
  const QuotientKernel k(tower, p, j, trunc);
  const double integral = integrate<double>(CellGrid::of(tower.base(), grid, grid),
                                            [&](Complex z) { return psi.value(z) * k.metric_density(z).value; });
  return integral / kPi;
}

double gtilde(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("gtilde needs t in [0, 1]");
  const double x = t * t;
  double li2;
  if (x <= 0.5) {
    li2 = dilog_series(x);
  } else if (x == 1.0) {
    return 1.0 / 24.0;
  } else {
    // Reflection Li2(x) = pi^2/6 - log(x) log(1-x) - Li2(1-x) keeps the series ratio <= 1/2.
    li2 = kPi * kPi / 6.0 - std::log(x) * std::log1p(-x) - dilog_series(1.0 - x);
  }
  return li2 / (4.0 * kPi * kPi);
}

double gtilde_integral(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("gtilde needs t in [0, 1]");
  const double x = t * t;
  if (x == 0.0) return 0.0;
  // s = 1 - e^{-u} turns -log(1-s)/s ds into u/(e^u - 1) du on [0, -log(1-x)].
  const double upper = x >= 1.0 ? 60.0 : -std::log1p(-x);
  auto f = [](double u) { return u < 1e-8 ? 1.0 - 0.5 * u : u / std::expm1(u); };
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double v = gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 15, 1e-13, &err);
  return v / (4.0 * kPi * kPi);
}

namespace {

double variance_on_grid(const QuotientKernel& k, const TowerLevel& lv, const Lattice& base, const TestForm& psi,
                        int grid) {
  const CellGrid cell = CellGrid::of(base, grid, grid);
  const std::size_t n = cell.size();
  std::vector<Complex> nodes(n);
  std::vector<double> f(n), diag(n);
  for (std::size_t a = 0; a < n; ++a) {
    nodes[a] = cell.node(a);
    f[a] = psi.ddbar_density(nodes[a]);
    diag[a] = k.diagonal(nodes[a]);  // Gamma_0-periodic, so valid at every coset translate
    if (diag[a] < 1e-300) throw BaseLocusError("diagonal vanishes on the quadrature grid");
  }
  const auto& reps = lv.coset_reps;
  const double inv_index = 1.0 / static_cast<double>(lv.index);
  std::vector<double> outer(n, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t a = 0; a < n; ++a) {
    if (f[a] == 0.0) continue;
    std::vector<double> inner(n), per_rep(reps.size());
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t r = 0; r < reps.size(); ++r) {
        const double P = k.wmag(nodes[a] + reps[r], nodes[b]) / std::sqrt(diag[a] * diag[b]);
        per_rep[r] = gtilde(std::min(P, 1.0));
      }
      inner[b] = f[b] * pairwise_sum(per_rep) * inv_index;
    }
    outer[a] = f[a] * pairwise_sum(inner);
  }
  const double w = cell.weight();
  return pairwise_sum(outer) * w * w;
}

}  // namespace

VarianceTheory variance_theory(const Tower& tower, const BundleParams& p, int j, const TestForm& psi, int grid,
                               const TruncationPolicy& trunc, double budget) {
  if (grid < 8) throw DomainError("variance quadrature needs grid >= 8");
  VarianceTheory out;
  if (psi.harmonic()) return out;
  const QuotientKernel k(tower, p, j, trunc);
  const TowerLevel& lv = tower.level(j);
  const double g = static_cast<double>(grid);
  const double cost = g * g * g * g * static_cast<double>(lv.index);
  if (cost <= budget) {
    out.value = variance_on_grid(k, lv, tower.base(), psi, grid);
    out.coarse = variance_on_grid(k, lv, tower.base(), psi, std::max(4, grid / 2));
    out.quad_error = std::abs(out.value - out.coarse);
  } else {
    // Monte Carlo over (z, w, coset) triples within the budget.
    const Lattice& base = tower.base();
    const auto samples = static_cast<std::size_t>(std::max(1000.0, budget));
    StreamRng rng(0x5eed5eedULL, 0xC0DEu, static_cast<std::uint64_t>(j));
    std::vector<double> vals(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      const Complex z = base.point(rng.uniform(), rng.uniform());
      const Complex w = base.point(rng.uniform(), rng.uniform());
      const auto r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(lv.index));
      const double P = k.wmag(z + lv.coset_reps[std::min(r, lv.coset_reps.size() - 1)], w) /
                       std::sqrt(k.diagonal(z) * k.diagonal(w));
      vals[i] = psi.ddbar_density(z) * psi.ddbar_density(w) * gtilde(std::min(P, 1.0));
    }
    const double area2 = base.area() * base.area();
    const double mean = pairwise_sum(vals) / static_cast<double>(samples);
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    out.value = area2 * mean;
    out.coarse = out.value;
    out.quad_error = area2 * std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples));
    out.monte_carlo = true;
  }
  if (out.value < -1e-12) throw DomainError("variance quadrature returned a negative value");
  out.value = std::max(out.value, 0.0);
  return out;
}

double variance_paper_bound(const Tower& tower, int j, const TestForm& psi, double c_hat) {
  if (!(c_hat > 0.0)) throw DomainError("c_hat must be positive");
  const double tau = tower.level(j / 2).tau;
  const double l1 = psi.ddbar_l1();
  return (std::exp(-c_hat * tau) + std::pow(2.0, -0.5 * j)) * l1 * l1;
}

PairingStats summarize(const std::vector<double>& xs, std::uint64_t seed, std::uint32_t stream, int bootstrap) {
  PairingStats st;
  const auto n = xs.size();
  st.samples = static_cast<int>(n);
  if (n < 2) throw DomainError("need at least 2 samples");
  const auto variance_of = [](const std::vector<double>& v) {
    const double m = pairwise_sum(v) / static_cast<double>(v.size());
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
    return std::pair{m, pairwise_sum(sq) / static_cast<double>(v.size() - 1)};
  };
  const auto [m, v] = variance_of(xs);
  st.mean = m;
  st.var = v;
  st.stderr_mean = std::sqrt(v / static_cast<double>(n));
  if (bootstrap >= 2) {
    StreamRng rng(seed, stream, 0xB0075ULL);
    std::vector<double> vars(static_cast<std::size_t>(bootstrap)), re(n);
    for (auto& bv : vars) {
      for (auto& r : re) r = xs[std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)))];
      bv = variance_of(re).second;
    }
    st.var_stderr = std::sqrt(variance_of(vars).second);
  }
  return st;
}

EmpiricalRun empirical_stats(const Tower& tower, const BundleParams& p, int j, const std::vector<TestForm>& forms,
                             const SamplingPlan& plan, const TruncationPolicy& trunc) {
  if (plan.n_samples < 2) throw DomainError("n_samples must be >= 2");
  const auto frame = build_frame(tower, p, j, trunc);
  const auto n = static_cast<std::size_t>(plan.n_samples);
  EmpiricalRun run;
  run.level = j;
  for (const auto& f : forms) run.psi_ids.push_back(f.id());
  run.pairings.assign(n, std::vector<double>(forms.size(), 0.0));
  run.ok.assign(n, 0);
  if (plan.keep_zeros && plan.mode == SamplingMode::Sphere) run.zero_sets.resize(n);
  if (plan.keep_samples && plan.mode == SamplingMode::Sphere) run.coefs.resize(n);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng(plan.master_seed, plan.stream, i);
    try {
      if (plan.mode == SamplingMode::Sphere) {
        const Section s = sample_sphere(frame, rng);
        if (plan.keep_samples) run.coefs[i] = s.coef;
        ZeroSet zs = locate_zeros(s);
        for (std::size_t f = 0; f < forms.size(); ++f) run.pairings[i][f] = pair_current(zs, tower, forms[f]);
        if (plan.keep_zeros) run.zero_sets[i] = std::move(zs);
      } else {
        const auto basis = sample_onb(frame, rng);
        std::vector<std::vector<double>> per(forms.size(), std::vector<double>(basis.size()));
        for (std::size_t k = 0; k < basis.size(); ++k) {
          const ZeroSet zs = locate_zeros(basis[k]);
          for (std::size_t f = 0; f < forms.size(); ++f) per[f][k] = pair_current(zs, tower, forms[f]);
        }
        for (std::size_t f = 0; f < forms.size(); ++f) {
          run.pairings[i][f] = pairwise_sum(per[f]) / static_cast<double>(basis.size());
        }
      }
      run.ok[i] = 1;
    } catch (const Error&) {
      run.ok[i] = 0;
    }
  }

  for (auto flag : run.ok) run.failures += flag ? 0 : 1;
  if (run.failures * 100 > plan.n_samples) {
    throw SamplingFailure(std::to_string(run.failures) + " of " + std::to_string(plan.n_samples) +
                          " samples failed at level " + std::to_string(j));
  }
  for (std::size_t f = 0; f < forms.size(); ++f) {
    std::vector<double> col;
    col.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (run.ok[i]) col.push_back(run.pairings[i][f]);
    }
    PairingStats st = summarize(col, plan.master_seed, plan.stream + static_cast<std::uint32_t>(f), plan.bootstrap);
    st.psi_id = forms[f].id();
    run.stats.push_back(std::move(st));
  }
  return run;
}

}  // namespace covertower
