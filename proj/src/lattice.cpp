// SPDX-License-Identifier: Apache-2.0
#include "covertower/lattice.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <tuple>

#include "covertower/errors.hpp"

namespace covertower {

Lattice::Lattice(Complex g1, Complex g2) : g1_(g1), g2_(g2), area_(std::imag(std::conj(g1) * g2)) {
  if (!(area_ > 0.0) || !std::isfinite(area_)) {
    throw LatticeError("basis must be positively oriented with finite area");
  }
}

double shortest_vector(const Lattice& lat) {
  Complex u = lat.g1();
  Complex v = lat.g2();
  for (int iter = 0; iter < 200; ++iter) {
    if (std::norm(u) > std::norm(v)) std::swap(u, v);
    const double mu = std::round(std::real(v * std::conj(u)) / std::norm(u));
    if (mu == 0.0) break;
    v -= mu * u;
  }
  // Reduced basis: |Re<u,v>| <= |u|^2/2 and |u| <= |v|, so u is shortest.
  return std::min(std::abs(u), std::abs(v));
}

std::vector<Complex> points_in_disk(const Lattice& lat, Complex center, double radius) {
  struct Hit {
    double dist2;
    std::int64_t m, n;
    Complex gamma;
  };
  std::vector<Hit> hits;
  lat.for_each_point_in_disk(center, radius, [&](Complex gamma, std::int64_t m, std::int64_t n) {
    hits.push_back({std::norm(gamma - center), m, n, gamma});
  });
  std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
    return std::tie(x.dist2, x.n, x.m) < std::tie(y.dist2, y.n, y.m);
  });
  std::vector<Complex> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.gamma);
  return out;
}

Complex reduce(const Lattice& lat, Complex z) {
  auto [s, t] = lat.coords(z);
  Complex r = z - std::floor(s) * lat.g1() - std::floor(t) * lat.g2();
  // Rounding can leave a coordinate at -eps or exactly 1; one correction pass.
  auto [s1, t1] = lat.coords(r);
  if (s1 < 0.0) r += lat.g1();
  else if (s1 >= 1.0) r -= lat.g1();
  if (t1 < 0.0) r += lat.g2();
  else if (t1 >= 1.0) r -= lat.g2();
  return r;
}

namespace {

Lattice apply(const Lattice& base, const IntMat2& m) {
  const Complex g1 = static_cast<double>(m.a) * base.g1() + static_cast<double>(m.c) * base.g2();
  const Complex g2 = static_cast<double>(m.b) * base.g1() + static_cast<double>(m.d) * base.g2();
  return Lattice(g1, g2);
}

// Points v of Z^2 (level-0 coordinates) with B^{-1} v in [0,1)^2, computed
// exactly via the adjugate: 0 <= adj(B) v < det(B) componentwise.
std::vector<Complex> enumerate_cosets(const Lattice& base, const IntMat2& B) {
  const std::int64_t det = B.det();
  const std::int64_t lo1 = std::min({std::int64_t{0}, B.a, B.b, B.a + B.b});
  const std::int64_t hi1 = std::max({std::int64_t{0}, B.a, B.b, B.a + B.b});
  const std::int64_t lo2 = std::min({std::int64_t{0}, B.c, B.d, B.c + B.d});
  const std::int64_t hi2 = std::max({std::int64_t{0}, B.c, B.d, B.c + B.d});
  std::vector<Complex> reps;
  for (std::int64_t v2 = lo2; v2 <= hi2; ++v2) {
    for (std::int64_t v1 = lo1; v1 <= hi1; ++v1) {
      const std::int64_t u1 = B.d * v1 - B.b * v2;
      const std::int64_t u2 = -B.c * v1 + B.a * v2;
      if (u1 >= 0 && u1 < det && u2 >= 0 && u2 < det) {
        reps.push_back(static_cast<double>(v1) * base.g1() + static_cast<double>(v2) * base.g2());
      }
    }
  }
  return reps;
}

}  // namespace

Tower::Tower(const Lattice& base, const std::vector<IntMat2>& steps) {
  const double d0 = base.area() / std::numbers::pi;
  const double d0r = std::round(d0);
  if (d0r < 1.0 || std::abs(d0 - d0r) > 1e-9 * std::max(1.0, d0)) {
    throw QuantizationError("area/pi = " + std::to_string(d0) + " is not a positive integer");
  }
  d0_ = static_cast<int>(d0r);

  IntMat2 cumulative{};
  for (int j = 0; j <= static_cast<int>(steps.size()); ++j) {
    if (j > 0) {
      const IntMat2& step = steps[static_cast<std::size_t>(j - 1)];
      if (step.det() < 2) {
        throw LatticeError("sublattice step " + std::to_string(j) +
                           " must have determinant >= 2 (got " + std::to_string(step.det()) + ")");
      }
      cumulative = cumulative * step;
    }
    TowerLevel lv{j, apply(base, cumulative), cumulative.det(), 0.0, cumulative, {}};
    lv.tau = shortest_vector(lv.lattice);
    lv.coset_reps = enumerate_cosets(base, cumulative);
    levels_.push_back(std::move(lv));
  }
}

const TowerLevel& Tower::level(int j) const {
  if (j < 0 || j >= depth()) {
    throw LevelOutOfRange("level " + std::to_string(j) + " outside [0, " + std::to_string(depth()) + ")");
  }
  return levels_[static_cast<std::size_t>(j)];
}

Tower make_product_tower(double scale, int ratio, int depth) {
  if (depth < 1) throw DepthError("depth must be >= 1 (got " + std::to_string(depth) + ")");
  if (ratio < 2) throw LatticeError("ratio must be >= 2");
  if (!(scale > 0.0)) throw QuantizationError("scale must be positive");
  const Lattice base(Complex(scale, 0.0), Complex(0.0, scale));
  const std::vector<IntMat2> steps(static_cast<std::size_t>(depth - 1), IntMat2{ratio, 0, 0, ratio});
  return Tower(base, steps);
}

const std::vector<Complex>& coset_reps(const Tower& tower, int j) { return tower.level(j).coset_reps; }

}  // namespace covertower
