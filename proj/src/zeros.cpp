// SPDX-License-Identifier: Apache-2.0
#include "covertower/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

#include "covertower/errors.hpp"

namespace covertower {

std::array<double, 2> Cell::coords(Complex z) const {
  const double area = std::imag(std::conj(e1) * e2);
  const Complex r = z - origin;
  return {std::imag(std::conj(r) * e2) / area, std::imag(std::conj(e1) * r) / area};
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxDepth = 48;

struct BoundaryHit {};

// Argument increment along the boundary, tracked segment by segment. Each
// accepted segment has small wrapped increments whose sum agrees with the
// Simpson estimate of Im int s'/s dz; the wrapped sum around the loop is an
// exact multiple of 2 pi and the Simpson sum certifies it.
class WindingIntegrator {
 public:
  WindingIntegrator(const Section& s, double guard) : s_(s), guard_(guard) {}

  void edge(Complex a, Complex b) {
    const auto va = eval(a);
    const auto vb = eval(b);
    segment(a, b, va, vb, 0);
  }
  double wrapped() const { return wrapped_; }
  double quadrature() const { return quad_; }

 private:
  CoherentFrame::Value eval(Complex z) {
    const auto v = s_.evaluate(z);
    if (!(std::abs(v.value) > guard_)) throw BoundaryHit{};
    return v;
  }

  void segment(Complex a, Complex b, const CoherentFrame::Value& va, const CoherentFrame::Value& vb, int depth) {
    const Complex m = 0.5 * (a + b);
    const auto vm = eval(m);
    const double d1 = std::arg(vm.value / va.value);
    const double d2 = std::arg(vb.value / vm.value);
    const Complex simpson =
        (b - a) / 6.0 * (va.deriv / va.value + 4.0 * vm.deriv / vm.value + vb.deriv / vb.value);
    // Three samples can alias a full turn on a long segment, so its length must
    // also stay below the Newton distance |s / s'| at every sample.
    const double len = std::abs(b - a);
    const bool local = len * std::abs(va.deriv) <= std::abs(va.value) && len * std::abs(vm.deriv) <= std::abs(vm.value) &&
                       len * std::abs(vb.deriv) <= std::abs(vb.value);
    const bool ok =
        local && std::abs(d1) <= 0.5 && std::abs(d2) <= 0.5 && std::abs(d1 + d2 - simpson.imag()) <= 0.02;
    if (ok) {
      wrapped_ += d1 + d2;
      quad_ += simpson.imag();
      return;
    }
    if (depth >= kMaxDepth) throw BoundaryHit{};
    segment(a, m, va, vm, depth + 1);
    segment(m, b, vm, vb, depth + 1);
  }

  const Section& s_;
  double guard_;
  double wrapped_ = 0.0;
  double quad_ = 0.0;
};

double guard_level(const Section& s, const ZeroOptions& opt) {
  const double area = s.frame->lattice().area();
  return opt.guard * s.norm / std::sqrt(area);
}

// Throws BoundaryHit when a zero sits on (or numerically near) the boundary.
int winding_once(const Section& s, const Cell& c, const ZeroOptions& opt) {
  WindingIntegrator w(s, guard_level(s, opt));
  const Complex p0 = c.origin, p1 = c.origin + c.e1, p2 = c.origin + c.e1 + c.e2, p3 = c.origin + c.e2;
  w.edge(p0, p1);
  w.edge(p1, p2);
  w.edge(p2, p3);
  w.edge(p3, p0);
  const double turns = w.wrapped() / kTwoPi;
  const double k = std::round(turns);
  if (std::abs(turns - k) > 1e-6 || std::abs(w.quadrature() / kTwoPi - k) > opt.snap) {
    throw NonIntegerWinding("winding " + std::to_string(turns) + " (quadrature " +
                            std::to_string(w.quadrature() / kTwoPi) + ")");
  }
  return static_cast<int>(k);
}

struct Refined {
  bool ok = false;
  Complex z{};
};

Refined newton(const Section& s, const Cell& cell, const ZeroOptions& opt) {
  Complex z = cell.center();
  const double scale = cell.size();
  for (int it = 0; it < 60; ++it) {
    const auto v = s.evaluate(z);
    if (std::abs(v.value) <= opt.tol) {
      const auto [u, t] = cell.coords(z);
      constexpr double eps = 1e-9;
      const bool inside = u >= -eps && u <= 1.0 + eps && t >= -eps && t <= 1.0 + eps;
      return {inside, z};
    }
    if (std::abs(v.deriv) == 0.0) return {};
    const Complex step = v.value / v.deriv;
    if (std::abs(step) > 2.0 * scale) return {};
    z -= step;
  }
  return {};
}

std::array<Cell, 4> split(const Cell& c, double fs, double ft) {
  const Complex a = fs * c.e1, b = (1.0 - fs) * c.e1;
  const Complex p = ft * c.e2, q = (1.0 - ft) * c.e2;
  return {Cell{c.origin, a, p}, Cell{c.origin + a, b, p}, Cell{c.origin + p, a, q}, Cell{c.origin + a + p, b, q}};
}

}  // namespace

int winding_count(const Section& s, const Cell& cell, const ZeroOptions& opt) {
  Cell c = cell;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    try {
      return winding_once(s, c, opt);
    } catch (const BoundaryHit&) {
      c = c.dilated(1.0 + 1e-4);
    }
  }
  throw BoundaryZeroError("zero on the cell boundary after 5 dilations");
}

ZeroSet locate_zeros(const Section& s, const ZeroOptions& opt) {
  const Lattice& lat = s.frame->lattice();
  const double tau = s.frame->kernel().tau();
  const int degree = s.frame->dim();
  const double min_size = opt.min_cell * tau;

  // A translate of F_j is still a fundamental domain, so shifting (rather
  // than dilating) keeps the root count equal to the degree.
  Cell root;
  int root_count = -1;
  for (int k = 0; k < 8 && root_count < 0; ++k) {
    root = Cell::of(lat, static_cast<double>(k) * 1e-3 * tau * Complex(0.618034, 0.381966));
    try {
      root_count = winding_once(s, root, opt);
    } catch (const BoundaryHit&) {
    }
  }
  if (root_count < 0) throw BoundaryZeroError("zeros on every shifted fundamental domain boundary");
  if (root_count != degree) {
    throw ZeroCountMismatch("winding over F_j is " + std::to_string(root_count) + ", degree is " +
                            std::to_string(degree));
  }

  ZeroSet out;
  out.level = s.level();
  struct Item {
    Cell cell;
    int count;
  };
  std::deque<Item> queue{{root, root_count}};
  static constexpr double kSplits[] = {0.5, 0.47, 0.53, 0.44, 0.56, 0.41, 0.59};

  while (!queue.empty()) {
    const Item item = queue.front();
    queue.pop_front();
    if (item.count == 0) continue;
    const bool at_min = item.cell.size() <= min_size;
    if (item.count == 1) {
      const Refined r = newton(s, item.cell, opt);
      if (r.ok || at_min) {
        out.zeros.push_back({reduce(lat, r.ok ? r.z : item.cell.center()), 1});
        if (!r.ok) ++out.anomalies;
        continue;
      }
    } else if (at_min) {
      out.zeros.push_back({reduce(lat, item.cell.center()), item.count});
      ++out.anomalies;
      continue;
    }
    bool done = false;
    for (double f : kSplits) {
      const auto kids = split(item.cell, f, 1.0 - f);
      std::array<int, 4> counts{};
      try {
        for (std::size_t k = 0; k < 4; ++k) counts[k] = winding_once(s, kids[k], opt);
      } catch (const BoundaryHit&) {
        continue;
      } catch (const NonIntegerWinding&) {
        continue;
      }
      if (counts[0] + counts[1] + counts[2] + counts[3] != item.count) continue;
      for (std::size_t k = 0; k < 4; ++k) queue.push_back({kids[k], counts[k]});
      done = true;
      break;
    }
    if (!done) throw BoundaryZeroError("no subdivision of a cell avoids boundary zeros");
  }

  for (const auto& z : out.zeros) out.total += z.multiplicity;
  if (out.total != degree) {
    throw ZeroCountMismatch("located " + std::to_string(out.total) + " zeros, degree is " + std::to_string(degree));
  }
  return out;
}

std::vector<Zero> pushforward_zeros(const ZeroSet& zs, const Tower& tower) {
  std::vector<Zero> out;
  out.reserve(zs.zeros.size());
  for (const auto& z : zs.zeros) out.push_back({reduce(tower.base(), z.point), z.multiplicity});
  return out;
}

}  // namespace covertower
