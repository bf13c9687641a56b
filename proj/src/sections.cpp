// SPDX-License-Identifier: Apache-2.0
#include "covertower/sections.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "covertower/errors.hpp"

namespace covertower {

namespace {

constexpr double kMaxCond = 1e8;

std::vector<Complex> grid_centers(const Lattice& lat, int d) {
  int rows = 1;
  for (int r = 1; r * r <= d; ++r) {
    if (d % r == 0) rows = r;
  }
  const int cols = d / rows;
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(d));
  for (int l = 0; l < rows; ++l) {
    for (int k = 0; k < cols; ++k) {
      pts.push_back(lat.point((k + 0.5) / cols, (l + 0.5) / rows));
    }
  }
  return pts;
}

}  // namespace

CoherentFrame::CoherentFrame(const QuotientKernel& kernel, std::vector<Complex> points)
    : kernel_(kernel), points_(std::move(points)) {}

bool CoherentFrame::factorize() {
  const auto d = static_cast<Eigen::Index>(points_.size());
  gram_.resize(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m <= n; ++m) {
      // <e_m, e_n> = K_j(w_n, w_m) exp(-N(|w_n|^2 + |w_m|^2)/2)
      const Complex v = kernel_(points_[static_cast<std::size_t>(n)], points_[static_cast<std::size_t>(m)]).gauged;
      gram_(n, m) = v;
      gram_(m, n) = std::conj(v);
    }
    gram_(n, n) = gram_(n, n).real();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  cond_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond_ <= kMaxCond)) return false;
  const Eigen::LLT<Eigen::MatrixXcd> llt(gram_);
  if (llt.info() != Eigen::Success) return false;
  // W = L^{-*}: W^* G W = L^{-1} L L^* L^{-*} = I.
  whitener_ = llt.matrixU().solve(Eigen::MatrixXcd::Identity(d, d));
  return true;
}

std::shared_ptr<const CoherentFrame> CoherentFrame::build(const Tower& tower, const BundleParams& p, int j,
                                                          const TruncationPolicy& trunc) {
  const QuotientKernel kernel(tower, p, j, trunc);
  const TowerLevel& lv = tower.level(j);
  const long d = static_cast<long>(p.N) * tower.d0() * lv.index;
  if (d < 1) throw FrameDegenerate("empty section space");
  auto pts = grid_centers(lv.lattice, static_cast<int>(d));
  std::shared_ptr<CoherentFrame> frame(new CoherentFrame(kernel, pts));
  if (!frame->factorize()) {
    // Golden-angle jitter of 0.01 tau_j breaks the lattice symmetry that can
    // make a regular grid of centers a special divisor.
    const double amp = 0.01 * lv.tau;
    constexpr double kGolden = 2.39996322972865332;
    for (std::size_t m = 0; m < pts.size(); ++m) {
      const double a = kGolden * static_cast<double>(m + 1);
      pts[m] += amp * Complex(std::cos(a), std::sin(a));
    }
    frame.reset(new CoherentFrame(kernel, pts));
    frame->jittered_ = true;
    if (!frame->factorize()) {
      throw FrameDegenerate("gram condition number " + std::to_string(frame->cond_) + " exceeds 1e8 at level " +
                            std::to_string(j));
    }
  }
  frame->build_cloud();
  return frame;
}

void CoherentFrame::build_cloud() {
  const Lattice& lat = kernel_.lattice();
  const double n = kernel_.params().n();
  const double rho = kernel_.radius();
  window_center_ = lat.point(0.5, 0.5);
  const double half_diag = 0.5 * std::max(std::abs(lat.g1() + lat.g2()), std::abs(lat.g1() - lat.g2()));
  // Margin lets zero-finding cells be shifted or dilated slightly past F_j.
  window_radius_ = half_diag + 0.25 * kernel_.tau();
  const double reach = window_radius_ + rho;

  cloud_.clear();
  for (std::size_t m = 0; m < points_.size(); ++m) {
    const Complex w = points_[m];
    lat.for_each_point_in_disk(window_center_ - w, reach, [&](Complex g, std::int64_t, std::int64_t) {
      cloud_.push_back({w + g, static_cast<int>(m), std::exp(Complex(0.0, -n * std::imag(g * std::conj(w))))});
    });
  }

  bucket_ = std::max(0.5 * rho, 1e-3);
  box_lo_ = window_center_ - Complex(reach, reach);
  nbx_ = nby_ = static_cast<int>(std::ceil(2.0 * reach / bucket_)) + 1;
  const auto nb = static_cast<std::size_t>(nbx_) * static_cast<std::size_t>(nby_);
  std::vector<int> counts(nb + 1, 0);
  auto bucket_of = [&](Complex p) {
    const int bx = std::clamp(static_cast<int>((p.real() - box_lo_.real()) / bucket_), 0, nbx_ - 1);
    const int by = std::clamp(static_cast<int>((p.imag() - box_lo_.imag()) / bucket_), 0, nby_ - 1);
    return static_cast<std::size_t>(by) * static_cast<std::size_t>(nbx_) + static_cast<std::size_t>(bx);
  };
  for (const auto& c : cloud_) ++counts[bucket_of(c.p) + 1];
  for (std::size_t b = 0; b < nb; ++b) counts[b + 1] += counts[b];
  bucket_start_ = counts;
  bucket_items_.assign(cloud_.size(), 0);
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (std::size_t i = 0; i < cloud_.size(); ++i) {
    bucket_items_[static_cast<std::size_t>(fill[bucket_of(cloud_[i].p)]++)] = static_cast<int>(i);
  }
}

std::vector<Complex> CoherentFrame::amplitudes(const Eigen::VectorXcd& b) const {
  const double c = kernel_.params().diag();
  std::vector<Complex> amps(cloud_.size());
  for (std::size_t i = 0; i < cloud_.size(); ++i) {
    amps[i] = c * b(cloud_[i].m) * cloud_[i].phase;
  }
  return amps;
}

CoherentFrame::Value CoherentFrame::evaluate_local(std::span<const Complex> amps, Complex z) const {
  const double n = kernel_.params().n();
  const double rho = kernel_.radius();
  const double rho2 = rho * rho;
  const int bx0 = std::max(0, static_cast<int>(std::floor((z.real() - rho - box_lo_.real()) / bucket_)));
  const int bx1 = std::min(nbx_ - 1, static_cast<int>(std::floor((z.real() + rho - box_lo_.real()) / bucket_)));
  const int by0 = std::max(0, static_cast<int>(std::floor((z.imag() - rho - box_lo_.imag()) / bucket_)));
  const int by1 = std::min(nby_ - 1, static_cast<int>(std::floor((z.imag() + rho - box_lo_.imag()) / bucket_)));
  Value v{{0.0, 0.0}, {0.0, 0.0}};
  for (int by = by0; by <= by1; ++by) {
    for (int bx = bx0; bx <= bx1; ++bx) {
      const auto b = static_cast<std::size_t>(by) * static_cast<std::size_t>(nbx_) + static_cast<std::size_t>(bx);
      for (int k = bucket_start_[b]; k < bucket_start_[b + 1]; ++k) {
        const auto i = static_cast<std::size_t>(bucket_items_[static_cast<std::size_t>(k)]);
        const Complex p = cloud_[i].p;
        const double r2 = std::norm(z - p);
        if (r2 > rho2) continue;
        const Complex t = amps[i] * std::exp(Complex(-0.5 * n * r2, n * std::imag(z * std::conj(p))));
        v.value += t;
        v.deriv += n * std::conj(p) * t;
      }
    }
  }
  return v;
}

CoherentFrame::Value CoherentFrame::evaluate(std::span<const Complex> amps, Complex z) const {
  if (std::abs(z - window_center_) <= window_radius_) return evaluate_local(amps, z);
  // Automorphy: s(z) = s(z - gamma) exp(N(z conj(gamma) - |gamma|^2/2)); in the
  // gauge this is a pure phase exp(iN Im(z conj(gamma))) plus a derivative shift.
  const Lattice& lat = kernel_.lattice();
  const Complex zr = reduce(lat, z);
  const Complex g = z - zr;
  const double n = kernel_.params().n();
  const Value local = evaluate_local(amps, zr);
  const Complex ph = std::exp(Complex(0.0, n * std::imag(z * std::conj(g))));
  return {local.value * ph, (local.deriv + n * std::conj(g) * local.value) * ph};
}

Section::Section(std::shared_ptr<const CoherentFrame> f, Eigen::VectorXcd c)
    : frame(std::move(f)), coef(std::move(c)), norm(coef.norm()) {
  b_ = frame->whitener() * coef;
  amps_ = frame->amplitudes(b_);
}

Section Section::from_frame_combination(std::shared_ptr<const CoherentFrame> f, const Eigen::VectorXcd& b) {
  // coef = W^{-1} b with W upper triangular.
  Eigen::VectorXcd c = f->whitener().triangularView<Eigen::Upper>().solve(b);
  return Section(std::move(f), std::move(c));
}

double Section::tail() const { return b_.cwiseAbs().sum() * frame->kernel().tail(); }

std::shared_ptr<const CoherentFrame> build_frame(const Tower& tower, const BundleParams& p, int j,
                                                 const TruncationPolicy& trunc) {
  return CoherentFrame::build(tower, p, j, trunc);
}

Section sample_sphere(std::shared_ptr<const CoherentFrame> frame, StreamRng& rng) {
  const int d = frame->dim();
  Eigen::VectorXcd g(d);
  for (int k = 0; k < d; ++k) g(k) = rng.complex_normal();
  g /= g.norm();
  return Section(std::move(frame), std::move(g));
}

std::vector<Section> sample_onb(std::shared_ptr<const CoherentFrame> frame, StreamRng& rng) {
  const int d = frame->dim();
  Eigen::MatrixXcd a(d, d);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) a(r, c) = rng.complex_normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const Complex rkk = r(k, k);
    if (std::abs(rkk) > 0.0) q.col(k) *= rkk / std::abs(rkk);
  }
  std::vector<Section> basis;
  basis.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) basis.emplace_back(frame, q.col(k));
  return basis;
}

Complex eval_section(const Section& s, Complex z) { return s.evaluate(z).value; }

Complex eval_section_deriv(const Section& s, Complex z) { return s.evaluate(z).deriv; }

}  // namespace covertower
