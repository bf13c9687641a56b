// SPDX-License-Identifier: Apache-2.0
//
// Holomorphic sections of L^N over the level-j torus, written in a whitened
// frame of coherent states e_m = K_j(., w_m) exp(-N|w_m|^2/2).
//
// Values are returned in the same gauge as the kernel: eval_section(s, z) is
// s(z) exp(-N|z|^2/2), so its modulus is the pointwise norm |s(z)|_{h^N} and
// its argument is the argument of the holomorphic coefficient.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "covertower/quotient.hpp"
#include "covertower/rng.hpp"

namespace covertower {

class CoherentFrame {
 public:
  /// Centers on a near-square grid of F_j; one retry with a deterministic
  /// jitter of 0.01 tau_j. Throws FrameDegenerate if cond(gram) > 1e8 after it.
  static std::shared_ptr<const CoherentFrame> build(const Tower& tower, const BundleParams& p, int j,
                                                    const TruncationPolicy& trunc = {});

  int level() const { return kernel_.level(); }
  int dim() const { return static_cast<int>(points_.size()); }
  const std::vector<Complex>& points() const { return points_; }
  const Eigen::MatrixXcd& gram() const { return gram_; }
  const Eigen::MatrixXcd& whitener() const { return whitener_; }
  double cond() const { return cond_; }
  bool jittered() const { return jittered_; }
  const QuotientKernel& kernel() const { return kernel_; }
  const Lattice& lattice() const { return kernel_.lattice(); }

  /// Gauged value and z-derivative of sum_m b_m e_m at z.
  struct Value {
    Complex value;
    Complex deriv;
  };
  /// `amps` are per-cloud-point amplitudes from amplitudes(b).
  Value evaluate(std::span<const Complex> amps, Complex z) const;
  std::vector<Complex> amplitudes(const Eigen::VectorXcd& b) const;

 private:
  CoherentFrame(const QuotientKernel& kernel, std::vector<Complex> points);
  bool factorize();
  void build_cloud();
  Value evaluate_local(std::span<const Complex> amps, Complex z) const;

  QuotientKernel kernel_;
  std::vector<Complex> points_;
  Eigen::MatrixXcd gram_;
  Eigen::MatrixXcd whitener_;
  double cond_ = 0.0;
  bool jittered_ = false;

  // Translated centers p = w_m + gamma near F_j, bucketed for range queries.
  struct CloudPoint {
    Complex p;
    int m;
    Complex phase;  // exp(-iN Im(gamma conj(w_m)))
  };
  std::vector<CloudPoint> cloud_;
  Complex window_center_{};
  double window_radius_ = 0.0;
  Complex box_lo_{};
  double bucket_ = 1.0;
  int nbx_ = 0, nby_ = 0;
  std::vector<int> bucket_start_;
  std::vector<int> bucket_items_;
};

/// Section with orthonormal-frame coordinates `coef`; the frame combination
/// is b = whitener * coef and ||s||^2 = |coef|^2.
struct Section {
  std::shared_ptr<const CoherentFrame> frame;
  Eigen::VectorXcd coef;
  double norm = 0.0;

  Section(std::shared_ptr<const CoherentFrame> f, Eigen::VectorXcd c);
  /// Section with the given coherent-frame combination b (coef = whitener^{-1} b).
  static Section from_frame_combination(std::shared_ptr<const CoherentFrame> f, const Eigen::VectorXcd& b);

  int level() const { return frame->level(); }
  CoherentFrame::Value evaluate(Complex z) const { return frame->evaluate(amps_, z); }
  /// Bound on the omitted lattice-sum tail of evaluate(), gauged scale.
  double tail() const;

 private:
  Eigen::VectorXcd b_;
  std::vector<Complex> amps_;
};

std::shared_ptr<const CoherentFrame> build_frame(const Tower& tower, const BundleParams& p, int j,
                                                 const TruncationPolicy& trunc = {});

/// Uniform point of the unit sphere of H^0: coef = g/|g|, g complex Gaussian.
Section sample_sphere(std::shared_ptr<const CoherentFrame> frame, StreamRng& rng);

/// Haar-random orthonormal basis: unitary QR factor of a complex Gaussian
/// matrix with the diagonal of R made positive.
std::vector<Section> sample_onb(std::shared_ptr<const CoherentFrame> frame, StreamRng& rng);

Complex eval_section(const Section& s, Complex z);
Complex eval_section_deriv(const Section& s, Complex z);

}  // namespace covertower
