// SPDX-License-Identifier: Apache-2.0
//
// Normalized zero currents paired with periodic test functions, their
// predicted mean and variance, and Monte Carlo estimates.
//
// Conventions (n = 1): the current of integration over the zeros of s is
// paired with psi by summing psi over the zeros; i ddbar psi has density
// Laplacian(psi)/2 against dx dy; the Bergman metric has density
// lambda_j = (1/4) Laplacian log K_j(z, z).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covertower/quotient.hpp"
#include "covertower/zeros.hpp"

namespace covertower {

/// One Fourier mode a cos(2 pi <lambda, z> + phase), lambda = m1 h1 + m2 h2
/// with (h1, h2) the dual basis of Gamma_0.
struct FormTerm {
  int m1 = 0;
  int m2 = 0;
  double amp = 1.0;
  double phase = 0.0;
};

class TestForm {
 public:
  TestForm(const Lattice& base, std::string id, std::vector<FormTerm> terms);

  /// Terms from explicit frequency vectors; throws DomainError unless each
  /// lambda pairs integrally with the generators of `base`.
  struct Mode {
    Complex lambda;
    double amp = 1.0;
    double phase = 0.0;
  };
  static TestForm from_modes(const Lattice& base, std::string id, const std::vector<Mode>& modes);

  /// Presets: "const", "psi1", "psi2", "psi3", "mixed". Throws DomainError otherwise.
  static TestForm preset(const Lattice& base, const std::string& id);
  static std::vector<std::string> preset_ids();

  double value(Complex z) const;
  double laplacian(Complex z) const;
  /// Density of i ddbar psi against dx dy.
  double ddbar_density(Complex z) const { return 0.5 * laplacian(z); }
  bool harmonic() const;  // Laplacian identically zero
  /// (N/pi) int_{F_0} psi dm, the limiting pairing.
  double limit_pairing(int N) const;
  /// int_{F_0} |i ddbar psi| by nested adaptive Gauss-Kronrod.
  double ddbar_l1(double rtol = 1e-8) const;

  const std::string& id() const { return id_; }
  const std::vector<FormTerm>& terms() const { return terms_; }

 private:
  Lattice base_;
  std::string id_;
  std::vector<FormTerm> terms_;
  std::vector<Complex> freqs_;  // lambda per term
};

/// I_j^{-1} sum over zeros (pushed to F_0, with multiplicity) of psi.
double pair_current(const ZeroSet& zs, const Tower& tower, const TestForm& psi);

/// (1/pi) int_{F_0} psi lambda_j dm on a grid x grid trapezoid mesh.
double expected_pairing_theory(const Tower& tower, const BundleParams& p, int j, const TestForm& psi, int grid,
                               const TruncationPolicy& trunc = {});

/// (1/4 pi^2) sum_{n>=1} t^{2n}/n^2 for t in [0, 1]. Throws DomainError outside.
double gtilde(double t);
/// -(1/4 pi^2) int_0^{t^2} log(1-s)/s ds by Gauss-Kronrod quadrature.
double gtilde_integral(double t);

struct VarianceTheory {
  double value = 0.0;
  double coarse = 0.0;      // same rule at half the grid
  double quad_error = 0.0;  // |value - coarse|, or the Monte Carlo stderr
  bool monte_carlo = false;
};

/// I_j^{-1} sum_{cosets} int int (i ddbar psi)(z) (i ddbar psi)(w) Gtilde(P_j(z + rep, w)).
/// Tensor trapezoid with grid^2 nodes per copy of F_0; falls back to Monte
/// Carlo over pairs when grid^4 I_j exceeds `budget` kernel evaluations.
VarianceTheory variance_theory(const Tower& tower, const BundleParams& p, int j, const TestForm& psi, int grid,
                               const TruncationPolicy& trunc = {}, double budget = 1e8);

/// [exp(-c tau_{floor(j/2)}) + 2^{-j/2}] ||i ddbar psi||_{L1}^2. Throws DomainError if c_hat <= 0.
double variance_paper_bound(const Tower& tower, int j, const TestForm& psi, double c_hat);

struct PairingStats {
  std::string psi_id;
  double mean = 0.0;
  double var = 0.0;
  double stderr_mean = 0.0;
  double var_stderr = 0.0;  // bootstrap standard error of var
  int samples = 0;
  double theory_mean = 0.0;
  double theory_var = 0.0;
  double paper_bound = 0.0;
};

enum class SamplingMode { Sphere, Onb };

struct SamplingPlan {
  int n_samples = 2000;
  std::uint64_t master_seed = 0;
  std::uint32_t stream = 0;  // experiment id of the counter-based streams
  SamplingMode mode = SamplingMode::Sphere;
  bool keep_zeros = false;
  bool keep_samples = false;  // sphere-mode coefficient vectors
  int bootstrap = 200;
};

struct EmpiricalRun {
  int level = 0;
  int failures = 0;
  std::vector<std::string> psi_ids;
  /// pairings[i][f]: sample i, form f. In ONB mode a sample is a basis and
  /// the entry is the basis average d^{-1} sum_k (Z_{s_k}, psi).
  std::vector<std::vector<double>> pairings;
  std::vector<std::uint8_t> ok;     // per sample
  std::vector<ZeroSet> zero_sets;   // only with keep_zeros (sphere mode)
  std::vector<Eigen::VectorXcd> coefs;  // only with keep_samples (sphere mode)
  std::vector<PairingStats> stats;  // per form, theory fields zero
};

/// Pairings of sampled sections with each form; failed samples are excluded
/// and counted. Throws SamplingFailure if more than 1% of the samples fail.
EmpiricalRun empirical_stats(const Tower& tower, const BundleParams& p, int j, const std::vector<TestForm>& forms,
                             const SamplingPlan& plan, const TruncationPolicy& trunc = {});

/// Mean, variance and bootstrap error of one column of pairings.
PairingStats summarize(const std::vector<double>& xs, std::uint64_t seed, std::uint32_t stream, int bootstrap);

}  // namespace covertower
