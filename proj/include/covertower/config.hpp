// SPDX-License-Identifier: Apache-2.0
//
// Flat experiment configuration: one `dotted.key = value` per line, `#`
// starts a comment. Unknown keys are rejected.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covertower/fock.hpp"
#include "covertower/lattice.hpp"
#include "covertower/quotient.hpp"

namespace covertower {

struct ExperimentConfig {
  std::string lattice_scale = "sqrt(pi)";  // number, sqrt(pi) or sqrt(K*pi)
  int lattice_ratio = 2;
  int tower_depth = 4;
  std::vector<IntMat2> tower_matrices;     // overrides ratio/depth when non-empty
  int bundle_N = 2;
  double truncation_rtol = 1e-13;
  double truncation_max_radius = 64.0;
  int quadrature_grid = 64;                // nodes per level-0 generator (traces, means)
  int variance_grid = 16;                  // nodes per axis of F_0 for the variance integral
  double quadrature_budget = 1e8;
  int stability_grid = 12;
  std::vector<int> stability_n_sweep{2, 4, 8};
  int sampling_n_samples = 2000;
  std::uint64_t sampling_master_seed = 20240607;
  int sampling_bootstrap = 200;
  std::vector<std::string> testforms_presets{"psi1", "psi2", "psi3"};
  std::string output_dir = "out";

  double scale() const;
  Tower tower() const;
  BundleParams bundle() const;  // d0 from the tower
  TruncationPolicy truncation() const;

  /// Throws ConfigError on any invalid field.
  void validate() const;
  /// Round-trips through parse().
  std::string to_text() const;
  /// (key, value) pairs in file order, values as written by to_text().
  std::vector<std::pair<std::string, std::string>> entries() const;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

/// Value of a scale expression: a decimal, "sqrt(pi)", "sqrt(K*pi)" or "sqrt(X)".
double parse_scale(const std::string& expr);

}  // namespace covertower
