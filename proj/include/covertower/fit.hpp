// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace covertower {

/// Ordinary least squares y = slope x + intercept.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Throws DomainError with fewer than 2 points or constant x.
FitResult linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace covertower
