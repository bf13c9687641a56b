// SPDX-License-Identifier: Apache-2.0
#include "covertower/fit.hpp"

#include <algorithm>

#include "covertower/errors.hpp"

namespace covertower {

FitResult linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("fit needs matching x and y");
  if (x.size() < 2) throw DomainError("fit needs at least 2 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit needs distinct x values");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  f.points = static_cast<int>(x.size());
  return f;
}

}  // namespace covertower
