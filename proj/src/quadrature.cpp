// SPDX-License-Identifier: Apache-2.0
#include "covertower/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace covertower {

CellGrid level_grid(const Tower& tower, int j, int per_cell) {
  const Lattice& base = tower.base();
  const Lattice& lat = tower.level(j).lattice;
  const auto cells = [](double len, double unit) {
    return std::max(1, static_cast<int>(std::lround(len / unit)));
  };
  const int n1 = per_cell * cells(std::abs(lat.g1()), std::abs(base.g1()));
  const int n2 = per_cell * cells(std::abs(lat.g2()), std::abs(base.g2()));
  return CellGrid::of(lat, n1, n2);
}

}  // namespace covertower
