// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "covertower/rng.hpp"

using namespace covertower;

// Known-answer vectors of the Random123 distribution for philox4x32-10.
TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of their keys") {
  StreamRng a(42, 1, 7), b(42, 1, 7), c(42, 1, 8), d(43, 1, 7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    (void)c;
  }
  CHECK(StreamRng(42, 1, 7).next_u32() != StreamRng(42, 1, 8).next_u32());
  CHECK(StreamRng(42, 1, 7).next_u32() != StreamRng(43, 1, 7).next_u32());
  CHECK(StreamRng(42, 1, 7).next_u32() != StreamRng(42, 2, 7).next_u32());
  (void)d;
}

TEST_CASE("uniform and gaussian moments") {
  StreamRng r(1, 0, 0);
  constexpr int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0, sc2 = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    su2 += u * u;
    const double g = r.normal();
    sn += g;
    sn2 += g * g;
    sc2 += std::norm(r.complex_normal());
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / n == doctest::Approx(1.0 / 3).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.015));
  CHECK(sc2 / n == doctest::Approx(1.0).epsilon(0.015));
}
