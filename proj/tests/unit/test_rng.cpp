#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "jacspec/rng.hpp"

using namespace jacspec;

TEST_SUITE("rng") {

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      A2{0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                      A2{0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams replay and are distinct") {
  PhiloxStream a(42, 7);
  PhiloxStream b(42, 7);
  PhiloxStream c(42, 8);
  PhiloxStream d(43, 7);
  int same_c = 0;
  int same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint32_t x = a.next_u32();
    CHECK(x == b.next_u32());
    same_c += x == c.next_u32();
    same_d += x == d.next_u32();
  }
  CHECK(same_c < 3);
  CHECK(same_d < 3);
}

TEST_CASE("stream id does not depend on consumption of other streams") {
  PhiloxStream first(1, 5);
  const double v = first.normal();
  PhiloxStream other(1, 4);
  for (int i = 0; i < 100; ++i) other.normal();
  PhiloxStream again(1, 5);
  CHECK(again.normal() == v);
}

TEST_CASE("distribution moments") {
  constexpr int n = 1'000'000;
  PhiloxStream s(2024, 0);
  double su = 0, sn = 0, sn2 = 0, sn4 = 0, sr = 0, sv = 0, sv2 = 0;
  double umin = 1, umax = 0, vmax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double g = s.normal();
    sn += g;
    sn2 += g * g;
    sn4 += g * g * g * g;
    const double r = s.rademacher();
    CHECK_UNARY(r == 1.0 || r == -1.0);
    sr += r;
    const double v = s.uniform_unit_variance();
    vmax = std::max(vmax, std::abs(v));
    sv += v;
    sv2 += v * v;
  }
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(std::abs(su / n - 0.5) < 5 * se * std::sqrt(1.0 / 12));
  CHECK(std::abs(sn / n) < 5 * se);
  CHECK(std::abs(sn2 / n - 1.0) < 5 * se * std::sqrt(2.0));
  CHECK(std::abs(sn4 / n - 3.0) < 5 * se * std::sqrt(96.0));
  CHECK(std::abs(sr / n) < 5 * se);
  CHECK(vmax <= std::sqrt(3.0));
  CHECK(std::abs(sv / n) < 5 * se);
  CHECK(std::abs(sv2 / n - 1.0) < 5 * se * std::sqrt(0.8));
}

TEST_CASE("cauchy quartiles equal plus and minus the scale") {
  PhiloxStream s(9, 1);
  std::vector<double> v(200'001);
  for (double& x : v) x = s.cauchy(0.5);
  std::sort(v.begin(), v.end());
  CHECK(std::abs(v[v.size() / 2]) < 0.01);
  CHECK(std::abs(v[v.size() / 4] + 0.5) < 0.015);
  CHECK(std::abs(v[3 * v.size() / 4] - 0.5) < 0.015);
}

}  // TEST_SUITE
