#include <algorithm>
#include <set>

#include "doctest.h"
#include "molforge/error.hpp"
#include "molforge/grid.hpp"

using namespace molforge;

TEST_CASE("step sizes are endpoint inclusive") {
  CHECK(make_uniform_grid({200}, {{0, 4}}).step_sizes()[0] == doctest::Approx(0.0201005).epsilon(1e-6));
  CHECK(make_uniform_grid({200}, {{0, 4}}).step_sizes()[0] == 4.0 / 199.0);
  CHECK(make_uniform_grid({2}, {{0, 1}}).step_sizes()[0] == 1.0);
  CHECK(make_uniform_grid({12801}, {{-1, 1}}).step_sizes()[0] == 1.5625e-4);
}

TEST_CASE("bad grids are rejected") {
  CHECK_THROWS_AS(make_uniform_grid({1}, {{0, 1}}), GridError);
  CHECK_THROWS_AS(make_uniform_grid({4}, {{1, 1}}), GridError);
  CHECK_THROWS_AS(make_uniform_grid({4}, {{2, 1}}), GridError);
  CHECK_THROWS_AS(make_uniform_grid({4, 4}, {{0, 1}}), GridError);
}

TEST_CASE("axis coordinates") {
  const auto x = axis_coordinates(make_uniform_grid({5}, {{0, 1}}), 0);
  CHECK(x == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(axis_coordinates(make_uniform_grid({2}, {{-1, 1}}), 0) == std::vector<double>{-1, 1});
  const auto w = axis_coordinates(make_uniform_grid({200}, {{0, 4}}), 0);
  CHECK(w[100] == doctest::Approx(100.0 * (4.0 / 199.0)).epsilon(1e-15));
  CHECK(w[100] == doctest::Approx(2.0100503).epsilon(1e-7));
  CHECK_THROWS_AS(axis_coordinates(make_uniform_grid({5}, {{0, 1}}), 1), GridError);
}

TEST_CASE("axis endpoints are bit-exact") {
  for (std::size_t n = 2; n < 300; n += 7) {
    const Interval b{-0.3 * static_cast<double>(n), 1.0 / 3.0 + static_cast<double>(n)};
    const auto x = axis_coordinates(make_uniform_grid({n}, {b}), 0);
    CHECK(x.front() == b.lo);
    CHECK(x.back() == b.hi);
  }
}

TEST_CASE("decompose examples") {
  const auto even = decompose(make_uniform_grid({10}, {{0, 1}}), 2, 1, {false});
  CHECK(even[0].extent[0] == 5);
  CHECK(even[1].extent[0] == 5);
  CHECK(even[1].offset[0] == 5);

  const auto odd = decompose(make_uniform_grid({11}, {{0, 1}}), 2, 1, {false});
  CHECK(odd[0].extent[0] == 6);
  CHECK(odd[1].extent[0] == 5);
  CHECK(odd[1].offset[0] == 6);

  const auto big = decompose(make_uniform_grid({12801}, {{-1, 1}}), 4, 3, {false});
  std::vector<std::size_t> extents;
  for (const auto& s : big) extents.push_back(s.extent[0]);
  CHECK(extents == std::vector<std::size_t>{3201, 3200, 3200, 3200});
}

TEST_CASE("decompose errors") {
  const Grid g = make_uniform_grid({4}, {{0, 1}});
  CHECK_THROWS_AS(decompose(g, 0, 1, {false}), GridError);
  CHECK_THROWS_AS(decompose(g, 5, 1, {false}), GridError);
}

TEST_CASE("partition and neighbour symmetry, exhaustive") {
  for (std::size_t n = 2; n <= 50; ++n) {
    const Grid g = make_uniform_grid({n}, {{0, 1}});
    for (std::size_t w = 1; w <= n; ++w) {
      for (bool periodic : {false, true}) {
        const auto subs = decompose(g, w, 2, {periodic});
        REQUIRE(subs.size() == w);
        std::multiset<std::size_t> owned;
        std::size_t lo = n, hi = 0;
        for (const auto& s : subs) {
          for (std::size_t i = 0; i < s.extent[0]; ++i) owned.insert(s.offset[0] + i);
          lo = std::min(lo, s.extent[0]);
          hi = std::max(hi, s.extent[0]);
        }
        std::multiset<std::size_t> all;
        for (std::size_t i = 0; i < n; ++i) all.insert(i);
        CHECK(owned == all);
        CHECK(hi - lo <= 1);
        for (std::size_t r = 0; r + 1 < w; ++r) CHECK(subs[r].extent[0] >= subs[r + 1].extent[0]);

        for (const auto& a : subs) {
          for (Side side : {Side::Left, Side::Right}) {
            const auto nb = a.neighbour(0, side);
            CHECK(nb.has_value() == !a.is_external(0, side));
            if (!nb) continue;
            const Side back = side == Side::Left ? Side::Right : Side::Left;
            CHECK(subs[static_cast<std::size_t>(*nb)].neighbour(0, back) == a.rank);
          }
        }
        if (!periodic) {
          CHECK_FALSE(subs.front().neighbour(0, Side::Left).has_value());
          CHECK_FALSE(subs.back().neighbour(0, Side::Right).has_value());
        } else if (w > 1) {
          CHECK(subs.front().neighbour(0, Side::Left) == static_cast<int>(w - 1));
          CHECK(subs.back().neighbour(0, Side::Right) == 0);
        }
      }
    }
  }
}
