#include <algorithm>

#include "doctest.h"
#include "tdet/common.hpp"
#include "tdet/pooling.hpp"

using namespace tdet;

namespace {

// Straight-from-definition oracles: evaluate every ray with a plain loop.
// The library versions must agree bit for bit (both only compare and add).

float ray_max(const DenseGrid& g, int i, int j, ScanDirection dir) {
  float best = g.at(0, i, j);
  switch (dir) {
    case ScanDirection::TowardRight:
      for (int k = j; k < g.width(); ++k) best = std::max(best, g.at(0, i, k));
      break;
    case ScanDirection::TowardLeft:
      for (int k = 0; k <= j; ++k) best = std::max(best, g.at(0, i, k));
      break;
    case ScanDirection::TowardBottom:
      for (int k = i; k < g.height(); ++k) best = std::max(best, g.at(0, k, j));
      break;
    case ScanDirection::TowardTop:
      for (int k = 0; k <= i; ++k) best = std::max(best, g.at(0, k, j));
      break;
  }
  return best;
}

DenseGrid brute_corner_pool(const DenseGrid& vertical,
                            const DenseGrid& horizontal, Corner corner) {
  DenseGrid out(1, vertical.height(), vertical.width());
  const bool tl = corner == Corner::TopLeft;
  for (int i = 0; i < out.height(); ++i) {
    for (int j = 0; j < out.width(); ++j) {
      const float v = ray_max(vertical, i, j,
                              tl ? ScanDirection::TowardBottom
                                 : ScanDirection::TowardTop);
      const float h = ray_max(horizontal, i, j,
                              tl ? ScanDirection::TowardRight
                                 : ScanDirection::TowardLeft);
      out.at(0, i, j) = v + h;
    }
  }
  return out;
}

DenseGrid brute_center_pool(const DenseGrid& horizontal,
                            const DenseGrid& vertical) {
  DenseGrid out(1, horizontal.height(), horizontal.width());
  for (int i = 0; i < out.height(); ++i) {
    for (int j = 0; j < out.width(); ++j) {
      float row = horizontal.at(0, i, 0);
      for (int k = 1; k < horizontal.width(); ++k) {
        row = std::max(row, horizontal.at(0, i, k));
      }
      float col = vertical.at(0, 0, j);
      for (int k = 1; k < vertical.height(); ++k) {
        col = std::max(col, vertical.at(0, k, j));
      }
      out.at(0, i, j) = row + col;
    }
  }
  return out;
}

// With an identity middle transform the cascade reduces to quadrant maxima.
DenseGrid brute_cascade(const DenseGrid& a, const DenseGrid& b, Corner corner) {
  DenseGrid out(1, a.height(), a.width());
  const bool tl = corner == Corner::TopLeft;
  auto quad_max = [&](const DenseGrid& g, int i, int j) {
    float best = g.at(0, i, j);
    const int i0 = tl ? i : 0, i1 = tl ? g.height() : i + 1;
    const int j0 = tl ? j : 0, j1 = tl ? g.width() : j + 1;
    for (int r = i0; r < i1; ++r) {
      for (int c = j0; c < j1; ++c) best = std::max(best, g.at(0, r, c));
    }
    return best;
  };
  for (int i = 0; i < out.height(); ++i) {
    for (int j = 0; j < out.width(); ++j) {
      out.at(0, i, j) = quad_max(a, i, j) + quad_max(b, i, j);
    }
  }
  return out;
}

DenseGrid random_grid(int h, int w, Rng& rng) {
  DenseGrid g(1, h, w);
  for (float& v : g.values()) {
    v = static_cast<float>(rng.uniform(-10.0, 10.0));
  }
  return g;
}

}  // namespace

TEST_CASE("corner pool fixture: rays, not windows") {
  // vertical = horizontal = [[0,0],[0,5]]
  const DenseGrid g(1, 2, 2, {0, 0, 0, 5});
  const DenseGrid out = corner_pool(g, g, Corner::TopLeft);
  CHECK(out.at(0, 0, 0) == 0);   // both rays see only zeros
  CHECK(out.at(0, 0, 1) == 5);   // column ray reaches the 5
  CHECK(out.at(0, 1, 0) == 5);   // row ray reaches the 5
  CHECK(out.at(0, 1, 1) == 10);  // both rays end on the 5
}

TEST_CASE("center pool fixture") {
  const DenseGrid g(1, 2, 2, {0, 1, 2, 0});
  const DenseGrid out = center_pool(g, g);
  CHECK(out.at(0, 0, 0) == 3);  // row max 1 + column max 2
  CHECK(out.at(0, 0, 1) == 2);
  CHECK(out.at(0, 1, 0) == 4);
  CHECK(out.at(0, 1, 1) == 3);
}

TEST_CASE("cascade with equal inputs doubles the quadrant max") {
  const DenseGrid g(1, 3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const DenseGrid out = cascade_corner_pool(g, g, Corner::TopLeft);
  // Top-left quadrant is toward bottom-right; at (0,0) it spans everything.
  CHECK(out.at(0, 0, 0) == 18);
  CHECK(out.at(0, 2, 2) == 18);
  CHECK(out.at(0, 0, 2) == 18);  // column 2 toward bottom: max 9
  CHECK(out.at(0, 2, 0) == 18);  // row 2 toward right: max 9
  CHECK(out.at(0, 1, 1) == 18);
}

TEST_CASE("scan_max agrees with the ray oracle on random grids") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 12));
    const int w = static_cast<int>(rng.uniform_int(1, 12));
    const DenseGrid g = random_grid(h, w, rng);
    for (ScanDirection dir :
         {ScanDirection::TowardLeft, ScanDirection::TowardRight,
          ScanDirection::TowardTop, ScanDirection::TowardBottom}) {
      const DenseGrid got = scan_max(g, dir);
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
          REQUIRE(got.at(0, i, j) == ray_max(g, i, j, dir));
        }
      }
    }
  }
}

TEST_CASE("pooling agrees with brute force on random grids, bit exact") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 16));
    const int w = static_cast<int>(rng.uniform_int(1, 16));
    const DenseGrid a = random_grid(h, w, rng);
    const DenseGrid b = random_grid(h, w, rng);
    for (Corner corner : {Corner::TopLeft, Corner::BottomRight}) {
      REQUIRE(corner_pool(a, b, corner).values() ==
              brute_corner_pool(a, b, corner).values());
      REQUIRE(cascade_corner_pool(a, b, corner).values() ==
              brute_cascade(a, b, corner).values());
    }
    REQUIRE(center_pool(a, b).values() == brute_center_pool(a, b).values());
  }
}

TEST_CASE("pooling requires single-channel grids") {
  const DenseGrid two(2, 3, 3);
  CHECK_THROWS_AS(scan_max(two, ScanDirection::TowardRight), ContractError);
  CHECK_THROWS_AS(center_pool(two, two), ContractError);
  CHECK_THROWS_AS(corner_pool(two, two, Corner::TopLeft), ContractError);
}

TEST_CASE("pooling requires matching shapes") {
  const DenseGrid a(1, 3, 3);
  const DenseGrid b(1, 3, 4);
  CHECK_THROWS_AS(center_pool(a, b), ContractError);
  CHECK_THROWS_AS(corner_pool(a, b, Corner::BottomRight), ContractError);
  CHECK_THROWS_AS(cascade_corner_pool(a, b, Corner::TopLeft), ContractError);
}
