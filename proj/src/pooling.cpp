#include "tdet/pooling.hpp"

#include <algorithm>

namespace tdet {
namespace {

void require_single_channel(const DenseGrid& g, const char* op) {
  contract(g.channels() == 1, std::string(op) + ": grid must be single channel");
}

void require_same_shape(const DenseGrid& a, const DenseGrid& b, const char* op) {
  contract(a.same_shape(b), std::string(op) + ": grid shapes must match");
}

DenseGrid add(const DenseGrid& a, const DenseGrid& b) {
  DenseGrid out = a;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.values()[k] += b.values()[k];
  }
  return out;
}

}  // namespace

DenseGrid scan_max(const DenseGrid& grid, ScanDirection direction) {
  require_single_channel(grid, "scan_max");
  const int h = grid.height();
  const int w = grid.width();
  DenseGrid out = grid;

  switch (direction) {
    case ScanDirection::TowardRight:
      for (int i = 0; i < h; ++i)
        for (int j = w - 2; j >= 0; --j)
          out.at(0, i, j) = std::max(out.at(0, i, j), out.at(0, i, j + 1));
      break;
    case ScanDirection::TowardLeft:
      for (int i = 0; i < h; ++i)
        for (int j = 1; j < w; ++j)
          out.at(0, i, j) = std::max(out.at(0, i, j), out.at(0, i, j - 1));
      break;
    case ScanDirection::TowardBottom:
      for (int i = h - 2; i >= 0; --i)
        for (int j = 0; j < w; ++j)
          out.at(0, i, j) = std::max(out.at(0, i, j), out.at(0, i + 1, j));
      break;
    case ScanDirection::TowardTop:
      for (int i = 1; i < h; ++i)
        for (int j = 0; j < w; ++j)
          out.at(0, i, j) = std::max(out.at(0, i, j), out.at(0, i - 1, j));
      break;
  }
  return out;
}

DenseGrid center_pool(const DenseGrid& horizontal, const DenseGrid& vertical) {
  require_single_channel(horizontal, "center_pool");
  require_single_channel(vertical, "center_pool");
  require_same_shape(horizontal, vertical, "center_pool");
  // Opposing scans compose to the full-line max.
  const DenseGrid row_max =
      scan_max(scan_max(horizontal, ScanDirection::TowardRight),
               ScanDirection::TowardLeft);
  const DenseGrid col_max =
      scan_max(scan_max(vertical, ScanDirection::TowardBottom),
               ScanDirection::TowardTop);
  return add(row_max, col_max);
}

DenseGrid corner_pool(const DenseGrid& vertical, const DenseGrid& horizontal,
                      Corner corner) {
  require_single_channel(vertical, "corner_pool");
  require_single_channel(horizontal, "corner_pool");
  require_same_shape(vertical, horizontal, "corner_pool");
  if (corner == Corner::TopLeft) {
    return add(scan_max(vertical, ScanDirection::TowardBottom),
               scan_max(horizontal, ScanDirection::TowardRight));
  }
  return add(scan_max(vertical, ScanDirection::TowardTop),
             scan_max(horizontal, ScanDirection::TowardLeft));
}

DenseGrid cascade_corner_pool(const DenseGrid& grid_a, const DenseGrid& grid_b,
                              Corner corner) {
  require_single_channel(grid_a, "cascade_corner_pool");
  require_single_channel(grid_b, "cascade_corner_pool");
  require_same_shape(grid_a, grid_b, "cascade_corner_pool");
  const auto [boundary, inside] =
      corner == Corner::TopLeft
          ? std::pair{ScanDirection::TowardRight, ScanDirection::TowardBottom}
          : std::pair{ScanDirection::TowardLeft, ScanDirection::TowardTop};
  return add(scan_max(scan_max(grid_a, boundary), inside),
             scan_max(scan_max(grid_b, inside), boundary));
}

}  // namespace tdet
