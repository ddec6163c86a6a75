#pragma once

#include "tdet/grid.hpp"

namespace tdet {

/// Direction the max-scan ray extends from each cell. The output at (i, j) is
/// the max of the input over the ray starting at (i, j), inclusive:
///   TowardRight   max over j' >= j       TowardLeft  max over j' <= j
///   TowardBottom  max over i' >= i       TowardTop   max over i' <= i
enum class ScanDirection { TowardLeft, TowardRight, TowardTop, TowardBottom };

enum class Corner { TopLeft, BottomRight };

/// Directional cumulative max over a single-channel grid. One pass, exact:
/// only comparisons, no arithmetic.
DenseGrid scan_max(const DenseGrid& grid, ScanDirection direction);

/// Keypoint response for box centers: full-row max of `horizontal` plus
/// full-column max of `vertical`, built by composing opposing scans.
DenseGrid center_pool(const DenseGrid& horizontal, const DenseGrid& vertical);

/// Keypoint response for box corners. Top-left:
///   out(i,j) = max_{i'>=i} vertical(i',j) + max_{j'>=j} horizontal(i,j')
/// Bottom-right mirrors both rays.
DenseGrid corner_pool(const DenseGrid& vertical, const DenseGrid& horizontal,
                      Corner corner);

/// Corner response that first aggregates along the box boundary and then
/// along the inside direction, summing the two scan orders. The network
/// variant interposes a learned transform between the scans; here the middle
/// transform is identity, so with grid_a == grid_b each summand reduces to
/// the quadrant max. Top-left:
///   scan_max(scan_max(a, TowardRight), TowardBottom)
///   + scan_max(scan_max(b, TowardBottom), TowardRight)
DenseGrid cascade_corner_pool(const DenseGrid& grid_a, const DenseGrid& grid_b,
                              Corner corner);

}  // namespace tdet
