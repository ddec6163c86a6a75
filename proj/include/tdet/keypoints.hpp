#pragma once

#include <vector>

#include "tdet/grid.hpp"

namespace tdet {

struct PeakConfig {
  int k = 70;             // peaks kept across all classes
  int window = 3;         // odd local-max window side
  double score_floor = 0; // cells must score strictly above this
};

/// Windowed local maxima of a per-class heatmap. A cell is a peak when it
/// scores strictly above score_floor and no window neighbor in its channel
/// beats it; among equal-valued neighbors only the row-major-first cell
/// survives, so a plateau yields exactly one peak. Returns at most k peaks
/// sorted by (score desc, class asc, row-major asc); coordinates are cell
/// indices until offsets are applied.
std::vector<Keypoint> extract_peaks(const DenseGrid& heatmap,
                                    const PeakConfig& config);

/// Remap cell-indexed peaks to image coordinates using a 2xHxW offset grid
/// (channel 0 = x fraction, channel 1 = y fraction):
///   x = (col + offset_x) * stride,  y = (row + offset_y) * stride.
std::vector<Keypoint> apply_offsets(std::vector<Keypoint> peaks,
                                    const DenseGrid& offsets, double stride);

/// Snap a regressed keypoint to the nearest same-class heatmap peak within
/// `radius` (Euclidean, image pixels). On a hit the peak is returned with its
/// own score and position; otherwise the regressed point is returned
/// unchanged. Distance ties break toward the peak with the smaller row-major
/// cell index. Never moves a point by more than radius.
Keypoint refine_keypoint(const Keypoint& regressed,
                         const std::vector<Keypoint>& peaks, double radius);

}  // namespace tdet
