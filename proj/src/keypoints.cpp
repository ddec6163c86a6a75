#include "tdet/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tdet {

std::vector<Keypoint> extract_peaks(const DenseGrid& heatmap,
                                    const PeakConfig& config) {
  contract(config.k > 0, "extract_peaks: k must be positive");
  contract(config.window >= 1 && config.window % 2 == 1,
           "extract_peaks: window must be odd and >= 1");
  const int h = heatmap.height();
  const int w = heatmap.width();
  const int reach = config.window / 2;

  std::vector<Keypoint> peaks;
  for (int c = 0; c < heatmap.channels(); ++c) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const float v = heatmap.at(c, i, j);
        if (!(v > config.score_floor)) continue;
        bool is_peak = true;
        for (int di = -reach; di <= reach && is_peak; ++di) {
          for (int dj = -reach; dj <= reach && is_peak; ++dj) {
            const int ni = i + di, nj = j + dj;
            if (ni < 0 || ni >= h || nj < 0 || nj >= w) continue;
            if (ni == i && nj == j) continue;
            const float nv = heatmap.at(c, ni, nj);
            if (nv > v) is_peak = false;
            // Plateau: the row-major-first cell of an equal run wins.
            if (nv == v && (ni < i || (ni == i && nj < j))) is_peak = false;
          }
        }
        if (is_peak) {
          Keypoint p;
          p.class_id = c;
          p.x = j;
          p.y = i;
          p.score = v;
          p.cell_row = i;
          p.cell_col = j;
          peaks.push_back(p);
        }
      }
    }
  }

  std::sort(peaks.begin(), peaks.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    if (a.cell_row != b.cell_row) return a.cell_row < b.cell_row;
    return a.cell_col < b.cell_col;
  });
  if (peaks.size() > static_cast<std::size_t>(config.k))
    peaks.resize(static_cast<std::size_t>(config.k));
  return peaks;
}

std::vector<Keypoint> apply_offsets(std::vector<Keypoint> peaks,
                                    const DenseGrid& offsets, double stride) {
  contract(offsets.channels() == 2, "apply_offsets: offset grid must be 2xHxW");
  contract(stride > 0, "apply_offsets: stride must be positive");
  for (Keypoint& p : peaks) {
    contract(p.cell_row >= 0 && p.cell_col >= 0,
             "apply_offsets: keypoint has no source cell");
    const double off_x = offsets.at(0, p.cell_row, p.cell_col);
    const double off_y = offsets.at(1, p.cell_row, p.cell_col);
    p.x = (p.cell_col + off_x) * stride;
    p.y = (p.cell_row + off_y) * stride;
  }
  return peaks;
}

Keypoint refine_keypoint(const Keypoint& regressed,
                         const std::vector<Keypoint>& peaks, double radius) {
  contract(radius >= 0, "refine_keypoint: radius must be non-negative");
  const Keypoint* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const Keypoint& p : peaks) {
    if (p.class_id != regressed.class_id) continue;
    const double dx = p.x - regressed.x;
    const double dy = p.y - regressed.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 ||
        (d2 == best_d2 && best != nullptr &&
         (p.cell_row < best->cell_row ||
          (p.cell_row == best->cell_row && p.cell_col < best->cell_col)))) {
      best = &p;
      best_d2 = d2;
    }
  }
  if (best != nullptr && best_d2 <= radius * radius) return *best;
  return regressed;
}

}  // namespace tdet
