#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdet/common.hpp"

namespace tdet {

/// Dense C x H x W float32 array, row major: value index = (c*H + i)*W + j.
/// Out-of-range access throws; it is a contract violation, never wraparound.
class DenseGrid {
 public:
  DenseGrid() = default;
  DenseGrid(int channels, int height, int width, float fill = 0.0f);
  DenseGrid(int channels, int height, int width, std::vector<float> values);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  float at(int c, int i, int j) const { return values_[index(c, i, j)]; }
  float& at(int c, int i, int j) { return values_[index(c, i, j)]; }

  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  bool same_shape(const DenseGrid& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

 private:
  std::size_t index(int c, int i, int j) const;

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

struct LevelSpec {
  std::string level_id;
  int stride = 1;
};

/// Axis-aligned box in image pixels, corners as xyxy.
struct BoxGeometry {
  double tl_x = 0, tl_y = 0, br_x = 0, br_y = 0;

  double width() const { return br_x - tl_x; }
  double height() const { return br_y - tl_y; }
  double area() const { return width() * height(); }
  bool valid() const { return tl_x < br_x && tl_y < br_y; }

  bool operator==(const BoxGeometry&) const = default;
};

/// A scored keypoint in image coordinates. cell_row/cell_col record the
/// heatmap cell the point came from (-1 when it did not come from a heatmap);
/// they give peaks a deterministic row-major identity for tie breaking.
struct Keypoint {
  int class_id = 0;
  double x = 0, y = 0;
  double score = 0;
  std::optional<double> embedding;
  int cell_row = -1, cell_col = -1;
};

struct Detection {
  int64_t image_id = 0;
  int class_id = 0;
  BoxGeometry geometry;
  double score = 0;
};

struct GtBox {
  int class_id = 0;
  BoxGeometry geometry;
};

struct GtAnnotation {
  int64_t image_id = 0;
  int class_id = 0;
  BoxGeometry geometry;
};

/// One injected spurious corner pair: embedding-compatible top-left and
/// bottom-right peaks with no matching center peak.
struct NoisePeakPair {
  int class_id = 0;
  int tl_row = 0, tl_col = 0;
  int br_row = 0, br_col = 0;
  double tl_score = 0, br_score = 0;
  double embedding = 0;
};

/// Named grids rendered at one pyramid level.
struct LevelGrids {
  LevelSpec level;
  std::map<std::string, DenseGrid> grids;
};

/// A synthetic image: ground truth plus every rendered grid.
/// Single-resolution scenes hold one entry in levels. Multi-resolution scenes
/// hold one entry per pyramid level plus `shared` for the corner/center
/// heatmaps and offsets that all levels refine against.
struct Scene {
  int64_t image_id = 0;
  int width = 0, height = 0;
  int num_classes = 1;
  std::vector<GtBox> ground_truth;
  std::vector<LevelGrids> levels;
  std::optional<LevelGrids> shared;
  std::vector<NoisePeakPair> noise;
};

}  // namespace tdet
