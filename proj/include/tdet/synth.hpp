#pragma once

#include <vector>

#include "tdet/grid.hpp"

namespace tdet {

/// Deterministic scene generator parameters. Identical specs (seed included)
/// produce byte-identical scenes.
struct SceneSpec {
  uint64_t seed = 0;
  int64_t image_id = 0;
  int width = 512, height = 512;
  int min_boxes = 3, max_boxes = 8;
  int num_classes = 20;
  double min_size = 48, max_size = 320;       // longest side, pixels
  double aspect_min = 1.0, aspect_max = 4.0;  // longest / shortest side
  /// Probability that a box is placed as a same-class overlapping partner of
  /// the previous box. Overlap makes score decay under soft suppression
  /// observable, which the spurious-pair ablation needs.
  double overlap_fraction = 0.0;
  int noise_pairs = 0;
  double noise_score_min = 0.55, noise_score_max = 0.95;
  int sr_stride = 4;
  std::vector<LevelSpec> mr_levels;  // empty selects default_mr_levels()
  /// Apply multi-resolution placement constraints: keypoint-cell separation
  /// at the shared heatmap stride, no cross-box center ambiguity, no
  /// regression-cell collisions.
  bool for_mr = false;
  /// Cycle box sizes through the pyramid level buckets so every level is
  /// exercised.
  bool spread_mr_levels = false;
};

/// Pyramid levels P3..P7 with strides 8, 16, 32, 64, 128.
std::vector<LevelSpec> default_mr_levels();

/// Index of the level a box belongs to: the largest l with
/// stride_l <= max_side / 8, clamped to the available range.
int assign_level(const BoxGeometry& box, const std::vector<LevelSpec>& levels);

/// Largest radius (heatmap cells) such that displacing both corners of a
/// w x h cell box by up to r in every axis keeps IoU with the original of at
/// least min_overlap. Found by bisection over the worst corner displacement.
double gaussian_radius(double width_cells, double height_cells,
                       double min_overlap = 0.3);

/// Sample box geometry only; grids come from the render calls. Boxes are
/// placed so that decoding is unambiguous: keypoint cells of equal type stay
/// at Chebyshev distance >= 2 (peaks survive local-max extraction and never
/// share offset or embedding cells), coordinates are quantized to quarter
/// pixels (offsets stay exact in float32), and every box fits inside the
/// image with margin. Throws ConfigError when the spec is impossible or
/// placement keeps failing.
Scene generate_scene(const SceneSpec& spec);

/// Render the single-resolution grid set at `stride` onto the scene: per-
/// class corner/center heatmaps (peak 1.0 plus gaussian falloff with sigma =
/// radius / 3 within the 0.3-overlap radius), exact fractional offsets at
/// keypoint cells, and a distinct per-object embedding at both corners.
void render_sr(Scene& scene, int stride);

/// Render the multi-resolution grid set: per-level classification and
/// regression grids for the top-left and bottom-right branches, plus shared
/// corner/center heatmaps and offsets at the finest stride (rendered as in
/// render_sr, without embeddings). Each box labels the feature points inside
/// its sub-box (the box half toward that branch's corner, split at the
/// geometric center); the cell under the sub-box midpoint is always labeled
/// with score 1.0 so every box stays decodable, other cells decay with
/// distance. Contested cells go to the smallest box.
void render_mr(Scene& scene, const std::vector<LevelSpec>& levels);

/// Inject spec.noise_pairs spurious corner pairs into the single-resolution
/// grids: same-class top-left and bottom-right peaks with matching
/// embeddings and no center peak, each a strict new local maximum that masks
/// nothing, whose central region contains no same-class ground-truth center.
/// Pairs are recorded in scene.noise.
void inject_noise(Scene& scene, const SceneSpec& spec);

}  // namespace tdet
