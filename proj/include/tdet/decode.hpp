#pragma once

#include <vector>

#include "tdet/grid.hpp"
#include "tdet/keypoints.hpp"

namespace tdet {

struct DecodeConfig {
  PeakConfig peaks;                 // heatmap peak extraction (k = 70)
  double embed_threshold = 0.5;     // corners pair when |e_tl - e_br| < this
  int n_small = 3;                  // central-region divisor, small boxes
  int n_large = 5;                  // central-region divisor, large boxes
  double scale_split = 150;         // max side >= this selects n_large
  double snap_radius_factor = 2;    // refine radius = factor * level stride
  int k_per_level = 70;             // feature points kept per level per branch
  double feature_score_floor = 0;   // feature points must score strictly above
  bool require_both_centers = true; // multi-resolution filter needs both
  bool center_filter = true;        // disable for the pure-pairing baseline
  bool refine = true;               // snap regressed keypoints to heatmaps
  bool per_level_pairing = false;   // pair within each level instead of pooled
  int max_candidates = 1000;        // per-image cap before filtering
};

/// Scale-aware central region of a box. For divisor n (odd):
///   ctl_x = ((n+1) tl_x + (n-1) br_x) / (2n)   cbr_x mirrors the weights
/// and the y coordinates are analogous, giving the middle 1/n of the box in
/// each dimension. Containment is boundary inclusive.
struct CentralRegion {
  double ctl_x = 0, ctl_y = 0, cbr_x = 0, cbr_y = 0;
  bool contains(double x, double y) const {
    return ctl_x <= x && x <= cbr_x && ctl_y <= y && y <= cbr_y;
  }
};

CentralRegion central_region(const BoxGeometry& box, int n);

/// Central-region divisor for a box: n_small when max(width, height) is
/// below scale_split, n_large otherwise (the boundary takes n_large).
int select_n(const BoxGeometry& box, const DecodeConfig& config);

/// A corner pair that may become a detection. center_sources holds the
/// center keypoints that vouched for it (one after the single-resolution
/// filter, two predicted centers on the multi-resolution path).
struct CandidateBox {
  int class_id = 0;
  BoxGeometry geometry;
  double score = 0;
  Keypoint tl_source, br_source;
  std::vector<Keypoint> center_sources;
};

/// All same-class corner pairs with tl strictly above-left of br and
/// embedding distance |e_tl - e_br| below the threshold; both corners must
/// carry embeddings. Score is the corner mean. Result is sorted by
/// (score desc, class asc, geometry row-major asc) and capped at
/// max_candidates.
std::vector<CandidateBox> pair_corners(const std::vector<Keypoint>& tl,
                                       const std::vector<Keypoint>& br,
                                       const DecodeConfig& config);

/// Keep candidates whose central region contains at least one same-class
/// center keypoint; rescore survivors to (s_tl + s_br + s_center) / 3 using
/// the highest-scoring qualifying center.
std::vector<CandidateBox> center_filter_sr(std::vector<CandidateBox> candidates,
                                           const std::vector<Keypoint>& centers,
                                           const DecodeConfig& config);

/// Wall-clock seconds spent in each decode stage, for benchmarking.
struct DecodeStats {
  double peaks_seconds = 0;
  double pairing_seconds = 0;
  double filter_seconds = 0;
};

/// Decode one single-resolution scene level (corner heatmaps + embeddings +
/// offsets + center heatmap) into detections, unsuppressed.
std::vector<Detection> decode_sr(const Scene& scene, const DecodeConfig& config,
                                 DecodeStats* stats = nullptr);

/// One branch prediction after refinement: the regressed-and-snapped corner
/// plus the center the same feature point predicted.
struct RefinedPrediction {
  int class_id = 0;
  Keypoint corner;
  Keypoint center;
};

/// Pair refined top-left and bottom-right branch predictions (pooled across
/// levels) by class and corner ordering; score is the corner mean. Each
/// candidate records both predicted centers. Sorted and capped like
/// pair_corners.
std::vector<CandidateBox> pair_subboxes(
    const std::vector<RefinedPrediction>& tl,
    const std::vector<RefinedPrediction>& br, const DecodeConfig& config);

/// Keep candidates whose central region contains their predicted centers
/// (both when require_both_centers, else at least one); rescore survivors to
/// the mean of the corner and qualifying center scores.
std::vector<CandidateBox> center_filter_mr(std::vector<CandidateBox> candidates,
                                           const DecodeConfig& config);

/// Decode a multi-resolution scene (per-level classification + regression
/// grids, shared heatmaps) into detections, unsuppressed.
std::vector<Detection> decode_mr(const Scene& scene, const DecodeConfig& config,
                                 DecodeStats* stats = nullptr);

}  // namespace tdet
