#pragma once

#include <vector>

#include "tdet/grid.hpp"

namespace tdet {

struct SuppressConfig {
  enum class Method { SoftGaussian, SoftLinear, Hard };
  Method method = Method::SoftGaussian;
  double sigma = 0.5;          // gaussian decay exp(-iou^2 / sigma)
  double iou_threshold = 0.6;  // hard removal / linear decay trigger
  double score_prune = 0.001;  // drop detections decayed below this
  int top_n = 100;             // top_select budget
};

/// Intersection over union of two boxes. A zero-area (degenerate) operand
/// yields 0 and sets *degenerate when provided.
double iou(const BoxGeometry& a, const BoxGeometry& b,
           bool* degenerate = nullptr);

/// Score-decay suppression, applied independently per (image, class) group.
/// Repeatedly promotes the highest-scoring survivor (ties: row-major
/// geometry order) and decays the rest: gaussian multiplies every overlap by
/// exp(-iou^2 / sigma), linear multiplies overlaps above iou_threshold by
/// (1 - iou). Detections decayed below score_prune are dropped. Scores never
/// increase and geometry never changes.
std::vector<Detection> soft_nms(std::vector<Detection> dets,
                                const SuppressConfig& config);

/// Classic suppression per (image, class) group: keep the highest-scoring
/// box, remove every remaining box overlapping it above iou_threshold,
/// repeat. Survivors pairwise overlap at most iou_threshold within a group.
std::vector<Detection> hard_nms(std::vector<Detection> dets,
                                const SuppressConfig& config);

/// Merge detections of an image with detections of its horizontal mirror:
/// mirrored boxes are reflected back (x -> image_width - x, edges swapped)
/// and concatenated after the originals. Reflecting twice restores the
/// original geometry exactly.
std::vector<Detection> flip_merge(const std::vector<Detection>& original,
                                  const std::vector<Detection>& flipped,
                                  double image_width);

/// Keep the top_n highest-scoring detections per image (ties: row-major
/// geometry order, then class). top_n <= 0 keeps everything.
std::vector<Detection> top_select(std::vector<Detection> dets, int top_n);

}  // namespace tdet
