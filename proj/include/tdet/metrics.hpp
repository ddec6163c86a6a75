#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tdet/grid.hpp"

namespace tdet {

/// A range restriction on a box measure used for scale- or shape-banded
/// evaluation. Ground truth outside the band is ignored (matching it costs
/// nothing); detections that stay unmatched and fall outside the band are
/// ignored rather than counted as false positives.
struct Band {
  enum class Measure { Area, Aspect };
  Measure measure = Measure::Area;
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();
  bool lo_inclusive = true;
  bool hi_inclusive = false;

  double value_of(const BoxGeometry& box) const;
  bool contains(const BoxGeometry& box) const;
};

/// One detection after matching, in global rank order.
struct DetMatch {
  int64_t image_id = 0;
  int class_id = 0;
  double score = 0;
  BoxGeometry box;
  int gt_index = -1;     // index into MatchResult::gts, -1 when unmatched
  double iou = 0;
  bool ignored = false;  // matched an ignored GT or out-of-band unmatched
  bool counted = true;   // within the per-group max_dets budget
};

struct MatchResult {
  std::vector<DetMatch> dets;  // sorted by (score desc, image, class, geometry)
  std::vector<GtAnnotation> gts;
  std::vector<char> gt_matched;
  std::vector<char> gt_ignored;
  double iou_threshold = 0.5;
  bool class_aware = true;
};

/// Greedy matching, grouped per image (and per class when class_aware).
/// Detections are visited in descending score order (deterministic
/// tie order) with at most max_dets per group; each takes the unmatched GT
/// with the highest IoU >= iou_threshold, ties resolved to the lowest GT
/// index. In-band GT is preferred over ignored GT at any IoU.
MatchResult match(const std::vector<Detection>& dets,
                  const std::vector<GtAnnotation>& gts, double iou_threshold,
                  int max_dets, bool class_aware,
                  const std::optional<Band>& band = std::nullopt);

/// 101-point interpolated average precision, averaged over the classes that
/// have ground truth (pooled into one class when the match was class
/// agnostic). No ground truth at all: absent.
std::optional<double> average_precision(const MatchResult& matches);

/// Matched fraction of in-band ground truth, averaged over classes with
/// ground truth.
std::optional<double> recall_value(const MatchResult& matches);

/// False rate over the low IoU grid 0.05:0.05:0.50: 1 - mean AP. Measures
/// gross localization failures; a detector can only lower it by not emitting
/// boxes that miss everything.
std::optional<double> af_rate(const std::vector<Detection>& dets,
                              const std::vector<GtAnnotation>& gts);

/// 1 - AP at a single IoU threshold.
std::optional<double> af_rate_at(const std::vector<Detection>& dets,
                                 const std::vector<GtAnnotation>& gts,
                                 double iou_threshold);

/// Scale-banded false rate over the low IoU grid.
std::optional<double> af_rate_band(const std::vector<Detection>& dets,
                                   const std::vector<GtAnnotation>& gts,
                                   const Band& band);

/// Class- and score-agnostic recall of box geometry at a 1000-proposal
/// budget, averaged over the IoU grid 0.5:0.05:0.95, overall and banded by
/// ground-truth area ((96^2, 200^2], (200^2, 300^2], (300^2, 400^2],
/// (400^2, inf)) and aspect ratio ([5,6), [6,7), [7,8), [8, inf)).
struct GeometryRecall {
  std::optional<double> overall;
  std::array<std::optional<double>, 4> by_area;
  std::array<std::optional<double>, 4> by_aspect;
};

GeometryRecall geometry_recall(const std::vector<Detection>& dets,
                               const std::vector<GtAnnotation>& gts,
                               int max_dets = 1000);

/// Full evaluation: AP family over IoU 0.5:0.05:0.95 (100-detection budget),
/// AR at 1/10/100 detections, scale bands (area < 32^2, 32^2..96^2, > 96^2),
/// the false-rate family over IoU 0.05:0.05:0.50, and geometry recall.
/// Every value lies in [0, 1]; absent values mean no ground truth to measure.
struct EvalReport {
  std::optional<double> ap, ap50, ap75;
  std::optional<double> ap_small, ap_medium, ap_large;
  std::optional<double> ar1, ar10, ar100;
  std::optional<double> ar_small, ar_medium, ar_large;
  std::optional<double> af, af5, af25, af50;
  std::optional<double> af_small, af_medium, af_large;
  GeometryRecall geometry;
};

EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<GtAnnotation>& gts);

/// Fixed-width text tables, values as percentages with one decimal.
std::string report_table(const EvalReport& report);

/// JSON object with raw [0, 1] fractions; absent values serialize as null.
std::string report_json(const EvalReport& report);

}  // namespace tdet
