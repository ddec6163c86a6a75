#include "tdet/suppress.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace tdet {
namespace {

bool geometry_before(const Detection& a, const Detection& b) {
  return std::tie(a.geometry.tl_y, a.geometry.tl_x, a.geometry.br_y,
                  a.geometry.br_x, a.class_id) <
         std::tie(b.geometry.tl_y, b.geometry.tl_x, b.geometry.br_y,
                  b.geometry.br_x, b.class_id);
}

bool score_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return geometry_before(a, b);
}

/// Group detections by (image, class), preserving deterministic order.
std::map<std::pair<int64_t, int>, std::vector<Detection>> group_by_image_class(
    std::vector<Detection>& dets) {
  std::map<std::pair<int64_t, int>, std::vector<Detection>> groups;
  for (Detection& d : dets)
    groups[{d.image_id, d.class_id}].push_back(std::move(d));
  return groups;
}

std::vector<Detection> flatten(
    std::map<std::pair<int64_t, int>, std::vector<Detection>>& groups) {
  std::vector<Detection> out;
  for (auto& [key, dets] : groups)
    out.insert(out.end(), dets.begin(), dets.end());
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return score_before(a, b);
  });
  return out;
}

std::vector<Detection> decay_group(std::vector<Detection> work,
                                   const SuppressConfig& config) {
  std::vector<Detection> kept;
  while (!work.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < work.size(); ++i)
      if (score_before(work[i], work[best])) best = i;
    Detection top = work[best];
    work.erase(work.begin() + best);
    kept.push_back(top);

    std::vector<Detection> rest;
    rest.reserve(work.size());
    for (Detection& d : work) {
      const double overlap = iou(top.geometry, d.geometry);
      if (config.method == SuppressConfig::Method::SoftGaussian) {
        d.score *= std::exp(-(overlap * overlap) / config.sigma);
      } else if (overlap > config.iou_threshold) {
        d.score *= (1.0 - overlap);
      }
      if (d.score >= config.score_prune) rest.push_back(std::move(d));
    }
    work = std::move(rest);
  }
  return kept;
}

}  // namespace

double iou(const BoxGeometry& a, const BoxGeometry& b, bool* degenerate) {
  if (degenerate) *degenerate = false;
  const double area_a = std::max(0.0, a.br_x - a.tl_x) *
                        std::max(0.0, a.br_y - a.tl_y);
  const double area_b = std::max(0.0, b.br_x - b.tl_x) *
                        std::max(0.0, b.br_y - b.tl_y);
  if (area_a <= 0 || area_b <= 0) {
    if (degenerate) *degenerate = true;
    return 0;
  }
  const double iw =
      std::max(0.0, std::min(a.br_x, b.br_x) - std::max(a.tl_x, b.tl_x));
  const double ih =
      std::max(0.0, std::min(a.br_y, b.br_y) - std::max(a.tl_y, b.tl_y));
  const double inter = iw * ih;
  return inter / (area_a + area_b - inter);
}

std::vector<Detection> soft_nms(std::vector<Detection> dets,
                                const SuppressConfig& config) {
  contract(config.method != SuppressConfig::Method::Hard,
           "soft_nms: use hard_nms for hard suppression");
  auto groups = group_by_image_class(dets);
  for (auto& [key, group] : groups) group = decay_group(std::move(group), config);
  return flatten(groups);
}

std::vector<Detection> hard_nms(std::vector<Detection> dets,
                                const SuppressConfig& config) {
  auto groups = group_by_image_class(dets);
  for (auto& [key, group] : groups) {
    std::vector<Detection> work = std::move(group);
    std::sort(work.begin(), work.end(), score_before);
    std::vector<Detection> kept;
    for (const Detection& d : work) {
      bool suppressed = false;
      for (const Detection& k : kept) {
        if (iou(k.geometry, d.geometry) > config.iou_threshold) {
          suppressed = true;
          break;
        }
      }
      if (!suppressed) kept.push_back(d);
    }
    group = std::move(kept);
  }
  return flatten(groups);
}

std::vector<Detection> flip_merge(const std::vector<Detection>& original,
                                  const std::vector<Detection>& flipped,
                                  double image_width) {
  contract(image_width > 0, "flip_merge: image width must be positive");
  std::vector<Detection> merged = original;
  merged.reserve(original.size() + flipped.size());
  for (Detection d : flipped) {
    const double left = image_width - d.geometry.br_x;
    const double right = image_width - d.geometry.tl_x;
    d.geometry.tl_x = left;
    d.geometry.br_x = right;
    merged.push_back(d);
  }
  return merged;
}

std::vector<Detection> top_select(std::vector<Detection> dets, int top_n) {
  if (top_n <= 0) return dets;
  std::map<int64_t, std::vector<Detection>> by_image;
  for (Detection& d : dets) by_image[d.image_id].push_back(std::move(d));
  std::vector<Detection> out;
  for (auto& [image_id, group] : by_image) {
    std::sort(group.begin(), group.end(), score_before);
    if (group.size() > static_cast<std::size_t>(top_n))
      group.resize(static_cast<std::size_t>(top_n));
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

}  // namespace tdet
