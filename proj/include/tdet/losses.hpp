#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tdet/grid.hpp"

namespace tdet {

/// A scalar loss plus its analytic gradient with respect to the
/// differentiated inputs, flattened in input order.
struct LossValue {
  double value = 0;
  std::vector<double> gradient;
};

/// Penalty-reduced pixelwise focal loss over a heatmap. target == 1 marks
/// keypoint cells; other cells carry gaussian penalty-reduction weights in
/// [0, 1). With N = max(1, #keypoint cells):
///   -1/N * sum[ target==1 : (1-p)^2 log p
///               else      : (1-target)^4 p^2 log(1-p) ]
/// pred values must lie strictly inside (0, 1). Gradient is per pred cell.
LossValue focal_heatmap_loss(const std::vector<double>& pred,
                             const std::vector<double>& target);

struct PullPushLoss {
  LossValue pull;
  LossValue push;
};

/// Embedding losses over per-object corner pairs (e_tl, e_br). With object
/// means m_k = (e_tl + e_br) / 2:
///   pull = 1/N sum_k [(e_tl - m_k)^2 + (e_br - m_k)^2]
///   push = 1/(N(N-1)) sum_{k != l} max(0, 1 - |m_k - m_l|)
/// Gradients run over the flattened embeddings [tl_0, br_0, tl_1, br_1, ...].
/// Fewer than two objects give push = 0.
PullPushLoss pull_push_loss(const std::vector<std::array<double, 2>>& pairs);

/// Mean elementwise offset regression loss. Smooth-l1 per element by
/// default (x^2/2 below 1, |x| - 1/2 above); plain_l1 switches to |x|.
LossValue offset_loss(const std::vector<double>& pred,
                      const std::vector<double>& target, bool plain_l1 = false);

/// 1 - GIoU of two valid boxes, in [0, 2]; exactly 0 for identical boxes.
/// GIoU = IoU - |C \ (A u B)| / |C| with C the smallest enclosing box.
/// Gradient is over the four pred coordinates (tl_x, tl_y, br_x, br_y).
LossValue giou_loss(const BoxGeometry& pred, const BoxGeometry& target);

struct LossWeightsSr {
  double alpha = 0.1;  // pull
  double beta = 0.1;   // push
  double gamma = 1.0;  // offsets
};

struct LossWeightsMr {
  double alpha_hat = 2.0;   // box regression (halved in the sum)
  double beta_hat = 0.25;   // keypoint heatmaps
  double gamma_hat = 1.0;   // offsets
};

/// Components of the single-resolution training objective. All required.
struct SrLossComponents {
  std::optional<LossValue> corner_heatmap;  // l_kp_co
  std::optional<LossValue> center_heatmap;  // l_kp_ce
  std::optional<LossValue> pull;
  std::optional<LossValue> push;
  std::optional<LossValue> corner_offset;   // l_off_co
  std::optional<LossValue> center_offset;   // l_off_ce
};

/// l_kp_co + l_kp_ce + alpha*pull + beta*push + gamma*(l_off_co + l_off_ce).
/// Gradient is the component gradients concatenated in declaration order,
/// each scaled by its weight.
LossValue total_loss_sr(const SrLossComponents& components,
                        const LossWeightsSr& weights);

/// Components of the multi-resolution training objective. All required.
struct MrLossComponents {
  std::optional<LossValue> cls_tl;
  std::optional<LossValue> cls_br;
  std::optional<LossValue> reg_tl;
  std::optional<LossValue> reg_br;
  std::optional<LossValue> corner_heatmap;
  std::optional<LossValue> center_heatmap;
  std::optional<LossValue> corner_offset;
  std::optional<LossValue> center_offset;
};

/// (cls_tl + cls_br)/2 + (alpha_hat/2)*(reg_tl + reg_br)
/// + beta_hat*(l_kp_co + l_kp_ce) + gamma_hat*(l_off_co + l_off_ce).
/// Gradient concatenated as in total_loss_sr.
LossValue total_loss_mr(const MrLossComponents& components,
                        const LossWeightsMr& weights);

}  // namespace tdet
