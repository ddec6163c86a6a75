#include "tdet/losses.hpp"

#include <algorithm>
#include <cmath>

namespace tdet {
namespace {

double sign_or_zero(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void append_scaled(std::vector<double>& out, const std::vector<double>& grad,
                   double weight) {
  for (double g : grad) out.push_back(weight * g);
}

const LossValue& require_component(const std::optional<LossValue>& c,
                                   const char* name) {
  if (!c.has_value())
    throw ContractError(std::string("total loss: missing component ") + name);
  return *c;
}

}  // namespace

LossValue focal_heatmap_loss(const std::vector<double>& pred,
                             const std::vector<double>& target) {
  contract(pred.size() == target.size(),
           "focal_heatmap_loss: pred and target sizes differ");
  std::size_t n_keypoints = 0;
  for (double t : target) {
    contract(t >= 0.0 && t <= 1.0,
             "focal_heatmap_loss: target values must lie in [0, 1]");
    if (t == 1.0) ++n_keypoints;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, n_keypoints));

  LossValue out;
  out.gradient.assign(pred.size(), 0.0);
  double sum = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double p = pred[k];
    contract(p > 0.0 && p < 1.0,
             "focal_heatmap_loss: pred values must lie strictly in (0, 1)");
    const double t = target[k];
    if (t == 1.0) {
      const double q = 1.0 - p;
      sum += q * q * std::log(p);
      out.gradient[k] = -(-2.0 * q * std::log(p) + q * q / p) / n;
    } else {
      const double w = std::pow(1.0 - t, 4.0);
      sum += w * p * p * std::log(1.0 - p);
      out.gradient[k] =
          -w * (2.0 * p * std::log(1.0 - p) - p * p / (1.0 - p)) / n;
    }
  }
  out.value = -sum / n;
  return out;
}

PullPushLoss pull_push_loss(const std::vector<std::array<double, 2>>& pairs) {
  const std::size_t n = pairs.size();
  PullPushLoss out;
  out.pull.gradient.assign(2 * n, 0.0);
  out.push.gradient.assign(2 * n, 0.0);
  if (n == 0) return out;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> means(n);
  double pull_sum = 0;
  for (std::size_t k = 0; k < n; ++k) {
    means[k] = (pairs[k][0] + pairs[k][1]) / 2.0;
    // (e_tl - m)^2 + (e_br - m)^2 reduces to d^2/2 with d = e_tl - e_br.
    const double d = pairs[k][0] - pairs[k][1];
    pull_sum += d * d / 2.0;
    out.pull.gradient[2 * k] = d * inv_n;
    out.pull.gradient[2 * k + 1] = -d * inv_n;
  }
  out.pull.value = pull_sum * inv_n;

  if (n >= 2) {
    const double norm = 1.0 / (static_cast<double>(n) * (n - 1.0));
    double push_sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        if (k == l) continue;
        const double diff = means[k] - means[l];
        const double hinge = 1.0 - std::abs(diff);
        if (hinge <= 0) continue;
        push_sum += hinge;
        const double s = sign_or_zero(diff);
        // d mean / d each embedding is 1/2.
        out.push.gradient[2 * k] += -s * norm * 0.5;
        out.push.gradient[2 * k + 1] += -s * norm * 0.5;
        out.push.gradient[2 * l] += s * norm * 0.5;
        out.push.gradient[2 * l + 1] += s * norm * 0.5;
      }
    }
    out.push.value = push_sum * norm;
  }
  return out;
}

LossValue offset_loss(const std::vector<double>& pred,
                      const std::vector<double>& target, bool plain_l1) {
  contract(pred.size() == target.size(),
           "offset_loss: pred and target sizes differ");
  LossValue out;
  out.gradient.assign(pred.size(), 0.0);
  if (pred.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  double sum = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double x = pred[k] - target[k];
    if (plain_l1) {
      sum += std::abs(x);
      out.gradient[k] = sign_or_zero(x) * inv_n;
    } else if (std::abs(x) < 1.0) {
      sum += x * x / 2.0;
      out.gradient[k] = x * inv_n;
    } else {
      sum += std::abs(x) - 0.5;
      out.gradient[k] = sign_or_zero(x) * inv_n;
    }
  }
  out.value = sum * inv_n;
  return out;
}

LossValue giou_loss(const BoxGeometry& pred, const BoxGeometry& target) {
  contract(pred.valid(), "giou_loss: pred box must have positive extent");
  contract(target.valid(), "giou_loss: target box must have positive extent");

  const double pw = pred.width(), ph = pred.height();
  const double area_p = pw * ph;
  const double area_t = target.width() * target.height();

  const double ix1 = std::max(pred.tl_x, target.tl_x);
  const double iy1 = std::max(pred.tl_y, target.tl_y);
  const double ix2 = std::min(pred.br_x, target.br_x);
  const double iy2 = std::min(pred.br_y, target.br_y);
  const double iw = std::max(0.0, ix2 - ix1);
  const double ih = std::max(0.0, iy2 - iy1);
  const double inter = iw * ih;
  const double uni = area_p + area_t - inter;

  const double cx1 = std::min(pred.tl_x, target.tl_x);
  const double cy1 = std::min(pred.tl_y, target.tl_y);
  const double cx2 = std::max(pred.br_x, target.br_x);
  const double cy2 = std::max(pred.br_y, target.br_y);
  const double cw = cx2 - cx1, ch = cy2 - cy1;
  const double enclose = cw * ch;

  LossValue out;
  out.value = 1.0 - (inter / uni - (enclose - uni) / enclose);

  // d area_p / d pred coordinate.
  const double dap[4] = {-ph, -pw, ph, pw};
  // Intersection edge ownership (ties resolve to the pred side; tests sample
  // away from kinks).
  const double active = (iw > 0 && ih > 0) ? 1.0 : 0.0;
  const double di_dx1 = (pred.tl_x >= target.tl_x) ? -ih * active : 0.0;
  const double di_dy1 = (pred.tl_y >= target.tl_y) ? -iw * active : 0.0;
  const double di_dx2 = (pred.br_x <= target.br_x) ? ih * active : 0.0;
  const double di_dy2 = (pred.br_y <= target.br_y) ? iw * active : 0.0;
  const double dinter[4] = {di_dx1, di_dy1, di_dx2, di_dy2};
  // Enclosing box edge ownership.
  const double dc_dx1 = (pred.tl_x <= target.tl_x) ? -ch : 0.0;
  const double dc_dy1 = (pred.tl_y <= target.tl_y) ? -cw : 0.0;
  const double dc_dx2 = (pred.br_x >= target.br_x) ? ch : 0.0;
  const double dc_dy2 = (pred.br_y >= target.br_y) ? cw : 0.0;
  const double denclose[4] = {dc_dx1, dc_dy1, dc_dx2, dc_dy2};

  out.gradient.assign(4, 0.0);
  for (int k = 0; k < 4; ++k) {
    const double duni = dap[k] - dinter[k];
    // GIoU = inter/uni - 1 + uni/enclose.
    const double dgiou = (dinter[k] * uni - inter * duni) / (uni * uni) +
                         (duni * enclose - uni * denclose[k]) /
                             (enclose * enclose);
    out.gradient[k] = -dgiou;
  }
  return out;
}

LossValue total_loss_sr(const SrLossComponents& components,
                        const LossWeightsSr& weights) {
  const LossValue& kp_co = require_component(components.corner_heatmap,
                                             "corner_heatmap");
  const LossValue& kp_ce = require_component(components.center_heatmap,
                                             "center_heatmap");
  const LossValue& pull = require_component(components.pull, "pull");
  const LossValue& push = require_component(components.push, "push");
  const LossValue& off_co = require_component(components.corner_offset,
                                              "corner_offset");
  const LossValue& off_ce = require_component(components.center_offset,
                                              "center_offset");

  LossValue out;
  out.value = kp_co.value + kp_ce.value + weights.alpha * pull.value +
              weights.beta * push.value +
              weights.gamma * (off_co.value + off_ce.value);
  append_scaled(out.gradient, kp_co.gradient, 1.0);
  append_scaled(out.gradient, kp_ce.gradient, 1.0);
  append_scaled(out.gradient, pull.gradient, weights.alpha);
  append_scaled(out.gradient, push.gradient, weights.beta);
  append_scaled(out.gradient, off_co.gradient, weights.gamma);
  append_scaled(out.gradient, off_ce.gradient, weights.gamma);
  return out;
}

LossValue total_loss_mr(const MrLossComponents& components,
                        const LossWeightsMr& weights) {
  const LossValue& cls_tl = require_component(components.cls_tl, "cls_tl");
  const LossValue& cls_br = require_component(components.cls_br, "cls_br");
  const LossValue& reg_tl = require_component(components.reg_tl, "reg_tl");
  const LossValue& reg_br = require_component(components.reg_br, "reg_br");
  const LossValue& kp_co = require_component(components.corner_heatmap,
                                             "corner_heatmap");
  const LossValue& kp_ce = require_component(components.center_heatmap,
                                             "center_heatmap");
  const LossValue& off_co = require_component(components.corner_offset,
                                              "corner_offset");
  const LossValue& off_ce = require_component(components.center_offset,
                                              "center_offset");

  const double reg_w = weights.alpha_hat / 2.0;
  LossValue out;
  out.value = (cls_tl.value + cls_br.value) / 2.0 +
              reg_w * (reg_tl.value + reg_br.value) +
              weights.beta_hat * (kp_co.value + kp_ce.value) +
              weights.gamma_hat * (off_co.value + off_ce.value);
  append_scaled(out.gradient, cls_tl.gradient, 0.5);
  append_scaled(out.gradient, cls_br.gradient, 0.5);
  append_scaled(out.gradient, reg_tl.gradient, reg_w);
  append_scaled(out.gradient, reg_br.gradient, reg_w);
  append_scaled(out.gradient, kp_co.gradient, weights.beta_hat);
  append_scaled(out.gradient, kp_ce.gradient, weights.beta_hat);
  append_scaled(out.gradient, off_co.gradient, weights.gamma_hat);
  append_scaled(out.gradient, off_ce.gradient, weights.gamma_hat);
  return out;
}

}  // namespace tdet
