#include "tdet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "json.hpp"
#include "tdet/common.hpp"
#include "tdet/suppress.hpp"

namespace tdet {

namespace {

// Global rank order: score first, then a total order on identity so equal
// scores rank identically on every run.
bool rank_before(const DetMatch& a, const DetMatch& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.image_id != b.image_id) return a.image_id < b.image_id;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  const BoxGeometry& g = a.box;
  const BoxGeometry& h = b.box;
  if (g.tl_y != h.tl_y) return g.tl_y < h.tl_y;
  if (g.tl_x != h.tl_x) return g.tl_x < h.tl_x;
  if (g.br_y != h.br_y) return g.br_y < h.br_y;
  return g.br_x < h.br_x;
}

// 101-point interpolated AP for one class. is_tp covers the class's counted,
// non-ignored detections in rank order; npig is its in-band GT count.
double ap_from_sequence(const std::vector<char>& is_tp, int npig) {
  std::vector<double> recall;
  std::vector<double> precision;
  recall.reserve(is_tp.size());
  precision.reserve(is_tp.size());
  int tp = 0;
  int fp = 0;
  for (char flag : is_tp) {
    if (flag) {
      ++tp;
    } else {
      ++fp;
    }
    recall.push_back(static_cast<double>(tp) / npig);
    precision.push_back(static_cast<double>(tp) / (tp + fp));
  }
  for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double sum = 0;
  for (int s = 0; s <= 100; ++s) {
    const double target = s / 100.0;
    auto it = std::lower_bound(recall.begin(), recall.end(), target);
    if (it != recall.end()) sum += precision[it - recall.begin()];
  }
  return sum / 101.0;
}

std::vector<double> iou_grid(int first_twentieth, int last_twentieth) {
  std::vector<double> out;
  for (int i = first_twentieth; i <= last_twentieth; ++i) {
    out.push_back(i / 20.0);
  }
  return out;
}

std::optional<double> mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0;
  for (double v : values) sum += v;
  return sum / values.size();
}

std::optional<double> mean_ap(const std::vector<Detection>& dets,
                              const std::vector<GtAnnotation>& gts,
                              const std::vector<double>& thresholds,
                              int max_dets, const std::optional<Band>& band) {
  std::vector<double> values;
  for (double t : thresholds) {
    auto ap = average_precision(match(dets, gts, t, max_dets, true, band));
    if (ap) values.push_back(*ap);
  }
  return mean_of(values);
}

std::optional<double> mean_ar(const std::vector<Detection>& dets,
                              const std::vector<GtAnnotation>& gts,
                              const std::vector<double>& thresholds,
                              int max_dets, bool class_aware,
                              const std::optional<Band>& band) {
  std::vector<double> values;
  for (double t : thresholds) {
    auto r = recall_value(match(dets, gts, t, max_dets, class_aware, band));
    if (r) values.push_back(*r);
  }
  return mean_of(values);
}

Band area_band(double lo, double hi, bool lo_inclusive, bool hi_inclusive) {
  return Band{Band::Measure::Area, lo, hi, lo_inclusive, hi_inclusive};
}

Band aspect_band(double lo, double hi) {
  return Band{Band::Measure::Aspect, lo, hi, true, false};
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double Band::value_of(const BoxGeometry& box) const {
  if (measure == Measure::Area) return box.area();
  const double w = box.width();
  const double h = box.height();
  const double shorter = std::min(w, h);
  if (shorter <= 0) return kInf;
  return std::max(w, h) / shorter;
}

bool Band::contains(const BoxGeometry& box) const {
  const double m = value_of(box);
  if (m < lo || (m == lo && !lo_inclusive)) return false;
  if (m > hi || (m == hi && !hi_inclusive)) return false;
  return true;
}

MatchResult match(const std::vector<Detection>& dets,
                  const std::vector<GtAnnotation>& gts, double iou_threshold,
                  int max_dets, bool class_aware,
                  const std::optional<Band>& band) {
  MatchResult out;
  out.iou_threshold = iou_threshold;
  out.class_aware = class_aware;
  out.gts = gts;
  out.gt_matched.assign(gts.size(), 0);
  out.gt_ignored.assign(gts.size(), 0);
  for (size_t g = 0; g < gts.size(); ++g) {
    if (band && !band->contains(gts[g].geometry)) out.gt_ignored[g] = 1;
  }

  out.dets.reserve(dets.size());
  for (const Detection& d : dets) {
    DetMatch m;
    m.image_id = d.image_id;
    m.class_id = d.class_id;
    m.score = d.score;
    m.box = d.geometry;
    out.dets.push_back(m);
  }
  std::sort(out.dets.begin(), out.dets.end(), rank_before);

  using GroupKey = std::pair<int64_t, int>;
  auto key_of = [class_aware](int64_t image_id, int class_id) {
    return GroupKey{image_id, class_aware ? class_id : -1};
  };
  std::map<GroupKey, std::vector<int>> det_groups;
  for (size_t i = 0; i < out.dets.size(); ++i) {
    det_groups[key_of(out.dets[i].image_id, out.dets[i].class_id)].push_back(
        static_cast<int>(i));
  }
  std::map<GroupKey, std::vector<int>> gt_groups;
  for (size_t g = 0; g < gts.size(); ++g) {
    gt_groups[key_of(gts[g].image_id, gts[g].class_id)].push_back(
        static_cast<int>(g));
  }

  for (auto& [key, det_indices] : det_groups) {
    if (max_dets > 0 && static_cast<int>(det_indices.size()) > max_dets) {
      for (size_t i = max_dets; i < det_indices.size(); ++i) {
        out.dets[det_indices[i]].counted = false;
      }
      det_indices.resize(max_dets);
    }

    // Visit GT with in-band boxes first so an ignored match is only taken
    // when no in-band box clears the threshold.
    std::vector<int> gt_order;
    auto it = gt_groups.find(key);
    if (it != gt_groups.end()) {
      for (int g : it->second) {
        if (!out.gt_ignored[g]) gt_order.push_back(g);
      }
      for (int g : it->second) {
        if (out.gt_ignored[g]) gt_order.push_back(g);
      }
    }

    for (int di : det_indices) {
      DetMatch& det = out.dets[di];
      int best = -1;
      double best_iou = 0;
      for (int g : gt_order) {
        if (out.gt_matched[g]) continue;
        if (best != -1 && !out.gt_ignored[best] && out.gt_ignored[g]) break;
        const double v = iou(det.box, out.gts[g].geometry);
        if (v < iou_threshold) continue;
        if (best == -1 || v > best_iou) {
          best = g;
          best_iou = v;
        }
      }
      if (best != -1) {
        out.gt_matched[best] = 1;
        det.gt_index = best;
        det.iou = best_iou;
        det.ignored = out.gt_ignored[best] != 0;
      } else if (band && !band->contains(det.box)) {
        det.ignored = true;
      }
    }
  }
  return out;
}

std::optional<double> average_precision(const MatchResult& matches) {
  std::map<int, int> npig;
  for (size_t g = 0; g < matches.gts.size(); ++g) {
    const int key = matches.class_aware ? matches.gts[g].class_id : 0;
    npig[key] += matches.gt_ignored[g] ? 0 : 1;
  }

  std::map<int, std::vector<char>> sequences;
  for (const DetMatch& det : matches.dets) {
    if (!det.counted || det.ignored) continue;
    const int key = matches.class_aware ? det.class_id : 0;
    if (npig.find(key) == npig.end()) continue;  // no GT of this class at all
    sequences[key].push_back(det.gt_index >= 0 ? 1 : 0);
  }

  std::vector<double> per_class;
  for (const auto& [key, count] : npig) {
    if (count == 0) continue;
    auto it = sequences.find(key);
    static const std::vector<char> kEmpty;
    per_class.push_back(
        ap_from_sequence(it == sequences.end() ? kEmpty : it->second, count));
  }
  return mean_of(per_class);
}

std::optional<double> recall_value(const MatchResult& matches) {
  std::map<int, std::pair<int, int>> counts;  // class -> (matched, in-band)
  for (size_t g = 0; g < matches.gts.size(); ++g) {
    if (matches.gt_ignored[g]) continue;
    const int key = matches.class_aware ? matches.gts[g].class_id : 0;
    auto& entry = counts[key];
    entry.second += 1;
    entry.first += matches.gt_matched[g] ? 1 : 0;
  }
  std::vector<double> per_class;
  for (const auto& [key, entry] : counts) {
    per_class.push_back(static_cast<double>(entry.first) / entry.second);
  }
  return mean_of(per_class);
}

std::optional<double> af_rate(const std::vector<Detection>& dets,
                              const std::vector<GtAnnotation>& gts) {
  auto ap = mean_ap(dets, gts, iou_grid(1, 10), 100, std::nullopt);
  if (!ap) return std::nullopt;
  return 1.0 - *ap;
}

std::optional<double> af_rate_at(const std::vector<Detection>& dets,
                                 const std::vector<GtAnnotation>& gts,
                                 double iou_threshold) {
  auto ap = average_precision(match(dets, gts, iou_threshold, 100, true));
  if (!ap) return std::nullopt;
  return 1.0 - *ap;
}

std::optional<double> af_rate_band(const std::vector<Detection>& dets,
                                   const std::vector<GtAnnotation>& gts,
                                   const Band& band) {
  auto ap = mean_ap(dets, gts, iou_grid(1, 10), 100, band);
  if (!ap) return std::nullopt;
  return 1.0 - *ap;
}

GeometryRecall geometry_recall(const std::vector<Detection>& dets,
                               const std::vector<GtAnnotation>& gts,
                               int max_dets) {
  const std::vector<double> thresholds = iou_grid(10, 19);
  GeometryRecall out;
  out.overall = mean_ar(dets, gts, thresholds, max_dets, false, std::nullopt);
  const double area_edges[5] = {96.0 * 96.0, 200.0 * 200.0, 300.0 * 300.0,
                                400.0 * 400.0, kInf};
  for (int i = 0; i < 4; ++i) {
    out.by_area[i] =
        mean_ar(dets, gts, thresholds, max_dets, false,
                area_band(area_edges[i], area_edges[i + 1], false, true));
  }
  for (int i = 0; i < 4; ++i) {
    const double lo = 5.0 + i;
    const double hi = i == 3 ? kInf : lo + 1.0;
    out.by_aspect[i] =
        mean_ar(dets, gts, thresholds, max_dets, false, aspect_band(lo, hi));
  }
  return out;
}

EvalReport evaluate(const std::vector<Detection>& dets,
                    const std::vector<GtAnnotation>& gts) {
  const std::vector<double> hi = iou_grid(10, 19);
  const Band small = area_band(0, 32.0 * 32.0, true, false);
  const Band medium = area_band(32.0 * 32.0, 96.0 * 96.0, true, false);
  const Band large = area_band(96.0 * 96.0, kInf, true, false);

  EvalReport r;
  r.ap = mean_ap(dets, gts, hi, 100, std::nullopt);
  r.ap50 = mean_ap(dets, gts, {0.5}, 100, std::nullopt);
  r.ap75 = mean_ap(dets, gts, {0.75}, 100, std::nullopt);
  r.ap_small = mean_ap(dets, gts, hi, 100, small);
  r.ap_medium = mean_ap(dets, gts, hi, 100, medium);
  r.ap_large = mean_ap(dets, gts, hi, 100, large);

  r.ar1 = mean_ar(dets, gts, hi, 1, true, std::nullopt);
  r.ar10 = mean_ar(dets, gts, hi, 10, true, std::nullopt);
  r.ar100 = mean_ar(dets, gts, hi, 100, true, std::nullopt);
  r.ar_small = mean_ar(dets, gts, hi, 100, true, small);
  r.ar_medium = mean_ar(dets, gts, hi, 100, true, medium);
  r.ar_large = mean_ar(dets, gts, hi, 100, true, large);

  r.af = af_rate(dets, gts);
  r.af5 = af_rate_at(dets, gts, 0.05);
  r.af25 = af_rate_at(dets, gts, 0.25);
  r.af50 = af_rate_at(dets, gts, 0.50);
  r.af_small = af_rate_band(dets, gts, small);
  r.af_medium = af_rate_band(dets, gts, medium);
  r.af_large = af_rate_band(dets, gts, large);

  r.geometry = geometry_recall(dets, gts);
  return r;
}

namespace {

std::string fmt_pct(const std::optional<double>& value) {
  char buf[32];
  if (!value) {
    std::snprintf(buf, sizeof(buf), "%7s", "-");
  } else {
    std::snprintf(buf, sizeof(buf), "%6.1f%%", 100.0 * *value);
  }
  return buf;
}

void table_row(std::string& out,
               const std::vector<std::pair<std::string, std::optional<double>>>&
                   cells) {
  out += " ";
  for (const auto& [label, value] : cells) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %-7s%s", label.c_str(),
                  fmt_pct(value).c_str());
    out += buf;
  }
  out += "\n";
}

}  // namespace

std::string report_table(const EvalReport& r) {
  std::string out;
  out += "detection quality @ IoU 0.50:0.95\n";
  table_row(out, {{"AP", r.ap}, {"AP50", r.ap50}, {"AP75", r.ap75}});
  table_row(out, {{"AP_S", r.ap_small},
                  {"AP_M", r.ap_medium},
                  {"AP_L", r.ap_large}});
  table_row(out, {{"AR_1", r.ar1}, {"AR_10", r.ar10}, {"AR_100", r.ar100}});
  table_row(out, {{"AR_S", r.ar_small},
                  {"AR_M", r.ar_medium},
                  {"AR_L", r.ar_large}});
  out += "false rate @ IoU 0.05:0.50\n";
  table_row(out,
            {{"AF", r.af}, {"AF5", r.af5}, {"AF25", r.af25}, {"AF50", r.af50}});
  table_row(out, {{"AF_S", r.af_small},
                  {"AF_M", r.af_medium},
                  {"AF_L", r.af_large}});
  out += "geometry recall @ IoU 0.50:0.95, 1000 proposals\n";
  table_row(out, {{"AR", r.geometry.overall}});
  table_row(out, {{"AR_96+", r.geometry.by_area[0]},
                  {"AR_200+", r.geometry.by_area[1]},
                  {"AR_300+", r.geometry.by_area[2]},
                  {"AR_400+", r.geometry.by_area[3]}});
  table_row(out, {{"AR_5:1", r.geometry.by_aspect[0]},
                  {"AR_6:1", r.geometry.by_aspect[1]},
                  {"AR_7:1", r.geometry.by_aspect[2]},
                  {"AR_8:1", r.geometry.by_aspect[3]}});
  return out;
}

std::string report_json(const EvalReport& r) {
  using json = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  json j;
  j["ap"] = opt(r.ap);
  j["ap50"] = opt(r.ap50);
  j["ap75"] = opt(r.ap75);
  j["ap_small"] = opt(r.ap_small);
  j["ap_medium"] = opt(r.ap_medium);
  j["ap_large"] = opt(r.ap_large);
  j["ar1"] = opt(r.ar1);
  j["ar10"] = opt(r.ar10);
  j["ar100"] = opt(r.ar100);
  j["ar_small"] = opt(r.ar_small);
  j["ar_medium"] = opt(r.ar_medium);
  j["ar_large"] = opt(r.ar_large);
  j["af"] = opt(r.af);
  j["af5"] = opt(r.af5);
  j["af25"] = opt(r.af25);
  j["af50"] = opt(r.af50);
  j["af_small"] = opt(r.af_small);
  j["af_medium"] = opt(r.af_medium);
  j["af_large"] = opt(r.af_large);
  json geo;
  geo["ar"] = opt(r.geometry.overall);
  geo["area_bands"] = json::array();
  for (const auto& v : r.geometry.by_area) geo["area_bands"].push_back(opt(v));
  geo["aspect_bands"] = json::array();
  for (const auto& v : r.geometry.by_aspect) {
    geo["aspect_bands"].push_back(opt(v));
  }
  j["geometry"] = geo;
  return j.dump(2) + "\n";
}

}  // namespace tdet
