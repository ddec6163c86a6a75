#include "tdet/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <tuple>

namespace tdet {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool candidate_before(const CandidateBox& a, const CandidateBox& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  return std::tie(a.geometry.tl_y, a.geometry.tl_x, a.geometry.br_y,
                  a.geometry.br_x) < std::tie(b.geometry.tl_y, b.geometry.tl_x,
                                              b.geometry.br_y, b.geometry.br_x);
}

void sort_and_cap(std::vector<CandidateBox>& candidates,
                  const DecodeConfig& config) {
  std::sort(candidates.begin(), candidates.end(), candidate_before);
  if (config.max_candidates > 0 &&
      candidates.size() > static_cast<std::size_t>(config.max_candidates))
    candidates.resize(static_cast<std::size_t>(config.max_candidates));
}

const DenseGrid& require_grid(const LevelGrids& level, const std::string& name) {
  auto it = level.grids.find(name);
  if (it == level.grids.end())
    throw ConfigError("level " + level.level.level_id + " is missing grid " +
                      name);
  return it->second;
}

std::vector<Detection> to_detections(const std::vector<CandidateBox>& candidates,
                                     int64_t image_id) {
  std::vector<Detection> dets;
  dets.reserve(candidates.size());
  for (const CandidateBox& c : candidates)
    dets.push_back(Detection{image_id, c.class_id, c.geometry, c.score});
  return dets;
}

/// Feature points of one branch at one level, ordered by
/// (score desc, class asc, row-major asc) and truncated to k_per_level.
std::vector<RefinedPrediction> branch_predictions(
    const LevelGrids& level, const std::string& cls_name,
    const std::string& reg_name, const std::vector<Keypoint>& corner_peaks,
    const std::vector<Keypoint>& center_peaks, const DecodeConfig& config) {
  const DenseGrid& cls = require_grid(level, cls_name);
  const DenseGrid& reg = require_grid(level, reg_name);
  contract(reg.channels() == 4,
           "decode: regression grid must have 4 channels (corner dx, dy, "
           "center dx, dy)");
  contract(cls.height() == reg.height() && cls.width() == reg.width(),
           "decode: classification and regression grids must share a shape");

  struct Cell {
    float score;
    int class_id, row, col;
  };
  std::vector<Cell> cells;
  for (int c = 0; c < cls.channels(); ++c)
    for (int i = 0; i < cls.height(); ++i)
      for (int j = 0; j < cls.width(); ++j) {
        const float v = cls.at(c, i, j);
        if (v > config.feature_score_floor) cells.push_back(Cell{v, c, i, j});
      }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  if (cells.size() > static_cast<std::size_t>(config.k_per_level))
    cells.resize(static_cast<std::size_t>(config.k_per_level));

  const double stride = level.level.stride;
  const double radius = config.snap_radius_factor * stride;
  std::vector<RefinedPrediction> preds;
  preds.reserve(cells.size());
  for (const Cell& cell : cells) {
    const double px = (cell.col + 0.5) * stride;
    const double py = (cell.row + 0.5) * stride;
    Keypoint corner;
    corner.class_id = cell.class_id;
    corner.x = px + reg.at(0, cell.row, cell.col);
    corner.y = py + reg.at(1, cell.row, cell.col);
    corner.score = cell.score;
    Keypoint center;
    center.class_id = cell.class_id;
    center.x = px + reg.at(2, cell.row, cell.col);
    center.y = py + reg.at(3, cell.row, cell.col);
    center.score = cell.score;
    if (config.refine) {
      corner = refine_keypoint(corner, corner_peaks, radius);
      center = refine_keypoint(center, center_peaks, radius);
    }
    preds.push_back(RefinedPrediction{cell.class_id, corner, center});
  }
  return preds;
}

/// Collapse exact duplicate predictions (same class, corner, and center).
/// Refinement snaps every feature point of one object to the same peaks, so
/// without this an object would spend the candidate budget many times over.
/// Keeps the highest corner score, first occurrence on ties.
std::vector<RefinedPrediction> dedupe_predictions(
    const std::vector<RefinedPrediction>& preds) {
  std::map<std::tuple<int, double, double, double, double>, std::size_t> seen;
  std::vector<RefinedPrediction> out;
  out.reserve(preds.size());
  for (const RefinedPrediction& p : preds) {
    const auto key =
        std::make_tuple(p.class_id, p.corner.x, p.corner.y, p.center.x,
                        p.center.y);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, out.size());
      out.push_back(p);
    } else if (p.corner.score > out[it->second].corner.score) {
      out[it->second] = p;
    }
  }
  return out;
}

}  // namespace

CentralRegion central_region(const BoxGeometry& box, int n) {
  contract(n >= 1 && n % 2 == 1, "central_region: n must be odd and >= 1");
  contract(box.valid(), "central_region: box must have positive extent");
  const double np1 = n + 1, nm1 = n - 1, inv = 1.0 / (2.0 * n);
  CentralRegion r;
  r.ctl_x = (np1 * box.tl_x + nm1 * box.br_x) * inv;
  r.ctl_y = (np1 * box.tl_y + nm1 * box.br_y) * inv;
  r.cbr_x = (nm1 * box.tl_x + np1 * box.br_x) * inv;
  r.cbr_y = (nm1 * box.tl_y + np1 * box.br_y) * inv;
  return r;
}

int select_n(const BoxGeometry& box, const DecodeConfig& config) {
  contract(box.valid(), "select_n: box must have positive extent");
  const double scale = std::max(box.width(), box.height());
  return scale < config.scale_split ? config.n_small : config.n_large;
}

std::vector<CandidateBox> pair_corners(const std::vector<Keypoint>& tl,
                                       const std::vector<Keypoint>& br,
                                       const DecodeConfig& config) {
  std::vector<CandidateBox> candidates;
  for (const Keypoint& t : tl) {
    contract(t.embedding.has_value(), "pair_corners: corner lacks an embedding");
    for (const Keypoint& b : br) {
      contract(b.embedding.has_value(),
               "pair_corners: corner lacks an embedding");
      if (t.class_id != b.class_id) continue;
      if (!(t.x < b.x && t.y < b.y)) continue;
      if (!(std::abs(*t.embedding - *b.embedding) < config.embed_threshold))
        continue;
      CandidateBox c;
      c.class_id = t.class_id;
      c.geometry = BoxGeometry{t.x, t.y, b.x, b.y};
      c.score = (t.score + b.score) / 2.0;
      c.tl_source = t;
      c.br_source = b;
      candidates.push_back(std::move(c));
    }
  }
  sort_and_cap(candidates, config);
  return candidates;
}

std::vector<CandidateBox> center_filter_sr(std::vector<CandidateBox> candidates,
                                           const std::vector<Keypoint>& centers,
                                           const DecodeConfig& config) {
  std::vector<CandidateBox> kept;
  for (CandidateBox& c : candidates) {
    const CentralRegion region =
        central_region(c.geometry, select_n(c.geometry, config));
    const Keypoint* best = nullptr;
    for (const Keypoint& ct : centers) {
      if (ct.class_id != c.class_id) continue;
      if (!region.contains(ct.x, ct.y)) continue;
      if (best == nullptr || ct.score > best->score) best = &ct;
    }
    if (best == nullptr) continue;
    c.score = (c.tl_source.score + c.br_source.score + best->score) / 3.0;
    c.center_sources = {*best};
    kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), candidate_before);
  return kept;
}

std::vector<Detection> decode_sr(const Scene& scene, const DecodeConfig& config,
                                 DecodeStats* stats) {
  if (scene.levels.empty())
    throw ConfigError("decode: scene has no rendered levels");
  const LevelGrids& level = scene.levels.front();
  const DenseGrid& tl_heat = require_grid(level, "tl_heat");
  const DenseGrid& br_heat = require_grid(level, "br_heat");
  const DenseGrid& ct_heat = require_grid(level, "ct_heat");
  const DenseGrid& tl_embed = require_grid(level, "tl_embed");
  const DenseGrid& br_embed = require_grid(level, "br_embed");
  const DenseGrid& tl_off = require_grid(level, "tl_off");
  const DenseGrid& br_off = require_grid(level, "br_off");
  const DenseGrid& ct_off = require_grid(level, "ct_off");
  const double stride = level.level.stride;

  const auto t_peaks = Clock::now();
  std::vector<Keypoint> tl_peaks = extract_peaks(tl_heat, config.peaks);
  std::vector<Keypoint> br_peaks = extract_peaks(br_heat, config.peaks);
  std::vector<Keypoint> ct_peaks = extract_peaks(ct_heat, config.peaks);
  for (Keypoint& p : tl_peaks)
    p.embedding = tl_embed.at(0, p.cell_row, p.cell_col);
  for (Keypoint& p : br_peaks)
    p.embedding = br_embed.at(0, p.cell_row, p.cell_col);
  tl_peaks = apply_offsets(std::move(tl_peaks), tl_off, stride);
  br_peaks = apply_offsets(std::move(br_peaks), br_off, stride);
  ct_peaks = apply_offsets(std::move(ct_peaks), ct_off, stride);
  if (stats) stats->peaks_seconds += seconds_since(t_peaks);

  const auto t_pair = Clock::now();
  std::vector<CandidateBox> candidates = pair_corners(tl_peaks, br_peaks, config);
  if (stats) stats->pairing_seconds += seconds_since(t_pair);

  if (config.center_filter) {
    const auto t_filter = Clock::now();
    candidates = center_filter_sr(std::move(candidates), ct_peaks, config);
    if (stats) stats->filter_seconds += seconds_since(t_filter);
  }
  return to_detections(candidates, scene.image_id);
}

std::vector<CandidateBox> pair_subboxes(
    const std::vector<RefinedPrediction>& tl,
    const std::vector<RefinedPrediction>& br, const DecodeConfig& config) {
  std::vector<CandidateBox> candidates;
  for (const RefinedPrediction& t : tl) {
    for (const RefinedPrediction& b : br) {
      if (t.class_id != b.class_id) continue;
      if (!(t.corner.x < b.corner.x && t.corner.y < b.corner.y)) continue;
      CandidateBox c;
      c.class_id = t.class_id;
      c.geometry = BoxGeometry{t.corner.x, t.corner.y, b.corner.x, b.corner.y};
      c.score = (t.corner.score + b.corner.score) / 2.0;
      c.tl_source = t.corner;
      c.br_source = b.corner;
      c.center_sources = {t.center, b.center};
      candidates.push_back(std::move(c));
    }
  }
  sort_and_cap(candidates, config);
  return candidates;
}

std::vector<CandidateBox> center_filter_mr(std::vector<CandidateBox> candidates,
                                           const DecodeConfig& config) {
  std::vector<CandidateBox> kept;
  for (CandidateBox& c : candidates) {
    const CentralRegion region =
        central_region(c.geometry, select_n(c.geometry, config));
    std::vector<Keypoint> inside;
    for (const Keypoint& ct : c.center_sources) {
      if (ct.class_id == c.class_id && region.contains(ct.x, ct.y))
        inside.push_back(ct);
    }
    const bool pass = config.require_both_centers
                          ? inside.size() == c.center_sources.size() &&
                                !c.center_sources.empty()
                          : !inside.empty();
    if (!pass) continue;
    double sum = c.tl_source.score + c.br_source.score;
    for (const Keypoint& ct : inside) sum += ct.score;
    c.score = sum / (2.0 + static_cast<double>(inside.size()));
    kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), candidate_before);
  return kept;
}

std::vector<Detection> decode_mr(const Scene& scene, const DecodeConfig& config,
                                 DecodeStats* stats) {
  if (scene.levels.empty())
    throw ConfigError("decode: scene has no rendered levels");
  if (!scene.shared)
    throw ConfigError("decode: scene is missing shared heatmaps");
  const LevelGrids& shared = *scene.shared;
  const DenseGrid& tl_heat = require_grid(shared, "tl_heat");
  const DenseGrid& br_heat = require_grid(shared, "br_heat");
  const DenseGrid& ct_heat = require_grid(shared, "ct_heat");
  const DenseGrid& tl_off = require_grid(shared, "tl_off");
  const DenseGrid& br_off = require_grid(shared, "br_off");
  const DenseGrid& ct_off = require_grid(shared, "ct_off");
  const double shared_stride = shared.level.stride;

  const auto t_peaks = Clock::now();
  const std::vector<Keypoint> tl_peaks = apply_offsets(
      extract_peaks(tl_heat, config.peaks), tl_off, shared_stride);
  const std::vector<Keypoint> br_peaks = apply_offsets(
      extract_peaks(br_heat, config.peaks), br_off, shared_stride);
  const std::vector<Keypoint> ct_peaks = apply_offsets(
      extract_peaks(ct_heat, config.peaks), ct_off, shared_stride);

  std::vector<std::vector<RefinedPrediction>> tl_by_level, br_by_level;
  for (const LevelGrids& level : scene.levels) {
    tl_by_level.push_back(branch_predictions(level, "cls_tl", "reg_tl",
                                             tl_peaks, ct_peaks, config));
    br_by_level.push_back(branch_predictions(level, "cls_br", "reg_br",
                                             br_peaks, ct_peaks, config));
  }
  if (stats) stats->peaks_seconds += seconds_since(t_peaks);

  const auto t_pair = Clock::now();
  std::vector<CandidateBox> candidates;
  if (config.per_level_pairing) {
    for (std::size_t l = 0; l < tl_by_level.size(); ++l) {
      std::vector<CandidateBox> level_candidates =
          pair_subboxes(dedupe_predictions(tl_by_level[l]),
                        dedupe_predictions(br_by_level[l]), config);
      candidates.insert(candidates.end(), level_candidates.begin(),
                        level_candidates.end());
    }
    sort_and_cap(candidates, config);
  } else {
    std::vector<RefinedPrediction> tl_pooled, br_pooled;
    for (const auto& v : tl_by_level)
      tl_pooled.insert(tl_pooled.end(), v.begin(), v.end());
    for (const auto& v : br_by_level)
      br_pooled.insert(br_pooled.end(), v.begin(), v.end());
    candidates = pair_subboxes(dedupe_predictions(tl_pooled),
                               dedupe_predictions(br_pooled), config);
  }
  if (stats) stats->pairing_seconds += seconds_since(t_pair);

  if (config.center_filter) {
    const auto t_filter = Clock::now();
    candidates = center_filter_mr(std::move(candidates), config);
    if (stats) stats->filter_seconds += seconds_since(t_filter);
  }
  return to_detections(candidates, scene.image_id);
}

}  // namespace tdet
