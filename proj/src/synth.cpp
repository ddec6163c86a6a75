#include "tdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tdet/decode.hpp"
#include "tdet/pooling.hpp"
#include "tdet/suppress.hpp"

namespace tdet {
namespace {

constexpr double kQuantum = 0.25;  // quarter-pixel grid keeps offsets f32 exact
constexpr double kMargin = 1.0;    // keep boxes off the image border
constexpr int kPlaceAttempts = 2000;
constexpr double kFalloffFloor = 1e-6;

double quantize(double v) { return std::round(v / kQuantum) * kQuantum; }

int cell_of(double coord, int stride) {
  return static_cast<int>(std::floor(coord / stride));
}

struct KeypointCells {
  int tl_row, tl_col, br_row, br_col, ct_row, ct_col;
};

KeypointCells cells_at(const BoxGeometry& b, int stride) {
  const double cx = (b.tl_x + b.br_x) / 2.0;
  const double cy = (b.tl_y + b.br_y) / 2.0;
  return KeypointCells{cell_of(b.tl_y, stride), cell_of(b.tl_x, stride),
                       cell_of(b.br_y, stride), cell_of(b.br_x, stride),
                       cell_of(cy, stride),     cell_of(cx, stride)};
}

bool cells_apart(int r1, int c1, int r2, int c2) {
  return std::max(std::abs(r1 - r2), std::abs(c1 - c2)) >= 2;
}

/// Worst IoU over the 16 corner-sign displacement extremes.
double worst_displaced_iou(double w, double h, double r) {
  const BoxGeometry base{0, 0, w, h};
  double worst = 1.0;
  for (int mask = 0; mask < 16; ++mask) {
    const double sx = (mask & 1) ? r : -r;
    const double sy = (mask & 2) ? r : -r;
    const double ux = (mask & 4) ? r : -r;
    const double uy = (mask & 8) ? r : -r;
    const BoxGeometry moved{sx, sy, w + ux, h + uy};
    if (!moved.valid()) return 0.0;
    worst = std::min(worst, iou(base, moved));
  }
  return worst;
}

/// Sub-box of `box` on the side of `corner`, split at the geometric center.
BoxGeometry sub_box(const BoxGeometry& box, Corner corner) {
  const double cx = (box.tl_x + box.br_x) / 2.0;
  const double cy = (box.tl_y + box.br_y) / 2.0;
  if (corner == Corner::TopLeft) return BoxGeometry{box.tl_x, box.tl_y, cx, cy};
  return BoxGeometry{cx, cy, box.br_x, box.br_y};
}

const std::vector<LevelSpec>& effective_levels(const SceneSpec& spec,
                                               std::vector<LevelSpec>& storage) {
  if (!spec.mr_levels.empty()) return spec.mr_levels;
  storage = default_mr_levels();
  return storage;
}

/// Stride the placement constraints are enforced at.
int enforcement_stride(const SceneSpec& spec,
                       const std::vector<LevelSpec>& levels) {
  return spec.for_mr ? levels.front().stride : spec.sr_stride;
}

void render_gaussian_peak(DenseGrid& heat, int channel, int row, int col,
                          double radius) {
  heat.at(channel, row, col) = 1.0f;
  const int reach = static_cast<int>(radius);
  if (reach < 1) return;
  const double sigma = radius / 3.0;
  const double denom = 2.0 * sigma * sigma;
  for (int di = -reach; di <= reach; ++di) {
    for (int dj = -reach; dj <= reach; ++dj) {
      if (di == 0 && dj == 0) continue;
      const int i = row + di, j = col + dj;
      if (i < 0 || i >= heat.height() || j < 0 || j >= heat.width()) continue;
      const double v = std::exp(-(di * di + dj * dj) / denom);
      if (v < kFalloffFloor) continue;
      heat.at(channel, i, j) =
          std::max(heat.at(channel, i, j), static_cast<float>(v));
    }
  }
}

void render_point(DenseGrid& heat, DenseGrid& offsets, int class_id, double x,
                  double y, int stride, double radius) {
  const int row = cell_of(y, stride);
  const int col = cell_of(x, stride);
  render_gaussian_peak(heat, class_id, row, col, radius);
  offsets.at(0, row, col) = static_cast<float>(x / stride - col);
  offsets.at(1, row, col) = static_cast<float>(y / stride - row);
}

/// Central region with the default divisor rule; the oracle's placement
/// guarantees are stated against these defaults.
CentralRegion default_region(const BoxGeometry& box) {
  static const DecodeConfig defaults;
  return central_region(box, select_n(box, defaults));
}

/// True when pairing A's top-left corner with B's bottom-right corner would
/// produce a candidate that both boxes' centers validate.
bool cross_pair_ambiguous(const BoxGeometry& a, const BoxGeometry& b) {
  const BoxGeometry cross{a.tl_x, a.tl_y, b.br_x, b.br_y};
  if (!cross.valid()) return false;
  const CentralRegion region = default_region(cross);
  const double acx = (a.tl_x + a.br_x) / 2.0, acy = (a.tl_y + a.br_y) / 2.0;
  const double bcx = (b.tl_x + b.br_x) / 2.0, bcy = (b.tl_y + b.br_y) / 2.0;
  return region.contains(acx, acy) && region.contains(bcx, bcy);
}

int midpoint_cell_row(const BoxGeometry& sub, int stride, int grid_h) {
  const int r = cell_of((sub.tl_y + sub.br_y) / 2.0, stride);
  return std::clamp(r, 0, grid_h - 1);
}

int midpoint_cell_col(const BoxGeometry& sub, int stride, int grid_w) {
  const int c = cell_of((sub.tl_x + sub.br_x) / 2.0, stride);
  return std::clamp(c, 0, grid_w - 1);
}

}  // namespace

std::vector<LevelSpec> default_mr_levels() {
  return {{"P3", 8}, {"P4", 16}, {"P5", 32}, {"P6", 64}, {"P7", 128}};
}

int assign_level(const BoxGeometry& box, const std::vector<LevelSpec>& levels) {
  contract(!levels.empty(), "assign_level: no levels");
  const double key = std::max(box.width(), box.height()) / 8.0;
  int chosen = 0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].stride <= key) chosen = static_cast<int>(l);
  }
  return chosen;
}

double gaussian_radius(double width_cells, double height_cells,
                       double min_overlap) {
  contract(width_cells > 0 && height_cells > 0,
           "gaussian_radius: box must have positive extent");
  contract(min_overlap > 0 && min_overlap < 1,
           "gaussian_radius: overlap must lie in (0, 1)");
  double lo = 0.0, hi = std::max(width_cells, height_cells);
  // Worst-case IoU is non-increasing in r, so bisection applies.
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = (lo + hi) / 2.0;
    if (worst_displaced_iou(width_cells, height_cells, mid) >= min_overlap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Scene generate_scene(const SceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0)
    throw ConfigError("scene spec: image dimensions must be positive");
  if (spec.min_boxes < 0 || spec.max_boxes < spec.min_boxes)
    throw ConfigError("scene spec: box count range is empty");
  if (spec.num_classes <= 0)
    throw ConfigError("scene spec: need at least one class");
  if (spec.min_size <= 0 || spec.max_size < spec.min_size)
    throw ConfigError("scene spec: size range is empty");
  if (spec.aspect_min < 1.0 || spec.aspect_max < spec.aspect_min)
    throw ConfigError("scene spec: aspect range is invalid (ratios are >= 1)");
  if (spec.max_size > std::min(spec.width, spec.height) - 2 * kMargin - 1)
    throw ConfigError("scene spec: boxes of max_size cannot fit in the image");

  std::vector<LevelSpec> storage;
  const std::vector<LevelSpec>& levels = effective_levels(spec, storage);
  const int stride = enforcement_stride(spec, levels);

  Rng rng(spec.seed);
  Scene scene;
  scene.image_id = spec.image_id;
  scene.width = spec.width;
  scene.height = spec.height;
  scene.num_classes = spec.num_classes;

  const int n_boxes =
      static_cast<int>(rng.uniform_int(spec.min_boxes, spec.max_boxes));
  for (int b = 0; b < n_boxes; ++b) {
    const bool partner = b > 0 && rng.uniform(0.0, 1.0) < spec.overlap_fraction;
    bool placed = false;
    for (int attempt = 0; attempt < kPlaceAttempts && !placed; ++attempt) {
      int class_id;
      BoxGeometry box;
      if (partner) {
        const GtBox& base = scene.ground_truth.back();
        class_id = base.class_id;
        const double w = quantize(base.geometry.width() * rng.uniform(0.8, 1.2));
        const double h =
            quantize(base.geometry.height() * rng.uniform(0.8, 1.2));
        const double dx = (rng.coin() ? 1 : -1) * rng.uniform(0.3, 0.6) *
                          base.geometry.width();
        const double dy = (rng.coin() ? 1 : -1) * rng.uniform(0.3, 0.6) *
                          base.geometry.height();
        const double x = quantize(std::clamp(base.geometry.tl_x + dx, kMargin,
                                             spec.width - kMargin - w));
        const double y = quantize(std::clamp(base.geometry.tl_y + dy, kMargin,
                                             spec.height - kMargin - h));
        box = BoxGeometry{x, y, x + w, y + h};
        if (!box.valid()) continue;
        const double overlap = iou(box, base.geometry);
        if (overlap < 0.15 || overlap > 0.65) continue;
      } else {
        class_id = static_cast<int>(rng.uniform_int(0, spec.num_classes - 1));
        double size_lo = spec.min_size, size_hi = spec.max_size;
        if (spec.spread_mr_levels) {
          const int l = b % static_cast<int>(levels.size());
          const double bucket_lo = 8.0 * levels[l].stride;
          const double bucket_hi = l + 1 < static_cast<int>(levels.size())
                                       ? 8.0 * levels[l + 1].stride
                                       : spec.max_size;
          size_lo = std::max(size_lo, bucket_lo);
          size_hi = std::min(size_hi, bucket_hi);
          if (size_lo >= size_hi) {
            size_lo = spec.min_size;
            size_hi = spec.max_size;
          }
        }
        const double long_side = rng.uniform(size_lo, size_hi);
        const double ratio = rng.uniform(spec.aspect_min, spec.aspect_max);
        double w = long_side, h = long_side / ratio;
        if (rng.coin()) std::swap(w, h);
        w = std::max(quantize(w), 4 * kQuantum);
        h = std::max(quantize(h), 4 * kQuantum);
        if (w > spec.width - 2 * kMargin || h > spec.height - 2 * kMargin)
          continue;
        const double x = quantize(rng.uniform(kMargin, spec.width - kMargin - w));
        const double y =
            quantize(rng.uniform(kMargin, spec.height - kMargin - h));
        box = BoxGeometry{x, y, x + w, y + h};
      }
      if (!box.valid() || box.tl_x < kMargin / 2 || box.tl_y < kMargin / 2 ||
          box.br_x > spec.width - kMargin / 2 ||
          box.br_y > spec.height - kMargin / 2)
        continue;

      bool ok = true;
      const KeypointCells mine = cells_at(box, stride);
      for (const GtBox& other : scene.ground_truth) {
        const KeypointCells theirs = cells_at(other.geometry, stride);
        if (!cells_apart(mine.tl_row, mine.tl_col, theirs.tl_row,
                         theirs.tl_col) ||
            !cells_apart(mine.br_row, mine.br_col, theirs.br_row,
                         theirs.br_col) ||
            !cells_apart(mine.ct_row, mine.ct_col, theirs.ct_row,
                         theirs.ct_col)) {
          ok = false;
          break;
        }
        if (spec.for_mr && other.class_id == class_id &&
            (cross_pair_ambiguous(box, other.geometry) ||
             cross_pair_ambiguous(other.geometry, box))) {
          ok = false;
          break;
        }
        if (spec.for_mr) {
          // Regression cells are class agnostic: a box's guaranteed feature
          // cell must stay unique per (level, branch).
          const int li = assign_level(box, levels);
          if (li == assign_level(other.geometry, levels)) {
            const int s = levels[li].stride;
            const int gh = (spec.height + s - 1) / s;
            const int gw = (spec.width + s - 1) / s;
            for (Corner corner : {Corner::TopLeft, Corner::BottomRight}) {
              const BoxGeometry a = sub_box(box, corner);
              const BoxGeometry o = sub_box(other.geometry, corner);
              if (midpoint_cell_row(a, s, gh) == midpoint_cell_row(o, s, gh) &&
                  midpoint_cell_col(a, s, gw) == midpoint_cell_col(o, s, gw)) {
                ok = false;
                break;
              }
            }
            if (!ok) break;
          }
        }
      }
      if (!ok) continue;
      scene.ground_truth.push_back(GtBox{class_id, box});
      placed = true;
    }
    if (!placed)
      throw ConfigError(
          "generate_scene: could not place a box under the separation "
          "constraints; relax the spec");
  }
  return scene;
}

void render_sr(Scene& scene, int stride) {
  contract(stride > 0, "render_sr: stride must be positive");
  const int gh = (scene.height + stride - 1) / stride;
  const int gw = (scene.width + stride - 1) / stride;
  const int c = scene.num_classes;

  LevelGrids level;
  level.level = LevelSpec{"sr", stride};
  level.grids.emplace("tl_heat", DenseGrid(c, gh, gw));
  level.grids.emplace("br_heat", DenseGrid(c, gh, gw));
  level.grids.emplace("ct_heat", DenseGrid(c, gh, gw));
  level.grids.emplace("tl_embed", DenseGrid(1, gh, gw));
  level.grids.emplace("br_embed", DenseGrid(1, gh, gw));
  level.grids.emplace("tl_off", DenseGrid(2, gh, gw));
  level.grids.emplace("br_off", DenseGrid(2, gh, gw));
  level.grids.emplace("ct_off", DenseGrid(2, gh, gw));

  for (std::size_t k = 0; k < scene.ground_truth.size(); ++k) {
    const GtBox& gt = scene.ground_truth[k];
    const BoxGeometry& b = gt.geometry;
    const double radius =
        gaussian_radius(b.width() / stride, b.height() / stride);
    const double cx = (b.tl_x + b.br_x) / 2.0, cy = (b.tl_y + b.br_y) / 2.0;
    render_point(level.grids.at("tl_heat"), level.grids.at("tl_off"),
                 gt.class_id, b.tl_x, b.tl_y, stride, radius);
    render_point(level.grids.at("br_heat"), level.grids.at("br_off"),
                 gt.class_id, b.br_x, b.br_y, stride, radius);
    render_point(level.grids.at("ct_heat"), level.grids.at("ct_off"),
                 gt.class_id, cx, cy, stride, radius);
    const float embedding = static_cast<float>(k + 1);
    level.grids.at("tl_embed")
        .at(0, cell_of(b.tl_y, stride), cell_of(b.tl_x, stride)) = embedding;
    level.grids.at("br_embed")
        .at(0, cell_of(b.br_y, stride), cell_of(b.br_x, stride)) = embedding;
  }
  scene.levels.push_back(std::move(level));
}

void render_mr(Scene& scene, const std::vector<LevelSpec>& levels_in) {
  std::vector<LevelSpec> levels = levels_in;
  if (levels.empty()) levels = default_mr_levels();
  for (std::size_t l = 1; l < levels.size(); ++l)
    contract(levels[l].stride > levels[l - 1].stride,
             "render_mr: level strides must be ascending");

  // Shared heatmaps and offsets at the finest stride, no embeddings.
  {
    const int stride = levels.front().stride;
    const int gh = (scene.height + stride - 1) / stride;
    const int gw = (scene.width + stride - 1) / stride;
    LevelGrids shared;
    shared.level = LevelSpec{"shared", stride};
    shared.grids.emplace("tl_heat", DenseGrid(scene.num_classes, gh, gw));
    shared.grids.emplace("br_heat", DenseGrid(scene.num_classes, gh, gw));
    shared.grids.emplace("ct_heat", DenseGrid(scene.num_classes, gh, gw));
    shared.grids.emplace("tl_off", DenseGrid(2, gh, gw));
    shared.grids.emplace("br_off", DenseGrid(2, gh, gw));
    shared.grids.emplace("ct_off", DenseGrid(2, gh, gw));
    for (const GtBox& gt : scene.ground_truth) {
      const BoxGeometry& b = gt.geometry;
      const double radius =
          gaussian_radius(b.width() / stride, b.height() / stride);
      const double cx = (b.tl_x + b.br_x) / 2.0, cy = (b.tl_y + b.br_y) / 2.0;
      render_point(shared.grids.at("tl_heat"), shared.grids.at("tl_off"),
                   gt.class_id, b.tl_x, b.tl_y, stride, radius);
      render_point(shared.grids.at("br_heat"), shared.grids.at("br_off"),
                   gt.class_id, b.br_x, b.br_y, stride, radius);
      render_point(shared.grids.at("ct_heat"), shared.grids.at("ct_off"),
                   gt.class_id, cx, cy, stride, radius);
    }
    scene.shared = std::move(shared);
  }

  for (std::size_t l = 0; l < levels.size(); ++l) {
    const int stride = levels[l].stride;
    const int gh = (scene.height + stride - 1) / stride;
    const int gw = (scene.width + stride - 1) / stride;
    LevelGrids level;
    level.level = levels[l];
    level.grids.emplace("cls_tl", DenseGrid(scene.num_classes, gh, gw));
    level.grids.emplace("cls_br", DenseGrid(scene.num_classes, gh, gw));
    level.grids.emplace("reg_tl", DenseGrid(4, gh, gw));
    level.grids.emplace("reg_br", DenseGrid(4, gh, gw));

    for (Corner corner : {Corner::TopLeft, Corner::BottomRight}) {
      DenseGrid& cls =
          level.grids.at(corner == Corner::TopLeft ? "cls_tl" : "cls_br");
      DenseGrid& reg =
          level.grids.at(corner == Corner::TopLeft ? "reg_tl" : "reg_br");

      // Resolve cell ownership first: contested cells go to the smallest box
      // so a small object is never erased by a large one.
      std::map<std::pair<int, int>, std::size_t> owner;
      for (std::size_t k = 0; k < scene.ground_truth.size(); ++k) {
        const GtBox& gt = scene.ground_truth[k];
        if (assign_level(gt.geometry, levels) != static_cast<int>(l)) continue;
        const BoxGeometry sub = sub_box(gt.geometry, corner);
        const int r0 = std::max(0, cell_of(sub.tl_y, stride));
        const int r1 = std::min(gh - 1, cell_of(sub.br_y, stride));
        const int c0 = std::max(0, cell_of(sub.tl_x, stride));
        const int c1 = std::min(gw - 1, cell_of(sub.br_x, stride));
        auto claim = [&](int i, int j) {
          auto it = owner.find({i, j});
          if (it == owner.end()) {
            owner[{i, j}] = k;
          } else {
            const double mine = gt.geometry.area();
            const double held = scene.ground_truth[it->second].geometry.area();
            if (mine < held || (mine == held && k < it->second))
              it->second = k;
          }
        };
        for (int i = r0; i <= r1; ++i)
          for (int j = c0; j <= c1; ++j) {
            const double px = (j + 0.5) * stride, py = (i + 0.5) * stride;
            if (sub.tl_x <= px && px <= sub.br_x && sub.tl_y <= py &&
                py <= sub.br_y)
              claim(i, j);
          }
        claim(midpoint_cell_row(sub, stride, gh),
              midpoint_cell_col(sub, stride, gw));
      }

      for (const auto& [cell, k] : owner) {
        const auto [i, j] = cell;
        const GtBox& gt = scene.ground_truth[k];
        const BoxGeometry& b = gt.geometry;
        const BoxGeometry sub = sub_box(b, corner);
        const double px = (j + 0.5) * stride, py = (i + 0.5) * stride;
        const double mx = (sub.tl_x + sub.br_x) / 2.0;
        const double my = (sub.tl_y + sub.br_y) / 2.0;
        const bool is_anchor = i == midpoint_cell_row(sub, stride, gh) &&
                               j == midpoint_cell_col(sub, stride, gw);
        double score = 1.0;
        if (!is_anchor) {
          const double sigma = std::max(
              0.5, std::max(sub.width(), sub.height()) / (3.0 * stride));
          const double d2 = ((px - mx) * (px - mx) + (py - my) * (py - my)) /
                            (static_cast<double>(stride) * stride);
          score = std::exp(-d2 / (2.0 * sigma * sigma));
        }
        cls.at(gt.class_id, i, j) = static_cast<float>(score);
        const double corner_x = corner == Corner::TopLeft ? b.tl_x : b.br_x;
        const double corner_y = corner == Corner::TopLeft ? b.tl_y : b.br_y;
        reg.at(0, i, j) = static_cast<float>(corner_x - px);
        reg.at(1, i, j) = static_cast<float>(corner_y - py);
        reg.at(2, i, j) = static_cast<float>((b.tl_x + b.br_x) / 2.0 - px);
        reg.at(3, i, j) = static_cast<float>((b.tl_y + b.br_y) / 2.0 - py);
      }
    }
    scene.levels.push_back(std::move(level));
  }
}

void inject_noise(Scene& scene, const SceneSpec& spec) {
  if (spec.noise_pairs == 0) return;
  if (scene.levels.empty() ||
      scene.levels.front().grids.find("tl_embed") ==
          scene.levels.front().grids.end())
    throw ConfigError("inject_noise: single-resolution grids are required");
  contract(spec.noise_score_min > 0 &&
               spec.noise_score_max >= spec.noise_score_min &&
               spec.noise_score_max <= 1.0,
           "inject_noise: score range must lie in (0, 1]");

  LevelGrids& level = scene.levels.front();
  const int stride = level.level.stride;
  DenseGrid& tl_heat = level.grids.at("tl_heat");
  DenseGrid& br_heat = level.grids.at("br_heat");
  DenseGrid& tl_embed = level.grids.at("tl_embed");
  DenseGrid& br_embed = level.grids.at("br_embed");
  const int gh = tl_heat.height(), gw = tl_heat.width();

  struct CellRef {
    int row, col;
  };
  std::vector<CellRef> tl_cells, br_cells;
  for (const GtBox& gt : scene.ground_truth) {
    const KeypointCells cells = cells_at(gt.geometry, stride);
    tl_cells.push_back({cells.tl_row, cells.tl_col});
    br_cells.push_back({cells.br_row, cells.br_col});
  }
  for (const NoisePeakPair& n : scene.noise) {
    tl_cells.push_back({n.tl_row, n.tl_col});
    br_cells.push_back({n.br_row, n.br_col});
  }

  auto far_from_all = [](const std::vector<CellRef>& cells, int r, int c) {
    for (const CellRef& e : cells)
      if (!cells_apart(e.row, e.col, r, c)) return false;
    return true;
  };
  auto dominates_window = [](const DenseGrid& heat, int ch, int r, int c,
                             double score) {
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int i = r + di, j = c + dj;
        if (i < 0 || i >= heat.height() || j < 0 || j >= heat.width()) continue;
        if (heat.at(ch, i, j) >= score) return false;
      }
    return true;
  };

  Rng rng(mix_seed(spec.seed, 0x6e6f6973ull));
  if (gh < 4 || gw < 4)
    throw ConfigError("inject_noise: grid too small for spurious pairs");
  for (int p = 0; p < spec.noise_pairs; ++p) {
    bool injected = false;
    for (int attempt = 0; attempt < 10000 && !injected; ++attempt) {
      const int class_id =
          static_cast<int>(rng.uniform_int(0, scene.num_classes - 1));
      const int tl_row = static_cast<int>(rng.uniform_int(0, gh - 3));
      const int tl_col = static_cast<int>(rng.uniform_int(0, gw - 3));
      const int br_row = static_cast<int>(rng.uniform_int(tl_row + 2, gh - 1));
      const int br_col = static_cast<int>(rng.uniform_int(tl_col + 2, gw - 1));
      const double tl_score =
          rng.uniform(spec.noise_score_min, spec.noise_score_max);
      const double br_score =
          rng.uniform(spec.noise_score_min, spec.noise_score_max);

      if (!far_from_all(tl_cells, tl_row, tl_col)) continue;
      if (!far_from_all(br_cells, br_row, br_col)) continue;
      if (!dominates_window(tl_heat, class_id, tl_row, tl_col, tl_score))
        continue;
      if (!dominates_window(br_heat, class_id, br_row, br_col, br_score))
        continue;

      // The pair must be killed by the center check alone: its central
      // region may not contain any same-class ground-truth center.
      const BoxGeometry spurious{
          static_cast<double>(tl_col) * stride,
          static_cast<double>(tl_row) * stride,
          static_cast<double>(br_col) * stride,
          static_cast<double>(br_row) * stride};
      const CentralRegion region = default_region(spurious);
      bool validated = false;
      for (const GtBox& gt : scene.ground_truth) {
        if (gt.class_id != class_id) continue;
        const double cx = (gt.geometry.tl_x + gt.geometry.br_x) / 2.0;
        const double cy = (gt.geometry.tl_y + gt.geometry.br_y) / 2.0;
        if (region.contains(cx, cy)) {
          validated = true;
          break;
        }
      }
      if (validated) continue;

      const double embedding = 1000.0 + 10.0 * p;
      tl_heat.at(class_id, tl_row, tl_col) = static_cast<float>(tl_score);
      br_heat.at(class_id, br_row, br_col) = static_cast<float>(br_score);
      tl_embed.at(0, tl_row, tl_col) = static_cast<float>(embedding);
      br_embed.at(0, br_row, br_col) = static_cast<float>(embedding);
      tl_cells.push_back({tl_row, tl_col});
      br_cells.push_back({br_row, br_col});
      scene.noise.push_back(NoisePeakPair{class_id, tl_row, tl_col, br_row,
                                          br_col, tl_score, br_score,
                                          embedding});
      injected = true;
    }
    if (!injected)
      throw ConfigError(
          "inject_noise: could not place a spurious pair; relax the spec");
  }
}

}  // namespace tdet
