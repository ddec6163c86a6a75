#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tdet/grid.hpp"

namespace tdet {

/// Binary grid container:
///   bytes 0..7   magic "CNGRID1\n"
///   bytes 8..11  header length, unsigned 32-bit little endian
///   header       UTF-8 JSON: {"dtype":"f32le","shape":[C,H,W],"name":...}
///   payload      C*H*W little-endian float32 values, row major
/// Save/load round-trips are bit exact. Loading rejects non-finite values,
/// truncated payloads, and unknown dtypes, naming the offending field.
void save_grid(const DenseGrid& grid, const std::filesystem::path& path,
               const std::string& name = "");
DenseGrid load_grid(const std::filesystem::path& path);

/// Detections interchange: a JSON array of
/// {"image_id", "category_id", "bbox": [x, y, w, h], "score"}.
/// Boxes are xyxy internally; xywh only exists at this boundary.
void save_detections(const std::vector<Detection>& dets,
                     const std::filesystem::path& path);
std::string detections_to_json(const std::vector<Detection>& dets);
std::vector<Detection> load_detections(const std::filesystem::path& path);

struct GtImage {
  int64_t id = 0;
  int width = 0, height = 0;
};

struct GroundTruthSet {
  std::vector<GtImage> images;
  std::vector<GtAnnotation> annotations;
};

/// Ground truth interchange:
/// {"images":[{"id","width","height"}],
///  "annotations":[{"image_id","category_id","bbox":[x,y,w,h]}]}.
void save_ground_truth(const GroundTruthSet& gt,
                       const std::filesystem::path& path);
GroundTruthSet load_ground_truth(const std::filesystem::path& path);

/// Scene directory: manifest.json plus grids/*.cngrid. The manifest lists
/// image dimensions, ground truth, injected noise, and per-level grid paths
/// with strides. Loading validates that every grid dimension equals
/// ceil(image dimension / stride).
void save_scene(const Scene& scene, const std::filesystem::path& dir);
Scene load_scene(const std::filesystem::path& dir);

/// Scene subdirectories of root/scenes, sorted by name.
std::vector<std::filesystem::path> list_scene_dirs(
    const std::filesystem::path& root);

}  // namespace tdet
