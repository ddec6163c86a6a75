#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tdet/decode.hpp"
#include "tdet/grid.hpp"
#include "tdet/suppress.hpp"

namespace tdet {

enum class DecodeMode { SingleRes, MultiRes };

/// End-to-end post-processing configuration: decode, suppress, select.
struct PipelineConfig {
  DecodeMode mode = DecodeMode::SingleRes;
  DecodeConfig decode;
  SuppressConfig suppress;
  int threads = 1;
};

/// Mode defaults. Single resolution: gaussian score decay (sigma 0.5) and
/// the top 100 detections per image. Multi resolution: hard suppression at
/// IoU 0.6 with no truncation.
PipelineConfig default_pipeline(DecodeMode mode);

struct StageTimes {
  double peaks_seconds = 0;
  double pairing_seconds = 0;
  double filter_seconds = 0;
  double suppress_seconds = 0;
  double total_seconds = 0;

  StageTimes& operator+=(const StageTimes& other);
};

struct SceneResult {
  int64_t image_id = 0;
  std::vector<Detection> detections;
  StageTimes times;
};

/// Decode, suppress, and select one scene's detections.
SceneResult run_scene(const Scene& scene, const PipelineConfig& config);

struct DirectoryResult {
  std::vector<Detection> detections;  // concatenated in scene order
  StageTimes times;                   // accumulated in scene order
  int scene_count = 0;
  double wall_seconds = 0;  // end to end, including scene IO
};

/// Run every scene under root/scenes. Scenes are distributed over
/// config.threads worker threads; results are merged back in directory
/// order, so the output is identical for every thread count.
DirectoryResult run_directory(const std::filesystem::path& root,
                              const PipelineConfig& config);

std::string pipeline_config_json(const PipelineConfig& config);

}  // namespace tdet
