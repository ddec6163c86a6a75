#include "tdet/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "tdet/common.hpp"
#include "tdet/grid_io.hpp"

namespace tdet {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

PipelineConfig default_pipeline(DecodeMode mode) {
  PipelineConfig config;
  config.mode = mode;
  if (mode == DecodeMode::SingleRes) {
    config.suppress.method = SuppressConfig::Method::SoftGaussian;
    config.suppress.sigma = 0.5;
    config.suppress.top_n = 100;
  } else {
    config.suppress.method = SuppressConfig::Method::Hard;
    config.suppress.iou_threshold = 0.6;
    config.suppress.top_n = 0;
  }
  return config;
}

StageTimes& StageTimes::operator+=(const StageTimes& other) {
  peaks_seconds += other.peaks_seconds;
  pairing_seconds += other.pairing_seconds;
  filter_seconds += other.filter_seconds;
  suppress_seconds += other.suppress_seconds;
  total_seconds += other.total_seconds;
  return *this;
}

SceneResult run_scene(const Scene& scene, const PipelineConfig& config) {
  SceneResult result;
  result.image_id = scene.image_id;

  const auto start = std::chrono::steady_clock::now();
  DecodeStats stats;
  std::vector<Detection> dets = config.mode == DecodeMode::SingleRes
                                    ? decode_sr(scene, config.decode, &stats)
                                    : decode_mr(scene, config.decode, &stats);

  const auto suppress_start = std::chrono::steady_clock::now();
  dets = config.suppress.method == SuppressConfig::Method::Hard
             ? hard_nms(std::move(dets), config.suppress)
             : soft_nms(std::move(dets), config.suppress);
  dets = top_select(std::move(dets), config.suppress.top_n);

  result.times.peaks_seconds = stats.peaks_seconds;
  result.times.pairing_seconds = stats.pairing_seconds;
  result.times.filter_seconds = stats.filter_seconds;
  result.times.suppress_seconds = seconds_since(suppress_start);
  result.times.total_seconds = seconds_since(start);
  result.detections = std::move(dets);
  return result;
}

DirectoryResult run_directory(const std::filesystem::path& root,
                              const PipelineConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::filesystem::path> dirs = list_scene_dirs(root);

  std::vector<SceneResult> results(dirs.size());
  std::atomic<size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= dirs.size()) return;
      try {
        results[i] = run_scene(load_scene(dirs[i]), config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int thread_count = std::max(1, config.threads);
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Merge strictly in directory order: detection order and the floating
  // point time accumulation are both independent of the thread count.
  DirectoryResult out;
  out.scene_count = static_cast<int>(dirs.size());
  for (SceneResult& r : results) {
    out.detections.insert(out.detections.end(), r.detections.begin(),
                          r.detections.end());
    out.times += r.times;
  }
  out.wall_seconds = seconds_since(start);
  return out;
}

std::string pipeline_config_json(const PipelineConfig& config) {
  using json = nlohmann::ordered_json;
  json j;
  j["mode"] = config.mode == DecodeMode::SingleRes ? "sr" : "mr";
  json d;
  d["peaks_per_heatmap"] = config.decode.peaks.k;
  d["peak_window"] = config.decode.peaks.window;
  d["peak_score_floor"] = config.decode.peaks.score_floor;
  d["embed_threshold"] = config.decode.embed_threshold;
  d["n_small"] = config.decode.n_small;
  d["n_large"] = config.decode.n_large;
  d["scale_split"] = config.decode.scale_split;
  d["snap_radius_factor"] = config.decode.snap_radius_factor;
  d["k_per_level"] = config.decode.k_per_level;
  d["feature_score_floor"] = config.decode.feature_score_floor;
  d["require_both_centers"] = config.decode.require_both_centers;
  d["center_filter"] = config.decode.center_filter;
  d["refine"] = config.decode.refine;
  d["per_level_pairing"] = config.decode.per_level_pairing;
  d["max_candidates"] = config.decode.max_candidates;
  j["decode"] = d;
  json s;
  switch (config.suppress.method) {
    case SuppressConfig::Method::SoftGaussian:
      s["method"] = "soft_gaussian";
      break;
    case SuppressConfig::Method::SoftLinear:
      s["method"] = "soft_linear";
      break;
    case SuppressConfig::Method::Hard:
      s["method"] = "hard";
      break;
  }
  s["sigma"] = config.suppress.sigma;
  s["iou_threshold"] = config.suppress.iou_threshold;
  s["score_prune"] = config.suppress.score_prune;
  s["top_n"] = config.suppress.top_n;
  j["suppress"] = s;
  j["threads"] = config.threads;
  return j.dump(2) + "\n";
}

}  // namespace tdet
