// Command line front end: synthesize scene corpora, decode them into
// detections, evaluate detections against ground truth, run the
// center-filter ablation, and benchmark the pipeline.
//
// Exit codes: 0 success, 1 usage, 2 bad data or configuration, 3 broken
// internal invariant.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdet/common.hpp"
#include "tdet/grid_io.hpp"
#include "tdet/metrics.hpp"
#include "tdet/pipeline.hpp"
#include "tdet/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw tdet::FormatError("cannot write " + path.string());
}

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "     -";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%5.1f%%", 100.0 * *v);
  return buf;
}

tdet::DecodeMode resolve_mode(const std::string& flag, const fs::path& input) {
  if (flag == "sr") return tdet::DecodeMode::SingleRes;
  if (flag == "mr") return tdet::DecodeMode::MultiRes;
  std::ifstream f(input / "run_config.json");
  if (f) {
    json j = json::parse(f, nullptr, /*allow_exceptions=*/false);
    if (!j.is_discarded() && j.contains("mode") && j["mode"].is_string()) {
      const std::string m = j["mode"];
      if (m == "sr") return tdet::DecodeMode::SingleRes;
      if (m == "mr") return tdet::DecodeMode::MultiRes;
    }
  }
  throw tdet::ConfigError("cannot determine decode mode for " +
                          input.string() + "; pass --mode sr|mr");
}

void print_stage_times(const tdet::StageTimes& t) {
  std::printf(
      "  stage seconds: peaks %.3f  pairing %.3f  filter %.3f  suppress %.3f"
      "  (scene total %.3f)\n",
      t.peaks_seconds, t.pairing_seconds, t.filter_seconds, t.suppress_seconds,
      t.total_seconds);
}

std::vector<tdet::Detection> decode_scene(const tdet::Scene& scene,
                                          const tdet::PipelineConfig& config) {
  return config.mode == tdet::DecodeMode::SingleRes
             ? tdet::decode_sr(scene, config.decode)
             : tdet::decode_mr(scene, config.decode);
}

std::vector<tdet::Detection> suppress_and_select(
    std::vector<tdet::Detection> dets, const tdet::SuppressConfig& config) {
  dets = config.method == tdet::SuppressConfig::Method::Hard
             ? tdet::hard_nms(std::move(dets), config)
             : tdet::soft_nms(std::move(dets), config);
  return tdet::top_select(std::move(dets), config.top_n);
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int scenes = 20;
  uint64_t seed = 0;
  std::string mode = "sr";
  tdet::SceneSpec spec;  // per-scene template; seed/image_id set per scene
  bool spread_levels = false;
};

int cmd_synth(const SynthArgs& args) {
  const fs::path out(args.out);
  fs::create_directories(out / "scenes");

  const bool mr = args.mode == "mr";
  tdet::GroundTruthSet gt;
  int total_boxes = 0;
  for (int s = 0; s < args.scenes; ++s) {
    tdet::SceneSpec spec = args.spec;
    spec.seed = tdet::mix_seed(args.seed, static_cast<uint64_t>(s));
    spec.image_id = s;
    spec.for_mr = mr;
    spec.spread_mr_levels = mr && args.spread_levels;

    tdet::Scene scene = tdet::generate_scene(spec);
    if (mr) {
      tdet::render_mr(scene, spec.mr_levels.empty()
                                 ? tdet::default_mr_levels()
                                 : spec.mr_levels);
    } else {
      tdet::render_sr(scene, spec.sr_stride);
      if (spec.noise_pairs > 0) tdet::inject_noise(scene, spec);
    }

    char name[32];
    std::snprintf(name, sizeof(name), "scene_%05d", s);
    tdet::save_scene(scene, out / "scenes" / name);

    gt.images.push_back({scene.image_id, scene.width, scene.height});
    for (const tdet::GtBox& box : scene.ground_truth) {
      gt.annotations.push_back({scene.image_id, box.class_id, box.geometry});
    }
    total_boxes += static_cast<int>(scene.ground_truth.size());
  }
  tdet::save_ground_truth(gt, out / "ground_truth.json");

  json j;
  j["command"] = "synth";
  j["mode"] = args.mode;
  j["scenes"] = args.scenes;
  j["seed"] = args.seed;
  j["width"] = args.spec.width;
  j["height"] = args.spec.height;
  j["min_boxes"] = args.spec.min_boxes;
  j["max_boxes"] = args.spec.max_boxes;
  j["classes"] = args.spec.num_classes;
  j["min_size"] = args.spec.min_size;
  j["max_size"] = args.spec.max_size;
  j["aspect_min"] = args.spec.aspect_min;
  j["aspect_max"] = args.spec.aspect_max;
  j["overlap_fraction"] = args.spec.overlap_fraction;
  j["noise_pairs"] = args.spec.noise_pairs;
  j["noise_score_min"] = args.spec.noise_score_min;
  j["noise_score_max"] = args.spec.noise_score_max;
  if (mr) {
    json levels = json::array();
    for (const tdet::LevelSpec& l : tdet::default_mr_levels()) {
      levels.push_back({{"id", l.level_id}, {"stride", l.stride}});
    }
    j["levels"] = levels;
    j["spread_levels"] = args.spread_levels;
  } else {
    j["stride"] = args.spec.sr_stride;
  }
  write_text(out / "run_config.json", j.dump(2) + "\n");

  std::printf("wrote %d scene%s (%d boxes) to %s\n", args.scenes,
              args.scenes == 1 ? "" : "s", total_boxes, out.string().c_str());
  return 0;
}

// ---- decode ---------------------------------------------------------------

void write_decode_run_config(const fs::path& out, const std::string& command,
                             const fs::path& input,
                             const tdet::PipelineConfig& config) {
  json j;
  j["command"] = command;
  j["input"] = input.string();
  j["pipeline"] = json::parse(tdet::pipeline_config_json(config));
  write_text(out / "run_config.json", j.dump(2) + "\n");
}

int cmd_decode(const fs::path& input, const fs::path& out,
               const tdet::PipelineConfig& config) {
  const tdet::DirectoryResult result = tdet::run_directory(input, config);
  fs::create_directories(out);
  tdet::save_detections(result.detections, out / "detections.json");
  write_decode_run_config(out, "decode", input, config);

  std::printf("decoded %d scene%s -> %zu detections in %.3fs (%.1f images/s)\n",
              result.scene_count, result.scene_count == 1 ? "" : "s",
              result.detections.size(), result.wall_seconds,
              result.scene_count / std::max(result.wall_seconds, 1e-9));
  print_stage_times(result.times);
  std::printf("wrote %s\n", (out / "detections.json").string().c_str());
  return 0;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const fs::path& dets_path, const fs::path& gt_path,
             const std::string& out) {
  const std::vector<tdet::Detection> dets = tdet::load_detections(dets_path);
  const tdet::GroundTruthSet gt = tdet::load_ground_truth(gt_path);
  const tdet::EvalReport report = tdet::evaluate(dets, gt.annotations);
  std::fputs(tdet::report_table(report).c_str(), stdout);

  if (!out.empty()) {
    const fs::path dir(out);
    fs::create_directories(dir);
    write_text(dir / "report.json", tdet::report_json(report));
    json j;
    j["command"] = "eval";
    j["detections"] = dets_path.string();
    j["ground_truth"] = gt_path.string();
    write_text(dir / "run_config.json", j.dump(2) + "\n");
    std::printf("wrote %s\n", (dir / "report.json").string().c_str());
  }
  return 0;
}

// ---- ablate ---------------------------------------------------------------

std::array<double, 5> geometry_key(const tdet::Detection& d) {
  return {static_cast<double>(d.class_id), d.geometry.tl_x, d.geometry.tl_y,
          d.geometry.br_x, d.geometry.br_y};
}

int cmd_ablate(const fs::path& input, const fs::path& out,
               tdet::PipelineConfig config) {
  tdet::PipelineConfig unfiltered = config;
  unfiltered.decode.center_filter = false;

  std::vector<tdet::Detection> dets_filtered;
  std::vector<tdet::Detection> dets_unfiltered;
  bool subset_ok = true;
  int scene_count = 0;
  for (const fs::path& dir : tdet::list_scene_dirs(input)) {
    const tdet::Scene scene = tdet::load_scene(dir);
    std::vector<tdet::Detection> raw_f = decode_scene(scene, config);
    std::vector<tdet::Detection> raw_u = decode_scene(scene, unfiltered);

    std::set<std::array<double, 5>> unfiltered_boxes;
    for (const tdet::Detection& d : raw_u) {
      unfiltered_boxes.insert(geometry_key(d));
    }
    for (const tdet::Detection& d : raw_f) {
      if (!unfiltered_boxes.count(geometry_key(d))) subset_ok = false;
    }

    auto f = suppress_and_select(std::move(raw_f), config.suppress);
    auto u = suppress_and_select(std::move(raw_u), unfiltered.suppress);
    dets_filtered.insert(dets_filtered.end(), f.begin(), f.end());
    dets_unfiltered.insert(dets_unfiltered.end(), u.begin(), u.end());
    ++scene_count;
  }

  const tdet::GroundTruthSet gt =
      tdet::load_ground_truth(input / "ground_truth.json");
  const tdet::EvalReport with = tdet::evaluate(dets_filtered, gt.annotations);
  const tdet::EvalReport without =
      tdet::evaluate(dets_unfiltered, gt.annotations);

  std::printf("center filter ablation over %d scene%s\n", scene_count,
              scene_count == 1 ? "" : "s");
  std::printf("  %-6s %10s %12s\n", "metric", "filtered", "unfiltered");
  const std::pair<const char*, std::pair<std::optional<double>,
                                         std::optional<double>>>
      rows[] = {
          {"AP", {with.ap, without.ap}},
          {"AF", {with.af, without.af}},
          {"AF5", {with.af5, without.af5}},
          {"AF25", {with.af25, without.af25}},
          {"AF50", {with.af50, without.af50}},
      };
  for (const auto& [name, values] : rows) {
    std::printf("  %-6s %10s %12s\n", name, fmt_opt(values.first).c_str(),
                fmt_opt(values.second).c_str());
  }
  std::optional<double> af5_reduction;
  if (with.af5 && without.af5 && *without.af5 > 0) {
    af5_reduction = (*without.af5 - *with.af5) / *without.af5;
  }
  std::printf("  relative AF5 reduction: %s\n",
              fmt_opt(af5_reduction).c_str());
  std::printf("  per-scene geometry subset: %s\n",
              subset_ok ? "ok" : "VIOLATED");

  fs::create_directories(out);
  tdet::save_detections(dets_filtered, out / "detections_filtered.json");
  tdet::save_detections(dets_unfiltered, out / "detections_unfiltered.json");
  json j;
  j["scenes"] = scene_count;
  j["filtered"] = json::parse(tdet::report_json(with));
  j["unfiltered"] = json::parse(tdet::report_json(without));
  j["subset_ok"] = subset_ok;
  j["af5_relative_reduction"] =
      af5_reduction ? json(*af5_reduction) : json(nullptr);
  write_text(out / "ablation.json", j.dump(2) + "\n");
  write_decode_run_config(out, "ablate", input, config);
  std::printf("wrote %s\n", (out / "ablation.json").string().c_str());
  return 0;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const fs::path& input, const std::string& out,
              tdet::PipelineConfig config, int repeat) {
  tdet::DirectoryResult best;
  for (int r = 0; r < repeat; ++r) {
    tdet::DirectoryResult run = tdet::run_directory(input, config);
    if (r == 0 || run.wall_seconds < best.wall_seconds) best = std::move(run);
  }

  tdet::PipelineConfig single = config;
  single.threads = 1;
  const tdet::DirectoryResult reference = tdet::run_directory(input, single);
  const bool identical = tdet::detections_to_json(best.detections) ==
                         tdet::detections_to_json(reference.detections);

  const double ips = best.scene_count / std::max(best.wall_seconds, 1e-9);
  std::printf("benchmark: %d scene%s, %d thread%s, best of %d run%s\n",
              best.scene_count, best.scene_count == 1 ? "" : "s",
              config.threads, config.threads == 1 ? "" : "s", repeat,
              repeat == 1 ? "" : "s");
  std::printf("  wall %.3fs  (%.1f images/s)\n", best.wall_seconds, ips);
  print_stage_times(best.times);
  std::printf("  identical to single-thread output: %s\n",
              identical ? "yes" : "NO");

  if (!out.empty()) {
    const fs::path dir(out);
    fs::create_directories(dir);
    json j;
    j["scenes"] = best.scene_count;
    j["threads"] = config.threads;
    j["repeat"] = repeat;
    j["wall_seconds_best"] = best.wall_seconds;
    j["images_per_second"] = ips;
    j["stage_seconds"] = {{"peaks", best.times.peaks_seconds},
                          {"pairing", best.times.pairing_seconds},
                          {"filter", best.times.filter_seconds},
                          {"suppress", best.times.suppress_seconds},
                          {"scene_total", best.times.total_seconds}};
    j["identical_to_single_thread"] = identical;
    write_text(dir / "bench.json", j.dump(2) + "\n");
    write_decode_run_config(dir, "bench", input, config);
    std::printf("wrote %s\n", (dir / "bench.json").string().c_str());
  }
  if (!identical) {
    throw tdet::ContractError(
        "multi-thread detections diverged from the single-thread run");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keypoint-triplet detection post-processing toolkit"};
  app.require_subcommand(1);

  // synth
  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic scene corpus");
  synth_cmd->add_option("-o,--out", synth.out, "output directory")->required();
  synth_cmd->add_option("--scenes", synth.scenes, "number of scenes")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "corpus seed");
  synth_cmd->add_option("--mode", synth.mode, "grid family to render")
      ->check(CLI::IsMember({"sr", "mr"}));
  synth_cmd->add_option("--width", synth.spec.width, "image width");
  synth_cmd->add_option("--height", synth.spec.height, "image height");
  synth_cmd->add_option("--min-boxes", synth.spec.min_boxes, "boxes per scene, lower bound");
  synth_cmd->add_option("--max-boxes", synth.spec.max_boxes, "boxes per scene, upper bound");
  synth_cmd->add_option("--classes", synth.spec.num_classes, "number of classes");
  synth_cmd->add_option("--min-size", synth.spec.min_size, "longest box side, lower bound");
  synth_cmd->add_option("--max-size", synth.spec.max_size, "longest box side, upper bound");
  synth_cmd->add_option("--aspect-min", synth.spec.aspect_min, "aspect ratio lower bound");
  synth_cmd->add_option("--aspect-max", synth.spec.aspect_max, "aspect ratio upper bound");
  synth_cmd->add_option("--overlap-fraction", synth.spec.overlap_fraction,
                        "probability of placing a same-class overlap partner")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--noise-pairs", synth.spec.noise_pairs,
                        "spurious corner pairs per scene (sr only)");
  synth_cmd->add_option("--noise-score-min", synth.spec.noise_score_min, "noise peak score, lower bound");
  synth_cmd->add_option("--noise-score-max", synth.spec.noise_score_max, "noise peak score, upper bound");
  synth_cmd->add_option("--stride", synth.spec.sr_stride, "heatmap stride (sr only)")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_flag("--spread-levels", synth.spread_levels,
                      "cycle box sizes across pyramid levels (mr only)");

  // shared decode-style options
  std::string in_dir, out_dir, mode_flag, method_flag;
  int threads = 1;
  double sigma = 0, iou_threshold = 0, score_prune = 0;
  int top_n = 0;
  bool no_center_filter = false, no_refine = false;
  int repeat = 3;

  auto add_pipeline_options = [&](CLI::App* cmd, bool with_suppress) {
    cmd->add_option("input", in_dir, "scene corpus directory")->required();
    cmd->add_option("--mode", mode_flag, "decode mode (default: from the corpus run_config.json)")
        ->check(CLI::IsMember({"sr", "mr"}));
    cmd->add_option("--threads", threads, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-refine", no_refine, "skip heatmap refinement (mr)");
    if (with_suppress) {
      cmd->add_flag("--no-center-filter", no_center_filter,
                    "skip the central-region filter");
      cmd->add_option("--method", method_flag, "suppression method")
          ->check(CLI::IsMember({"soft-gaussian", "soft-linear", "hard"}));
      cmd->add_option("--sigma", sigma, "gaussian decay sigma");
      cmd->add_option("--iou-threshold", iou_threshold,
                      "hard removal / linear decay threshold");
      cmd->add_option("--score-prune", score_prune,
                      "drop detections decayed below this score");
      cmd->add_option("--top-n", top_n,
                      "detections kept per image (0 keeps all)");
    }
  };

  CLI::App* decode_cmd =
      app.add_subcommand("decode", "decode a scene corpus into detections");
  add_pipeline_options(decode_cmd, true);
  decode_cmd->add_option("-o,--out", out_dir, "output directory")->required();

  // eval
  std::string dets_path, gt_path, eval_out;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "evaluate detections against ground truth");
  eval_cmd->add_option("--dets", dets_path, "detections JSON")->required();
  eval_cmd->add_option("--gt", gt_path, "ground truth JSON")->required();
  eval_cmd->add_option("-o,--out", eval_out, "optional report directory");

  // ablate
  CLI::App* ablate_cmd = app.add_subcommand(
      "ablate", "compare decoding with and without the central-region filter");
  add_pipeline_options(ablate_cmd, true);
  ablate_cmd->add_option("-o,--out", out_dir, "output directory")->required();

  // bench
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "time the pipeline over a corpus");
  add_pipeline_options(bench_cmd, false);
  bench_cmd->add_option("-o,--out", out_dir, "optional output directory");
  bench_cmd->add_option("--repeat", repeat, "timed repetitions, best kept")
      ->check(CLI::PositiveNumber);
  bench_cmd->get_option("--threads")->default_val(std::to_string(
      std::max(1u, std::thread::hardware_concurrency())));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  auto build_pipeline = [&](CLI::App* cmd) {
    tdet::PipelineConfig config =
        tdet::default_pipeline(resolve_mode(mode_flag, in_dir));
    config.threads = threads;
    if (no_center_filter) config.decode.center_filter = false;
    if (no_refine) config.decode.refine = false;
    if (cmd->count("--method")) {
      config.suppress.method =
          method_flag == "hard" ? tdet::SuppressConfig::Method::Hard
          : method_flag == "soft-linear"
              ? tdet::SuppressConfig::Method::SoftLinear
              : tdet::SuppressConfig::Method::SoftGaussian;
    }
    if (cmd->count("--sigma")) config.suppress.sigma = sigma;
    if (cmd->count("--iou-threshold")) {
      config.suppress.iou_threshold = iou_threshold;
    }
    if (cmd->count("--score-prune")) config.suppress.score_prune = score_prune;
    if (cmd->count("--top-n")) config.suppress.top_n = top_n;
    return config;
  };

  try {
    if (app.got_subcommand(synth_cmd)) return cmd_synth(synth);
    if (app.got_subcommand(decode_cmd)) {
      return cmd_decode(in_dir, out_dir, build_pipeline(decode_cmd));
    }
    if (app.got_subcommand(eval_cmd)) {
      return cmd_eval(dets_path, gt_path, eval_out);
    }
    if (app.got_subcommand(ablate_cmd)) {
      return cmd_ablate(in_dir, out_dir, build_pipeline(ablate_cmd));
    }
    if (app.got_subcommand(bench_cmd)) {
      tdet::PipelineConfig config = tdet::default_pipeline(
          resolve_mode(mode_flag, in_dir));
      config.threads = threads;
      if (no_refine) config.decode.refine = false;
      return cmd_bench(in_dir, out_dir, config, repeat);
    }
  } catch (const tdet::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const tdet::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const tdet::ContractError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 0;
}
