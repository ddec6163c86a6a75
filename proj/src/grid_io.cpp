#include "tdet/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "grid payloads are little endian; big-endian hosts need swaps");

namespace tdet {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'C', 'N', 'G', 'R', 'I', 'D', '1', '\n'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

ordered_json parse_json(const std::string& text, const std::string& what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError(what + ": invalid JSON");
  return j;
}

ordered_json box_to_xywh(const BoxGeometry& b) {
  return ordered_json::array(
      {b.tl_x, b.tl_y, b.br_x - b.tl_x, b.br_y - b.tl_y});
}

BoxGeometry box_from_xywh(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4)
    throw FormatError(what + ": bbox must be [x, y, w, h]");
  const double x = j[0].get<double>();
  const double y = j[1].get<double>();
  const double w = j[2].get<double>();
  const double h = j[3].get<double>();
  if (w < 0 || h < 0)
    throw FormatError(what + ": negative width or height in bbox");
  return BoxGeometry{x, y, x + w, y + h};
}

ordered_json level_to_json(const LevelGrids& lg,
                           const std::filesystem::path& dir,
                           const std::string& prefix) {
  ordered_json grids = ordered_json::object();
  for (const auto& [name, grid] : lg.grids) {
    const std::string rel = "grids/" + prefix + "_" + name + ".cngrid";
    save_grid(grid, dir / rel, name);
    grids[name] = rel;
  }
  return ordered_json{{"level_id", lg.level.level_id},
                      {"stride", lg.level.stride},
                      {"grids", grids}};
}

LevelGrids level_from_json(const ordered_json& j,
                           const std::filesystem::path& dir, int image_w,
                           int image_h) {
  LevelGrids lg;
  lg.level.level_id = j.at("level_id").get<std::string>();
  lg.level.stride = j.at("stride").get<int>();
  if (lg.level.stride <= 0)
    throw FormatError("manifest: stride must be positive for level " +
                      lg.level.level_id);
  const int want_w = (image_w + lg.level.stride - 1) / lg.level.stride;
  const int want_h = (image_h + lg.level.stride - 1) / lg.level.stride;
  for (const auto& [name, rel] : j.at("grids").items()) {
    DenseGrid g = load_grid(dir / rel.get<std::string>());
    if (g.width() != want_w || g.height() != want_h)
      throw ConfigError("grid " + name + " at level " + lg.level.level_id +
                        " has shape " + std::to_string(g.height()) + "x" +
                        std::to_string(g.width()) + ", expected " +
                        std::to_string(want_h) + "x" + std::to_string(want_w));
    lg.grids.emplace(name, std::move(g));
  }
  return lg;
}

}  // namespace

void save_grid(const DenseGrid& grid, const std::filesystem::path& path,
               const std::string& name) {
  ordered_json header{{"dtype", "f32le"},
                      {"shape", {grid.channels(), grid.height(), grid.width()}}};
  if (!name.empty()) header["name"] = name;
  const std::string header_text = header.dump();
  if (header_text.size() > 0xffffffffull)
    throw FormatError("grid header too large");

  std::string out;
  out.reserve(sizeof(kMagic) + 4 + header_text.size() + grid.size() * 4);
  out.append(kMagic, sizeof(kMagic));
  const uint32_t len = static_cast<uint32_t>(header_text.size());
  char len_bytes[4];
  std::memcpy(len_bytes, &len, 4);
  out.append(len_bytes, 4);
  out.append(header_text);
  out.append(reinterpret_cast<const char*>(grid.values().data()),
             grid.size() * 4);

  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  write_file(path, out);
}

DenseGrid load_grid(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const std::string what = path.filename().string();

  if (data.size() < sizeof(kMagic) + 4 ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError(what + ": bad magic, not a CNGRID1 file");

  uint32_t header_len = 0;
  std::memcpy(&header_len, data.data() + sizeof(kMagic), 4);
  const std::size_t header_start = sizeof(kMagic) + 4;
  if (data.size() < header_start + header_len)
    throw FormatError(what + ": truncated header");

  const ordered_json header =
      parse_json(data.substr(header_start, header_len), what + ": header");
  if (!header.contains("dtype") || header["dtype"] != "f32le")
    throw FormatError(what + ": dtype must be f32le");
  if (!header.contains("shape") || !header["shape"].is_array() ||
      header["shape"].size() != 3)
    throw FormatError(what + ": shape must be [C, H, W]");
  const int c = header["shape"][0].get<int>();
  const int h = header["shape"][1].get<int>();
  const int w = header["shape"][2].get<int>();
  if (c <= 0 || h <= 0 || w <= 0)
    throw FormatError(what + ": shape entries must be positive");

  const std::size_t count = static_cast<std::size_t>(c) * h * w;
  const std::size_t payload_start = header_start + header_len;
  if (data.size() - payload_start != count * 4)
    throw FormatError(what + ": payload size " +
                      std::to_string(data.size() - payload_start) +
                      " does not match shape (expected " +
                      std::to_string(count * 4) + " bytes)");

  std::vector<float> values(count);
  std::memcpy(values.data(), data.data() + payload_start, count * 4);
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::isfinite(values[k]))
      throw FormatError(what + ": non-finite value at index " +
                        std::to_string(k));
  }
  return DenseGrid(c, h, w, std::move(values));
}

std::string detections_to_json(const std::vector<Detection>& dets) {
  ordered_json arr = ordered_json::array();
  for (const Detection& d : dets) {
    arr.push_back(ordered_json{{"image_id", d.image_id},
                               {"category_id", d.class_id},
                               {"bbox", box_to_xywh(d.geometry)},
                               {"score", d.score}});
  }
  return arr.dump(2) + "\n";
}

void save_detections(const std::vector<Detection>& dets,
                     const std::filesystem::path& path) {
  write_file(path, detections_to_json(dets));
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
  const ordered_json arr = parse_json(read_file(path), "detections");
  if (!arr.is_array()) throw FormatError("detections: top level must be an array");
  std::vector<Detection> dets;
  dets.reserve(arr.size());
  for (const auto& j : arr) {
    Detection d;
    d.image_id = j.at("image_id").get<int64_t>();
    d.class_id = j.at("category_id").get<int>();
    d.geometry = box_from_xywh(j.at("bbox"), "detections");
    d.score = j.at("score").get<double>();
    dets.push_back(d);
  }
  return dets;
}

void save_ground_truth(const GroundTruthSet& gt,
                       const std::filesystem::path& path) {
  ordered_json images = ordered_json::array();
  for (const GtImage& im : gt.images) {
    images.push_back(ordered_json{
        {"id", im.id}, {"width", im.width}, {"height", im.height}});
  }
  ordered_json annotations = ordered_json::array();
  for (const GtAnnotation& a : gt.annotations) {
    annotations.push_back(ordered_json{{"image_id", a.image_id},
                                       {"category_id", a.class_id},
                                       {"bbox", box_to_xywh(a.geometry)}});
  }
  write_file(path,
             ordered_json{{"images", images}, {"annotations", annotations}}
                     .dump(2) +
                 "\n");
}

GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
  const ordered_json j = parse_json(read_file(path), "ground truth");
  GroundTruthSet gt;
  for (const auto& im : j.at("images")) {
    gt.images.push_back(GtImage{im.at("id").get<int64_t>(),
                                im.at("width").get<int>(),
                                im.at("height").get<int>()});
  }
  for (const auto& a : j.at("annotations")) {
    gt.annotations.push_back(GtAnnotation{
        a.at("image_id").get<int64_t>(), a.at("category_id").get<int>(),
        box_from_xywh(a.at("bbox"), "ground truth")});
  }
  return gt;
}

void save_scene(const Scene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "grids");

  ordered_json gt = ordered_json::array();
  for (const GtBox& b : scene.ground_truth) {
    gt.push_back(ordered_json{{"category_id", b.class_id},
                              {"bbox", box_to_xywh(b.geometry)}});
  }
  ordered_json noise = ordered_json::array();
  for (const NoisePeakPair& n : scene.noise) {
    noise.push_back(ordered_json{{"category_id", n.class_id},
                                 {"tl_cell", {n.tl_row, n.tl_col}},
                                 {"br_cell", {n.br_row, n.br_col}},
                                 {"tl_score", n.tl_score},
                                 {"br_score", n.br_score},
                                 {"embedding", n.embedding}});
  }
  ordered_json levels = ordered_json::array();
  for (const LevelGrids& lg : scene.levels) {
    levels.push_back(level_to_json(lg, dir, lg.level.level_id));
  }

  ordered_json manifest{{"image_id", scene.image_id},
                        {"width", scene.width},
                        {"height", scene.height},
                        {"num_classes", scene.num_classes},
                        {"ground_truth", gt},
                        {"noise", noise},
                        {"levels", levels}};
  if (scene.shared) {
    manifest["shared"] = level_to_json(*scene.shared, dir, "shared");
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Scene load_scene(const std::filesystem::path& dir) {
  const ordered_json m =
      parse_json(read_file(dir / "manifest.json"), "manifest");
  Scene scene;
  scene.image_id = m.at("image_id").get<int64_t>();
  scene.width = m.at("width").get<int>();
  scene.height = m.at("height").get<int>();
  scene.num_classes = m.at("num_classes").get<int>();
  if (scene.width <= 0 || scene.height <= 0)
    throw FormatError("manifest: image dimensions must be positive");

  for (const auto& b : m.at("ground_truth")) {
    scene.ground_truth.push_back(GtBox{
        b.at("category_id").get<int>(), box_from_xywh(b.at("bbox"), "manifest")});
  }
  for (const auto& n : m.at("noise")) {
    NoisePeakPair p;
    p.class_id = n.at("category_id").get<int>();
    p.tl_row = n.at("tl_cell")[0].get<int>();
    p.tl_col = n.at("tl_cell")[1].get<int>();
    p.br_row = n.at("br_cell")[0].get<int>();
    p.br_col = n.at("br_cell")[1].get<int>();
    p.tl_score = n.at("tl_score").get<double>();
    p.br_score = n.at("br_score").get<double>();
    p.embedding = n.at("embedding").get<double>();
    scene.noise.push_back(p);
  }
  for (const auto& lj : m.at("levels")) {
    scene.levels.push_back(
        level_from_json(lj, dir, scene.width, scene.height));
  }
  if (m.contains("shared")) {
    scene.shared = level_from_json(m["shared"], dir, scene.width, scene.height);
  }
  return scene;
}

std::vector<std::filesystem::path> list_scene_dirs(
    const std::filesystem::path& root) {
  const std::filesystem::path scenes = root / "scenes";
  if (!std::filesystem::is_directory(scenes))
    throw ConfigError("no scenes directory under " + root.string());
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(scenes)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "manifest.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace tdet
