#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fruitsynth/cloud.hpp"
#include "fruitsynth/dataset.hpp"
#include "fruitsynth/errors.hpp"
#include "fruitsynth/grasp.hpp"
#include "fruitsynth/json_io.hpp"
#include "fruitsynth/metrics.hpp"
#include "fruitsynth/objprep.hpp"
#include "fruitsynth/png_io.hpp"
#include "fruitsynth/report.hpp"
#include "fruitsynth/scenegen.hpp"

namespace fruitsynth::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Semantic usage problems found after parsing (missing companion flag etc.).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("fruitsynth");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::info);
    if (const char* env = std::getenv("FRUITSYNTH_LOG_LEVEL")) l->set_level(spdlog::level::from_str(env));
    return l;
  }();
  return log;
}

std::pair<double, double> parse_real_range(const std::string& text, const char* what) {
  const auto pos = text.find("..");
  try {
    if (pos == std::string::npos) {
      const double v = std::stod(text);
      return {v, v};
    }
    return {std::stod(text.substr(0, pos)), std::stod(text.substr(pos + 2))};
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + ": expected LO..HI, got '" + text + "'");
  }
}

std::pair<int, int> parse_int_range(const std::string& text, const char* what) {
  const auto [lo, hi] = parse_real_range(text, what);
  if (lo != static_cast<int>(lo) || hi != static_cast<int>(hi))
    throw UsageError(std::string(what) + ": expected integers, got '" + text + "'");
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

std::pair<int, int> parse_dims(const std::string& text, const char* what) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("no x");
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw UsageError(std::string(what) + ": expected WxH, got '" + text + "'");
  }
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::IoError, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

fs::path parent_or_cwd(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

/// Records the effective options of a subcommand next to its outputs.
void echo_config(const CLI::App& sub, const fs::path& dir) {
  ordered_json cfg;
  cfg["command"] = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      const auto& res = opt->results();
      cfg[name] = res.size() == 1 ? ordered_json(res.front()) : ordered_json(res);
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  ensure_dir(dir);
  write_text_file(dir / "run_config.json", cfg.dump(1) + "\n");
}

/// Expands `--config FILE` into ordinary flags placed right after the
/// subcommand path and ahead of the explicit flags, so explicit flags win.
/// Accepts a JSON object (flat, or nested by subcommand name) or key=value
/// lines with optional [section] headers naming a subcommand.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> path, rest;
  std::size_t i = 0;
  for (; i < args.size() && !args[i].empty() && args[i][0] != '-'; ++i) path.push_back(args[i]);
  std::optional<std::string> config_path;
  for (; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config_path) return args;

  std::vector<std::string> flags;
  auto add = [&](const std::string& key, const std::string& value) {
    if (value == "true") {
      flags.push_back("--" + key);
    } else if (value != "false") {
      flags.push_back("--" + key + "=" + value);
    }
  };
  std::string text;
  try {
    text = read_text_file(*config_path);
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config '" + *config_path + "': " + e.what());
    }
    auto emit_level = [&](const nlohmann::json& obj) {
      for (const auto& [key, v] : obj.items()) {
        if (v.is_object()) continue;  // a subcommand section
        if (v.is_array()) {
          for (const auto& x : v) add(key, x.is_string() ? x.get<std::string>() : x.dump());
        } else {
          add(key, v.is_string() ? v.get<std::string>() : v.dump());
        }
      }
    };
    // Outer levels first so the more specific section wins.
    const nlohmann::json* level = &j;
    emit_level(*level);
    for (const auto& name : path) {
      if (!level->contains(name) || !level->at(name).is_object()) break;
      level = &level->at(name);
      emit_level(*level);
    }
  } else {
    std::istringstream is(text);
    std::string line, section;
    std::string joined;
    for (const auto& p : path) joined += (joined.empty() ? "" : ".") + p;
    auto section_applies = [&] {
      if (section.empty() || section == joined) return true;
      return std::find(path.begin(), path.end(), section) != path.end();
    };
    while (std::getline(is, line)) {
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] == '#' || line[b] == ';') continue;
      line = line.substr(b);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (line.front() == '[') {
        section = line.substr(1, line.find(']') - 1);
        continue;
      }
      if (!section_applies()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config '" + *config_path + "': expected key=value, got '" + line + "'");
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\""));
        s.erase(s.find_last_not_of(" \t\"") + 1);
        return s;
      };
      add(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  std::vector<std::string> out = path;
  out.insert(out.end(), flags.begin(), flags.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<Detection> detections_for_scene(std::vector<Detection> dets, const std::string& scene_id) {
  if (scene_id.empty()) {
    std::set<std::string> scenes;
    for (const auto& d : dets) scenes.insert(d.scene_id);
    if (scenes.size() > 1) throw UsageError("predictions span several scenes; pass --scene-id");
    return dets;
  }
  std::erase_if(dets, [&](const Detection& d) { return d.scene_id != scene_id; });
  return dets;
}

BitMask detection_mask(const Detection& d, int width, int height) {
  if (d.mask) {
    if (d.mask->width() != width || d.mask->height() != height)
      throw Error(Errc::DimensionMismatch, "prediction mask dims differ from the depth frame");
    return *d.mask;
  }
  return BitMask::filled_box(width, height, d.bbox);
}

// ---------------------------------------------------------------------------

struct AnnotateArgs {
  std::string in, out, category;
  int white_thresh = 240;
  int min_area = 16;
};

void cmd_annotate(const AnnotateArgs& a, const CLI::App& sub) {
  const Category category = parse_category(a.category);
  SelfAnnotateConfig cfg;
  cfg.white.min_channel_value = a.white_thresh;
  cfg.min_component_area = a.min_area;
  cfg.white.validate();

  std::vector<AnnotatedObject> objects;
  std::size_t skipped = 0;
  for (const auto& file : list_pngs(a.in)) {
    const std::string id = std::string(category_name(category)) + "_" + file.stem().string();
    try {
      objects.push_back(self_annotate(read_png_rgb(file), cfg, category, id));
    } catch (const Error& e) {
      if (e.code() != Errc::EmptyMask) throw Error(e.code(), file.string() + ": " + e.what());
      logger()->warn("{}: no object found, skipped", file.string());
      ++skipped;
    }
  }
  write_object_library(a.out, objects);
  echo_config(sub, a.out);
  logger()->info("annotated {} objects ({} skipped) into {}", objects.size(), skipped, a.out);
}

struct SceneArgs {
  std::vector<std::string> objects;
  std::string backgrounds, out;
  int n_scenes = 1;
  std::string instances = "10..10";
  std::uint64_t seed = 0;
  bool augment = false;
  std::string jitter = "0.5..2.0";
  std::string scene_size = "1280x720";
  double flip_prob = 0.5;
  double visibility_floor = 0.05;
  bool rotation = false;
  std::string letterbox;
  int jobs = 0;
};

void cmd_make_scenes(const SceneArgs& a, const CLI::App& sub) {
  SynthConfig cfg;
  std::tie(cfg.scene_width, cfg.scene_height) = parse_dims(a.scene_size, "--scene-size");
  std::tie(cfg.min_instances, cfg.max_instances) = parse_int_range(a.instances, "--instances-per-scene");
  std::tie(cfg.scale_lo, cfg.scale_hi) = parse_real_range(a.jitter, "--jitter");
  cfg.flip_prob = a.flip_prob;
  cfg.visibility_floor = a.visibility_floor;
  cfg.allow_rotation = a.rotation;
  if (a.augment) cfg.augment = AugmentConfig::all_on();
  if (a.n_scenes < 0) throw UsageError("--n-scenes must be >= 0");
  cfg.validate();
  std::optional<std::pair<int, int>> letterbox_dims;
  if (!a.letterbox.empty()) letterbox_dims = parse_dims(a.letterbox, "--letterbox");

  std::vector<AnnotatedObject> objects;
  for (const auto& dir : a.objects) {
    auto lib = read_object_library(dir);
    objects.insert(objects.end(), std::make_move_iterator(lib.begin()), std::make_move_iterator(lib.end()));
  }
  if (objects.empty()) throw UsageError("no objects found in --objects");
  std::vector<std::pair<std::string, RgbImage>> backgrounds;
  for (const auto& f : list_pngs(a.backgrounds)) backgrounds.emplace_back(f.filename().string(), read_png_rgb(f));
  if (backgrounds.empty()) throw UsageError("no PNG backgrounds in '" + a.backgrounds + "'");

  const Rng master(a.seed);
  const auto n = static_cast<std::size_t>(a.n_scenes);
  std::vector<std::optional<SceneAnnotation>> scenes(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        char id[32];
        std::snprintf(id, sizeof id, "scene_%05zu", i);
        auto scene = generate_scene(master.child(i), cfg, objects, backgrounds, id);
        if (letterbox_dims) scene = letterbox_scene(scene, letterbox_dims->first, letterbox_dims->second);
        scenes[i] = std::move(scene);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(a.jobs > 0 ? static_cast<std::size_t>(a.jobs) : hw, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<SceneAnnotation> out;
  out.reserve(n);
  for (auto& s : scenes) out.push_back(std::move(*s));
  emit_dataset(out, a.out);
  echo_config(sub, a.out);
  std::size_t instances = 0;
  for (const auto& s : out) instances += s.instances.size();
  logger()->info("wrote {} scenes with {} annotated instances to {}", out.size(), instances, a.out);
}

struct EvalArgs {
  std::string gt, pred, mode = "box", out;
};

void cmd_eval(const EvalArgs& a, const CLI::App& sub) {
  const IouMode mode = parse_iou_mode(a.mode);
  const auto gt = load_ground_truth(a.gt);
  const auto dets = load_predictions(a.pred, &gt);
  const auto report = evaluate(dets, gt.instances, mode);
  for (Category c : report.skipped_categories)
    logger()->warn("category '{}' has detections but no ground truth; skipped", category_name(c));
  if (report.overall.ap == 0.0 && report.overall.ar == 0.0) logger()->warn("AP and AR are both zero; F1 reported as 0");

  std::vector<PrCurve> curves{pr_curve(dets, gt.instances, 0.5, mode), pr_curve(dets, gt.instances, 0.75, mode)};
  const fs::path out(a.out);
  const fs::path dir = parent_or_cwd(out);
  ensure_dir(dir);
  write_text_file(out, metrics_report_json(report, curves));
  write_text_file(dir / (out.stem().string() + "_pr_iou50.csv"), pr_curve_csv(curves[0]));
  write_text_file(dir / (out.stem().string() + "_pr_iou75.csv"), pr_curve_csv(curves[1]));
  echo_config(sub, dir);
  logger()->info("AP@[0.5:0.95]={:.1f} AR@[0.5:0.95]={:.1f} F1={:.1f}", report.overall.ap, report.overall.ar,
                 report.overall.f1);
}

struct CloudArgs {
  std::string depth, intrinsics, method = "dbscan", pred, out, scene_id, xyz, gt;
  int k = 10;
  int max_iters = 100;
  double eps = 0.020;
  int min_pts = 10;
  double ransac_dist = 0.005;
  int ransac_iters = 1000;
  bool no_plane_removal = false;
  std::uint64_t seed = 0;
  double iou = 0.5;
  double min_score = 0.0;
  int stride = 1;
};

void cmd_cloud_seg(const CloudArgs& a, const CLI::App& sub) {
  if (a.method != "kmeans" && a.method != "dbscan" && a.method != "masks")
    throw UsageError("--method must be kmeans, dbscan or masks");
  if (a.method == "masks" && a.pred.empty()) throw UsageError("--method masks requires --pred");
  if (a.stride < 1) throw UsageError("--stride must be >= 1");
  const auto depth = read_png_depth(a.depth);
  const auto intr = parse_intrinsics(read_text_file(a.intrinsics));
  std::optional<BitMask> roi;
  if (a.stride > 1) {
    roi.emplace(depth.width(), depth.height());
    for (int v = 0; v < depth.height(); v += a.stride)
      for (int u = 0; u < depth.width(); u += a.stride) roi->set(u, v);
  }
  const auto cloud = backproject(depth, intr, roi);
  ClusterLabels labels(cloud.size(), kNoise);
  Rng rng(a.seed);
  std::optional<PlaneFit> plane;
  std::vector<double> cluster_scores;

  std::optional<GroundTruthSet> gt;
  if (!a.gt.empty()) gt = load_ground_truth(a.gt);

  if (a.method == "masks") {
    auto dets = detections_for_scene(load_predictions(a.pred, gt ? &*gt : nullptr), a.scene_id);
    std::erase_if(dets, [&](const Detection& d) { return d.confidence < a.min_score; });
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return dets[x].confidence > dets[y].confidence; });
    int next_label = 0;
    for (std::size_t idx : order) {
      const BitMask mask = detection_mask(dets[idx], depth.width(), depth.height());
      bool used = false;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& r = (*cloud.pixel_ref)[i];
        if (labels[i] == kNoise && mask.get(r.u, r.v)) {
          labels[i] = next_label;
          used = true;
        }
      }
      if (used) {
        cluster_scores.push_back(dets[idx].confidence);
        ++next_label;
      }
    }
  } else {
    std::vector<std::size_t> keep(cloud.size());
    std::iota(keep.begin(), keep.end(), std::size_t{0});
    if (!a.no_plane_removal && cloud.size() >= 3) {
      plane = ransac_plane(cloud, a.ransac_dist, a.ransac_iters, rng);
      keep = complement_indices(cloud.size(), plane->inliers);
    }
    const auto rest = select_points(cloud, keep);
    ClusterLabels sub_labels;
    if (a.method == "kmeans") {
      if (rest.size() >= static_cast<std::size_t>(a.k)) sub_labels = kmeans(rest, a.k, a.max_iters, rng);
      else logger()->warn("only {} points left after plane removal; fewer than k={}", rest.size(), a.k);
    } else {
      sub_labels = dbscan(rest, a.eps, a.min_pts);
    }
    for (std::size_t i = 0; i < sub_labels.size(); ++i) labels[keep[i]] = sub_labels[i];
  }

  ordered_json doc;
  doc["method"] = a.method;
  doc["n_points"] = cloud.size();
  if (plane) {
    doc["plane"] = ordered_json{{"normal", {plane->plane.normal.x(), plane->plane.normal.y(), plane->plane.normal.z()}},
                                {"offset", plane->plane.offset},
                                {"inliers", plane->inliers.size()}};
  }
  int n_clusters = 0;
  for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
  doc["n_clusters"] = n_clusters;
  ordered_json clusters = ordered_json::array();
  for (int c = 0; c < n_clusters; ++c) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::size_t size = 0;
    int u0 = depth.width(), v0 = depth.height(), u1 = -1, v1 = -1;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (labels[i] != c) continue;
      sum += cloud.points[i];
      ++size;
      const auto& r = (*cloud.pixel_ref)[i];
      u0 = std::min(u0, r.u);
      v0 = std::min(v0, r.v);
      u1 = std::max(u1, r.u);
      v1 = std::max(v1, r.v);
    }
    if (size == 0) continue;
    const Eigen::Vector3d centroid = sum / static_cast<double>(size);
    ordered_json entry{{"label", c},
                       {"size", size},
                       {"centroid", {centroid.x(), centroid.y(), centroid.z()}},
                       {"pixel_bbox", {u0, v0, u1 - u0 + 1, v1 - v0 + 1}}};
    if (static_cast<std::size_t>(c) < cluster_scores.size()) entry["score"] = cluster_scores[static_cast<std::size_t>(c)];
    clusters.push_back(std::move(entry));
  }
  doc["clusters"] = clusters;

  if (gt) {
    const auto dims = gt->scene_dims.find(a.scene_id);
    if (a.scene_id.empty() || dims == gt->scene_dims.end()) throw UsageError("--gt requires a --scene-id present in it");
    ClusterLabels gt_labels(cloud.size(), kNoise);
    int label = 0;
    for (const auto& g : gt->instances) {
      if (g.scene_id != a.scene_id) continue;
      const BitMask m = g.mask ? *g.mask : BitMask::filled_box(dims->second.first, dims->second.second, g.bbox);
      if (m.width() != depth.width() || m.height() != depth.height())
        throw Error(Errc::DimensionMismatch, "ground-truth masks do not match the depth frame");
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& r = (*cloud.pixel_ref)[i];
        if (gt_labels[i] == kNoise && m.get(r.u, r.v)) gt_labels[i] = label;
      }
      ++label;
    }
    const auto scores = cloud_seg_metrics(labels, gt_labels, a.iou);
    doc["scores"] = nlohmann::ordered_json::parse(cloud_seg_scores_json(scores));
  }

  const fs::path out(a.out);
  ensure_dir(parent_or_cwd(out));
  write_text_file(out, doc.dump(1) + "\n");
  if (!a.xyz.empty()) write_xyz(a.xyz, cloud, &labels);
  echo_config(sub, parent_or_cwd(out));
  logger()->info("{}: {} points, {} clusters", a.method, cloud.size(), n_clusters);
}

struct GraspArgs {
  std::string cloud, depth, pred, intrinsics, extrinsics, out, scene_id;
  double radius = 0.010;
  int normal_k = 30;
  std::string vertical = "0,0,1";
};

void cmd_grasp(const GraspArgs& a, const CLI::App& sub) {
  if (a.cloud.empty() == a.depth.empty()) throw UsageError("pass exactly one of --cloud or --depth");
  const auto intr = parse_intrinsics(read_text_file(a.intrinsics));
  GraspConfig cfg;
  cfg.region_radius = a.radius;
  cfg.normal_k = a.normal_k;
  if (!a.extrinsics.empty()) cfg.camera_to_world = parse_extrinsics(read_text_file(a.extrinsics));
  {
    std::istringstream vs(a.vertical);
    std::string tok;
    std::vector<double> v;
    while (std::getline(vs, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != 3) throw UsageError("--vertical expects x,y,z");
    cfg.vertical = Eigen::Vector3d(v[0], v[1], v[2]).normalized();
  }

  PointCloud cloud;
  int width = 0, height = 0;
  if (!a.depth.empty()) {
    const auto depth = read_png_depth(a.depth);
    width = depth.width();
    height = depth.height();
    cloud = backproject(depth, intr);
  } else {
    cloud = read_xyz(a.cloud).first;
    if (!cloud.pixel_ref) {
      cloud.pixel_ref.emplace();
      for (const auto& p : cloud.points) cloud.pixel_ref->push_back(project(p, intr));
    }
    for (const auto& r : *cloud.pixel_ref) {
      width = std::max(width, r.u + 1);
      height = std::max(height, r.v + 1);
    }
  }

  const auto dets = detections_for_scene(load_predictions(a.pred), a.scene_id);
  const std::size_t target = select_target(dets);
  const Detection& det = dets[target];
  if (det.mask) {
    width = det.mask->width();
    height = det.mask->height();
  }
  if (width < 1 || height < 1) throw Error(Errc::EmptyCloud, "cloud has no points");
  const auto instance = mask_to_cloud(cloud, detection_mask(det, width, height));
  const auto grasp = grasp_point(instance, cfg);

  ordered_json doc{
      {"target", {{"index", target},
                  {"category", category_name(det.category)},
                  {"category_id", category_id(det.category)},
                  {"confidence", det.confidence},
                  {"bbox", {det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h}}}},
      {"point", {grasp.point.x(), grasp.point.y(), grasp.point.z()}},
      {"normal", {grasp.normal.x(), grasp.normal.y(), grasp.normal.z()}},
      {"alignment", grasp.alignment},
      {"centroid_dist", grasp.centroid_dist},
      {"radius_used", grasp.radius_used},
      {"instance_points", instance.size()},
      {"point_index", grasp.index},
  };
  const fs::path out(a.out);
  ensure_dir(parent_or_cwd(out));
  write_text_file(out, doc.dump(1) + "\n");
  echo_config(sub, parent_or_cwd(out));
  logger()->info("target {} ({}, {:.3f}) grasp alignment {:.4f}", target, category_name(det.category), det.confidence,
                 grasp.alignment);
}

struct ReportArgs {
  std::string params, tally, variant, in, out, csv;
  std::size_t n_scenes = 0;
  std::vector<std::string> categories;
  int white_thresh = 240;
  int min_area = 16;
  std::size_t min_images = 100;
};

void emit(const ReportArgs& a, const std::string& json) {
  if (a.out.empty()) {
    std::fwrite(json.data(), 1, json.size(), stdout);
    return;
  }
  ensure_dir(parent_or_cwd(a.out));
  write_text_file(a.out, json);
}

void cmd_report_cost(const ReportArgs& a) {
  const auto params = a.params.empty() ? table1_cost_params() : parse_cost_params(read_text_file(a.params));
  std::set<Category> cats;
  if (a.categories.empty()) {
    for (const auto& [c, t] : params.gan) cats.insert(c);
  } else {
    for (const auto& name : a.categories) cats.insert(parse_category(name));
  }
  const double seconds = estimate_prep_time(a.n_scenes, params, cats);
  ordered_json doc{{"n_scenes", a.n_scenes},
                   {"fixed_s", estimate_prep_time(0, params, cats)},
                   {"per_scene_s", prep_time_slope(params)},
                   {"total_s", seconds}};
  emit(a, doc.dump(1) + "\n");
  if (!a.csv.empty()) {
    std::ostringstream csv;
    csv << "n_scenes,seconds\n";
    const std::size_t steps = 20;
    for (std::size_t i = 0; i <= steps; ++i) {
      const std::size_t n = a.n_scenes * i / steps;
      csv << n << ',' << estimate_prep_time(n, params, cats) << '\n';
    }
    write_text_file(a.csv, csv.str());
  }
}

void cmd_report_success(const ReportArgs& a) {
  TrialTally tally;
  if (!a.tally.empty()) {
    tally = parse_tally(read_text_file(a.tally));
  } else {
    const auto builtin = table4_tallies();
    const auto it = builtin.find(a.variant.empty() ? "gen_hybrid" : a.variant);
    if (it == builtin.end()) throw UsageError("--variant must be real_only, cp_hybrid or gen_hybrid");
    tally = it->second;
  }
  const auto rates = success_rates(tally);
  emit(a, success_rates_json(rates));
  if (!a.csv.empty()) {
    std::ostringstream csv;
    csv << "category,labelling,grasping\n";
    for (Category c : kAllCategories) {
      if (!rates.labelling.count(c) && !rates.grasping.count(c)) continue;
      csv << category_name(c) << ',' << (rates.labelling.count(c) ? rates.labelling.at(c) : 0.0) << ','
          << (rates.grasping.count(c) ? rates.grasping.at(c) : 0.0) << '\n';
    }
    csv << "total," << rates.labelling_total << ',' << rates.grasping_total << '\n';
    write_text_file(a.csv, csv.str());
  }
}

void cmd_report_bench(const ReportArgs& a) {
  SelfAnnotateConfig cfg;
  cfg.white.min_channel_value = a.white_thresh;
  cfg.min_component_area = a.min_area;
  const auto r = bench_self_annotation(fs::path(a.in), cfg, a.min_images);
  emit(a, bench_report_json(r));
  if (!a.csv.empty()) {
    std::ostringstream csv;
    csv << "index,latency_ms\n";
    for (std::size_t i = 0; i < r.latencies_ms.size(); ++i) csv << i << ',' << r.latencies_ms[i] << '\n';
    write_text_file(a.csv, csv.str());
  }
  logger()->info("self-annotation mean {:.3f} ms over {} images ({:.3f}x reference)", r.mean_ms, r.samples,
                 r.ratio_to_reference);
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  CLI::App app{"Synthetic fruit dataset toolkit: self-annotation, scene synthesis, evaluation, point-cloud "
               "segmentation and suction grasp selection.",
               "fruitsynth"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto add_config_flag = [](CLI::App* sub) {
    sub->add_option("--config", "JSON or key=value file mirroring the flags (explicit flags win)");
  };

  AnnotateArgs annotate;
  auto* s_annotate = app.add_subcommand("annotate-objects", "Self-annotate white-background object images");
  s_annotate->add_option("--in", annotate.in, "Directory of object-wise PNG images")->required();
  s_annotate->add_option("--out", annotate.out, "Output object library directory")->required();
  s_annotate->add_option("--category", annotate.category, "Category name or id")->required();
  s_annotate->add_option("--white-thresh", annotate.white_thresh, "Background iff every channel >= this")
      ->check(CLI::Range(1, 255));
  s_annotate->add_option("--min-area", annotate.min_area, "Minimum 4-connected component area (px)")
      ->check(CLI::NonNegativeNumber);
  add_config_flag(s_annotate);

  SceneArgs scenes;
  auto* s_scenes = app.add_subcommand("make-scenes", "Compose annotated synthetic table-top scenes");
  s_scenes->add_option("--objects", scenes.objects, "Object library directory (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_scenes->add_option("--backgrounds", scenes.backgrounds, "Directory of background PNGs")->required();
  s_scenes->add_option("--n-scenes", scenes.n_scenes, "Number of scenes")->required();
  s_scenes->add_option("--instances-per-scene", scenes.instances, "Instance count range A..B");
  s_scenes->add_option("--seed", scenes.seed, "Master seed");
  s_scenes->add_option("--out", scenes.out, "Output directory")->required();
  s_scenes->add_flag("--augment", scenes.augment, "Enable photometric and flip augmentation");
  s_scenes->add_option("--jitter", scenes.jitter, "Scale jitter range LO..HI");
  s_scenes->add_option("--scene-size", scenes.scene_size, "Scene dimensions WxH");
  s_scenes->add_option("--flip-prob", scenes.flip_prob, "Per-instance horizontal flip probability");
  s_scenes->add_option("--visibility-floor", scenes.visibility_floor, "Drop instances less visible than this fraction");
  s_scenes->add_flag("--rotation", scenes.rotation, "Allow quarter-turn rotations of pasted instances");
  s_scenes->add_option("--letterbox", scenes.letterbox, "Letterbox scenes to WxH after composition");
  s_scenes->add_option("--jobs", scenes.jobs, "Worker threads (0 = hardware concurrency)");
  add_config_flag(s_scenes);

  EvalArgs eval;
  auto* s_eval = app.add_subcommand("eval", "Score predictions against ground truth (AP/AR/F1/PR)");
  s_eval->add_option("--gt", eval.gt, "Ground-truth annotations.json")->required();
  s_eval->add_option("--pred", eval.pred, "Predictions JSON")->required();
  s_eval->add_option("--mode", eval.mode, "box or mask")->check(CLI::IsMember({"box", "mask"}));
  s_eval->add_option("--out", eval.out, "Report JSON path")->required();
  add_config_flag(s_eval);

  CloudArgs cloud;
  auto* s_cloud = app.add_subcommand("cloud-seg", "Depth back-projection and point-cloud instance segmentation");
  s_cloud->add_option("--depth", cloud.depth, "16-bit depth PNG (mm)")->required();
  s_cloud->add_option("--intrinsics", cloud.intrinsics, "Camera intrinsics JSON")->required();
  s_cloud->add_option("--method", cloud.method, "kmeans, dbscan or masks")
      ->check(CLI::IsMember({"kmeans", "dbscan", "masks"}));
  s_cloud->add_option("--pred", cloud.pred, "Predictions JSON (masks method)");
  s_cloud->add_option("--scene-id", cloud.scene_id, "Scene to take predictions / ground truth from");
  s_cloud->add_option("--out", cloud.out, "Clusters JSON path")->required();
  s_cloud->add_option("--xyz", cloud.xyz, "Also write the labelled cloud as ASCII XYZ");
  s_cloud->add_option("--gt", cloud.gt, "Ground-truth annotations.json for scoring");
  s_cloud->add_option("--iou", cloud.iou, "IoU threshold for scoring");
  s_cloud->add_option("--k", cloud.k, "K-means cluster count (expected objects)");
  s_cloud->add_option("--max-iters", cloud.max_iters, "K-means iteration cap");
  s_cloud->add_option("--eps", cloud.eps, "DBSCAN radius (m)");
  s_cloud->add_option("--min-pts", cloud.min_pts, "DBSCAN core threshold");
  s_cloud->add_option("--ransac-dist", cloud.ransac_dist, "Plane inlier distance (m)");
  s_cloud->add_option("--ransac-iters", cloud.ransac_iters, "RANSAC iterations");
  s_cloud->add_flag("--no-plane-removal", cloud.no_plane_removal, "Skip table plane removal");
  s_cloud->add_option("--seed", cloud.seed, "Seed for RANSAC / k-means");
  s_cloud->add_option("--min-score", cloud.min_score, "Ignore predictions below this score");
  s_cloud->add_option("--stride", cloud.stride, "Use every Nth pixel in each direction");
  add_config_flag(s_cloud);

  GraspArgs grasp;
  auto* s_grasp = app.add_subcommand("grasp-point", "Pick the most confident instance and its suction point");
  s_grasp->add_option("--cloud", grasp.cloud, "ASCII XYZ cloud (camera frame)");
  s_grasp->add_option("--depth", grasp.depth, "16-bit depth PNG instead of --cloud");
  s_grasp->add_option("--pred", grasp.pred, "Predictions JSON")->required();
  s_grasp->add_option("--intrinsics", grasp.intrinsics, "Camera intrinsics JSON")->required();
  s_grasp->add_option("--extrinsics", grasp.extrinsics, "Camera-to-world extrinsics JSON");
  s_grasp->add_option("--out", grasp.out, "Grasp JSON path")->required();
  s_grasp->add_option("--scene-id", grasp.scene_id, "Scene to take predictions from");
  s_grasp->add_option("--radius", grasp.radius, "Candidate region radius (m)");
  s_grasp->add_option("--normal-k", grasp.normal_k, "Neighbours for normal estimation");
  s_grasp->add_option("--vertical", grasp.vertical, "World vertical x,y,z");
  add_config_flag(s_grasp);

  ReportArgs rep;
  auto* s_report = app.add_subcommand("report", "Cost model, success-rate and throughput reports");
  s_report->require_subcommand(1);
  auto* r_cost = s_report->add_subcommand("cost", "Dataset preparation time estimate");
  r_cost->add_option("--params", rep.params, "Cost parameters JSON (default: built-in GAN timings)");
  r_cost->add_option("--n-scenes", rep.n_scenes, "Number of 10-fruit scenes")->required();
  r_cost->add_option("--categories", rep.categories, "Categories to include (default: all in params)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',');
  r_cost->add_option("--out", rep.out, "JSON output (default stdout)");
  r_cost->add_option("--csv", rep.csv, "CSV of time vs scene count");
  auto* r_success = s_report->add_subcommand("success", "Labelling / grasping success rates");
  r_success->add_option("--tally", rep.tally, "Tally JSON");
  r_success->add_option("--variant", rep.variant, "Built-in tally: real_only, cp_hybrid, gen_hybrid");
  r_success->add_option("--out", rep.out, "JSON output (default stdout)");
  r_success->add_option("--csv", rep.csv, "CSV output");
  auto* r_bench = s_report->add_subcommand("bench", "Self-annotation latency benchmark");
  r_bench->add_option("--in", rep.in, "Directory of object-wise PNGs")->required();
  r_bench->add_option("--white-thresh", rep.white_thresh, "Background threshold")->check(CLI::Range(1, 255));
  r_bench->add_option("--min-area", rep.min_area, "Minimum component area");
  r_bench->add_option("--min-images", rep.min_images, "Required image count");
  r_bench->add_option("--out", rep.out, "JSON output (default stdout)");
  r_bench->add_option("--csv", rep.csv, "Per-image latency CSV");

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (s_annotate->parsed()) cmd_annotate(annotate, *s_annotate);
    else if (s_scenes->parsed()) cmd_make_scenes(scenes, *s_scenes);
    else if (s_eval->parsed()) cmd_eval(eval, *s_eval);
    else if (s_cloud->parsed()) cmd_cloud_seg(cloud, *s_cloud);
    else if (s_grasp->parsed()) cmd_grasp(grasp, *s_grasp);
    else if (r_cost->parsed()) cmd_report_cost(rep);
    else if (r_success->parsed()) cmd_report_success(rep);
    else if (r_bench->parsed()) cmd_report_bench(rep);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    logger()->error("usage: {}", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    logger()->error("{}", e.what());
    return e.code() == Errc::InvalidArgument ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace fruitsynth::cli
