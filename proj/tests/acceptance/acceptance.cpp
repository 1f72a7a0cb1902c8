// One PASS/FAIL line per acceptance criterion. Tolerances are pinned here, not
// taken from the command line. --only/--skip select criteria by id so ctest can
// register a known-red criterion separately.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixtures.hpp"
#include "geometry.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "fruitsynth/cloud.hpp"
#include "fruitsynth/dataset.hpp"
#include "fruitsynth/grasp.hpp"
#include "fruitsynth/letterbox.hpp"
#include "fruitsynth/metrics.hpp"
#include "fruitsynth/report.hpp"
#include "fruitsynth/rle.hpp"
#include "fruitsynth/scenegen.hpp"

using namespace fruitsynth;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Reference values are quoted to one decimal; compare after rounding.
bool within_tenth(double value, double expected) { return std::abs(round_half_up(value, 1) - expected) <= 0.05; }

PointCloud make_cloud(std::vector<Eigen::Vector3d> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

Outcome f1_rows() {
  const auto t0 = Clock::now();
  struct Row {
    double ap, ar, f1;
  };
  const Row rows[] = {{57.8, 89.2, 70.1}, {58.1, 89.4, 70.4}, {91.6, 92.6, 92.1}};
  bool ok = true;
  std::ostringstream os;
  for (const auto& r : rows) {
    const double v = f1(r.ap, r.ar);
    ok = ok && within_tenth(v, r.f1);
    os << fmt("f1(%.1f,%.1f)=%.4f ", r.ap, r.ar, v);
  }
  const double dt = seconds_since(t0);
  os << fmt("in %.3g s", dt);
  return {ok && dt < 1.0, os.str()};
}

Outcome success_variant(const std::string& variant, bool labelling, bool grasping, double lab, double gra) {
  const auto rates = success_rates(table4_tallies().at(variant));
  bool ok = true;
  std::string detail;
  if (labelling) {
    ok = ok && within_tenth(rates.labelling_total, lab);
    detail += fmt("labelling %.1f%% (expected %.1f) ", rates.labelling_total, lab);
  }
  if (grasping) {
    ok = ok && within_tenth(rates.grasping_total, gra);
    detail += fmt("grasping %.1f%% (expected %.1f)", rates.grasping_total, gra);
  }
  while (!detail.empty() && detail.back() == ' ') detail.pop_back();
  return {ok, detail};
}

Outcome cost_model() {
  const auto p = table1_cost_params();
  const std::set<Category> apple{Category::Apple};
  const double t0 = estimate_prep_time(0, p, apple);
  const double slope = prep_time_slope(p);
  bool affine = true;
  for (std::size_t n : {100U, 2000U}) {
    const double tn = estimate_prep_time(n, p, apple);
    affine = affine && std::abs(tn - (t0 + static_cast<double>(n) * slope)) <= 1e-9 * std::max(1.0, tn);
  }
  const double t100 = estimate_prep_time(100, p, apple), t2000 = estimate_prep_time(2000, p, apple);
  const bool slope_ok = std::abs((t2000 - t100) / 1900.0 - slope) <= 1e-9;
  const bool fixed_ok = std::abs(t0 - 1472.65) <= 1e-9 && fmt("%.2f", t0) == "1472.65";
  return {fixed_ok && affine && slope_ok,
          fmt("t(0)=%.2f s, slope %.6f s/scene, affine at n=100 and n=2000: %s", t0, slope, affine && slope_ok ? "yes" : "no")};
}

Outcome ap_oracle() {
  Rng rng(4001);
  double worst = 0.0;
  const auto thresholds = sweep_thresholds();
  for (int trial = 0; trial < 500; ++trial) {
    const IouMode mode = trial % 2 == 0 ? IouMode::Box : IouMode::Mask;
    auto random_box = [&] {
      return Bbox{static_cast<int>(rng.uniform_int(0, 10)), static_cast<int>(rng.uniform_int(0, 10)),
                  static_cast<int>(rng.uniform_int(1, 9)), static_cast<int>(rng.uniform_int(1, 9))};
    };
    std::vector<GroundTruth> gts;
    std::vector<Detection> dets;
    const int ng = static_cast<int>(rng.uniform_int(1, 5));
    const int nd = static_cast<int>(rng.uniform_int(0, 5));
    for (int i = 0; i < ng; ++i) {
      GroundTruth g{rng.bernoulli(0.5) ? "s0" : "s1", rng.bernoulli(0.6) ? Category::Apple : Category::Orange,
                    random_box(), std::nullopt};
      if (mode == IouMode::Mask) g.mask = BitMask::filled_box(20, 20, g.bbox);
      gts.push_back(g);
    }
    for (int i = 0; i < nd; ++i) {
      Detection d{rng.bernoulli(0.5) ? "s0" : "s1", rng.bernoulli(0.6) ? Category::Apple : Category::Orange,
                  static_cast<double>(rng.uniform_int(1, 5)) / 5.0, random_box(), std::nullopt};
      if (mode == IouMode::Mask) d.mask = BitMask::filled_box(20, 20, d.bbox);
      dets.push_back(d);
    }
    for (double t : thresholds)
      worst = std::max(worst, std::abs(average_precision(dets, gts, t, mode) -
                                       fstest::oracle::brute_force_ap(dets, gts, t, mode)));
  }
  return {worst <= 1e-9, fmt("500 trials x %zu thresholds, max |diff| %.3g", thresholds.size(), worst)};
}

Outcome zbuffer_equivalence() {
  Rng rng(4002);
  const auto objs = fstest::fruit_objects(77, 8, 24);
  int mismatched = 0, overlapping = 0;
  for (int trial = 0; trial < 200; ++trial) {
    SynthConfig cfg;
    cfg.scene_width = static_cast<int>(rng.uniform_int(24, 64));
    cfg.scene_height = static_cast<int>(rng.uniform_int(24, 64));
    cfg.min_instances = 1;
    cfg.max_instances = 4;
    cfg.scale_lo = 0.4;
    cfg.scale_hi = 1.5;
    cfg.allow_rotation = trial % 2 == 1;
    cfg.visibility_floor = 0.0;
    const RgbImage bg = fstest::background_image(rng, cfg.scene_width, cfg.scene_height);
    const auto placements = sample_placements(rng, cfg, objs);
    const auto scene = compose_scene(bg, objs, placements, cfg);

    std::vector<fstest::oracle::Layer> layers;
    for (const auto& p : placements) {
      auto [patch, mask] = render_placement(objs[p.object_index], p);
      layers.push_back({p.x, p.y, std::move(patch), std::move(mask)});
    }
    const auto ref = fstest::oracle::zbuffer(bg, layers);
    bool same = scene.image == ref.image;
    for (const auto& inst : scene.instances)
      for (int y = 0; y < cfg.scene_height; ++y)
        for (int x = 0; x < cfg.scene_width; ++x)
          same = same && inst.visible_mask.get(x, y) ==
                             (ref.owner[static_cast<std::size_t>(y * cfg.scene_width + x)] == inst.z_order);
    mismatched += !same;
    for (std::size_t i = 0; i < scene.instances.size(); ++i)
      for (std::size_t j = i + 1; j < scene.instances.size(); ++j)
        overlapping += scene.instances[i].visible_mask.intersection_count(scene.instances[j].visible_mask) > 0;
  }
  return {mismatched == 0 && overlapping == 0,
          fmt("200 scenes, %d differ from the oracle, %d overlapping visible-mask pairs", mismatched, overlapping)};
}

std::vector<SceneAnnotation> seeded_scenes(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.scene_width = 128;
  cfg.scene_height = 96;
  cfg.min_instances = 2;
  cfg.max_instances = 6;
  cfg.scale_lo = 0.5;
  cfg.scale_hi = 1.2;
  cfg.augment = AugmentConfig::all_on();
  const auto objs = fstest::fruit_objects(seed, 6, 40);
  Rng bg_rng(seed + 1);
  const std::vector<std::pair<std::string, RgbImage>> bgs{{"bg.png", fstest::background_image(bg_rng, 200, 150)}};
  const Rng master(seed);
  std::vector<SceneAnnotation> out;
  for (std::uint64_t i = 0; i < 8; ++i)
    out.push_back(generate_scene(master.child(i), cfg, objs, bgs, "scene_" + std::to_string(i)));
  return out;
}

Outcome round_trips() {
  Rng rng(4003);
  int rle_bad = 0;
  for (int i = 0; i < 300; ++i) {
    BitMask m(static_cast<int>(rng.uniform_int(1, 48)), static_cast<int>(rng.uniform_int(1, 48)));
    const double density = rng.uniform01();
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (rng.bernoulli(density)) m.set(x, y);
    rle_bad += decode_mask_rle(encode_mask_rle(m)) != m;
  }

  double lb_err = 0.0;
  for (int i = 0; i < 300; ++i) {
    const auto t = make_letterbox_transform(static_cast<int>(rng.uniform_int(1, 3000)),
                                            static_cast<int>(rng.uniform_int(1, 3000)), 1280, 720);
    const double x = rng.uniform_real(0, t.source_width), y = rng.uniform_real(0, t.source_height);
    const auto [fx, fy] = t.forward(x, y);
    const auto [ix, iy] = t.inverse(fx, fy);
    lb_err = std::max({lb_err, std::abs(ix - x), std::abs(iy - y)});
  }

  const auto scenes = seeded_scenes(31);
  const auto gt = parse_ground_truth(coco_json(scenes));
  std::size_t k = 0;
  int emit_bad = 0;
  for (const auto& s : scenes)
    for (const auto& inst : s.instances) {
      const bool ok = k < gt.instances.size() && gt.instances[k].mask && *gt.instances[k].mask == inst.visible_mask &&
                      gt.instances[k].bbox == inst.bbox && gt.instances[k].category == inst.category;
      emit_bad += !ok;
      ++k;
    }
  emit_bad += k != gt.instances.size();

  fstest::TempDir a("accept_a"), b("accept_b");
  emit_dataset(seeded_scenes(32), a.path());
  emit_dataset(seeded_scenes(32), b.path());
  int file_diffs = 0, files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = std::filesystem::relative(e.path(), a.path());
    file_diffs += !std::filesystem::exists(b / rel.string()) || read_text_file(e.path()) != read_text_file(b / rel.string());
  }

  return {rle_bad == 0 && lb_err <= 1e-9 && emit_bad == 0 && file_diffs == 0 && files > 0,
          fmt("rle mismatches %d/300, letterbox max err %.3g, emission mismatches %d, same-seed file diffs %d/%d",
              rle_bad, lb_err, emit_bad, file_diffs, files)};
}

Outcome bench() {
  Rng rng(4005);
  std::vector<std::pair<std::string, RgbImage>> images;
  for (int i = 0; i < 100; ++i)
    images.emplace_back("img" + std::to_string(i),
                        fstest::fruit_image(rng, kAllCategories[static_cast<std::size_t>(i) % kAllCategories.size()]));
  const auto r = bench_self_annotation(images, SelfAnnotateConfig{});
  const bool target = r.mean_ms <= 20.0;
  return {r.mean_ms <= 100.0 && r.failures == 0,
          fmt("mean %.4f ms over %zu 64x64 images, ratio %.4g to the %.2f ms reference, 20 ms target %s", r.mean_ms,
              r.samples, r.ratio_to_reference, r.reference_ms, target ? "met" : "missed")};
}

Outcome cloud_suite() {
  const auto t0 = Clock::now();
  Rng rng(4006);
  int db_bad = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Eigen::Vector3d> pts;
    const int n = static_cast<int>(rng.uniform_int(0, 30));
    for (int i = 0; i < n; ++i) pts.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform_real(0, 0.3));
    const double eps = rng.uniform_real(0.05, 0.35);
    const int min_pts = static_cast<int>(rng.uniform_int(1, 6));
    db_bad += dbscan(make_cloud(pts), eps, min_pts) != fstest::oracle::dbscan(pts, eps, min_pts);
  }

  int km_bad = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Eigen::Vector3d> pts;
    for (int i = 0; i < 300; ++i) pts.emplace_back(rng.uniform01(), rng.uniform01(), rng.uniform01());
    Rng r(static_cast<std::uint64_t>(trial));
    const auto res = kmeans_detailed(make_cloud(pts), static_cast<int>(rng.uniform_int(2, 10)), 100, r);
    for (std::size_t i = 1; i < res.objective.size(); ++i) km_bad += res.objective[i] > res.objective[i - 1];
  }

  // Table plane z = 0.5 plus 10 points a centimetre or more above it.
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(rng.uniform_real(-0.3, 0.3), rng.uniform_real(-0.3, 0.3), 0.5);
  for (int i = 0; i < 10; ++i)
    pts.emplace_back(rng.uniform_real(-0.3, 0.3), rng.uniform_real(-0.3, 0.3), 0.5 + rng.uniform_real(0.01, 0.05));
  Rng r(1);
  const auto cloud = make_cloud(pts);
  const auto fit = ransac_plane(cloud, 0.005, 1000, r);
  const auto rest = complement_indices(cloud.size(), fit.inliers);
  bool ransac_ok = rest.size() == 10;
  for (std::size_t i = 0; ransac_ok && i < rest.size(); ++i) ransac_ok = rest[i] == 500 + i;

  const double dt = seconds_since(t0);
  return {db_bad == 0 && km_bad == 0 && ransac_ok && dt < 30.0,
          fmt("dbscan mismatches %d/300, kmeans objective increases %d, ransac kept %zu non-plane points %s, %.2f s",
              db_bad, km_bad, rest.size(), ransac_ok ? "(exact)" : "(wrong)", dt)};
}

Outcome grasp_geometry() {
  GraspConfig cfg;
  cfg.camera_to_world = fstest::overhead_camera(0.3);
  const Eigen::Vector3d view = cfg.camera_to_world.translation();
  std::string detail;
  bool ok = true;

  auto run = [&](const std::vector<Eigen::Vector3d>& world) {
    const auto g = grasp_point(fstest::to_camera(world, cfg.camera_to_world), cfg);
    const auto scan = fstest::oracle::exhaustive_scan(world, cfg.region_radius, cfg.normal_k, view);
    const bool argmax = g.alignment >= scan.max_alignment - 1e-9 &&
                        std::abs(world[g.index].z() - g.point.z()) < 1e-9 &&
                        std::find(scan.region.begin(), scan.region.end(), g.index) != scan.region.end();
    return std::pair{g, argmax};
  };

  const auto [disc, disc_argmax] = run(fstest::flat_disc());
  ok = ok && disc_argmax && std::abs(disc.alignment - 1.0) <= 1e-6;
  detail += fmt("disc alignment %.6f; ", disc.alignment);

  const auto hemi_pts = fstest::hemisphere();
  const auto [hemi, hemi_argmax] = run(hemi_pts);
  double max_z = -1.0;
  for (auto i : fstest::oracle::exhaustive_scan(hemi_pts, cfg.region_radius, cfg.normal_k, view).region)
    max_z = std::max(max_z, hemi_pts[i].z());
  ok = ok && hemi_argmax && std::abs(hemi.point.z() - max_z) < 1e-9 && std::abs(hemi.alignment - 1.0) <= 1e-6;
  detail += fmt("hemisphere z %.4f (region max %.4f) alignment %.6f; ", hemi.point.z(), max_z, hemi.alignment);

  const auto [tilt, tilt_argmax] = run(fstest::tilted_plane());
  ok = ok && tilt_argmax && std::abs(tilt.alignment - std::cos(std::numbers::pi / 4)) <= 0.02;
  detail += fmt("tilt alignment %.4f (cos45 %.4f)", tilt.alignment, std::cos(std::numbers::pi / 4));
  return {ok, detail};
}

Outcome golden_run() {
  const auto t0 = Clock::now();
  fstest::TempDir work("accept_golden");
  const auto run = fstest::run_golden_pipeline(FRUITSYNTH_FIXTURE_DIR, work.path());
  const double dt = seconds_since(t0);
  return {run.ap == 100.0 && run.ar == 100.0 && run.scene_ids.size() == 20 && dt < 60.0,
          fmt("%zu scenes, AP@[0.5:0.95] %.1f, AR %.1f, %.2f s", run.scene_ids.size(), run.ap, run.ar, dt)};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> only, skip;
  CLI::App app{"Acceptance checks"};
  app.add_option("--only", only, "Run only these criterion ids");
  app.add_option("--skip", skip, "Skip these criterion ids");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"1", "F1 arithmetic", f1_rows},
      {"2-gen", "Gen-Hybrid success totals", [] { return success_variant("gen_hybrid", true, true, 98.9, 70.0); }},
      {"2-real-labelling", "Real-only labelling total",
       [] { return success_variant("real_only", true, false, 92.2, 0.0); }},
      {"2-real-grasping", "Real-only grasping total",
       [] { return success_variant("real_only", false, true, 0.0, 51.2); }},
      {"2-cp", "CP-Hybrid success totals", [] { return success_variant("cp_hybrid", true, true, 96.1, 60.0); }},
      {"3", "cost model", cost_model},
      {"4a", "AP oracle equivalence", ap_oracle},
      {"4b", "z-buffer equivalence", zbuffer_equivalence},
      {"4c", "round-trips and same-seed bytes", round_trips},
      {"5", "self-annotation throughput", bench},
      {"6", "point-cloud suite", cloud_suite},
      {"7", "grasp geometry", grasp_geometry},
      {"8", "end-to-end golden run", golden_run},
  };

  const std::set<std::string> only_set(only.begin(), only.end()), skip_set(skip.begin(), skip.end());
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if ((!only_set.empty() && !only_set.count(c.id)) || skip_set.count(c.id)) continue;
    ++ran;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%s] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return ran == 0 || failed > 0 ? 1 : 0;
}
