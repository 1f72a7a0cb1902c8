#include <doctest.h>

#include <json.hpp>

#include "cli.hpp"
#include "fixtures.hpp"
#include "fruitsynth/dataset.hpp"
#include "fruitsynth/png_io.hpp"

using namespace fruitsynth;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) { return fruitsynth::cli::run(args); }

json load(const std::filesystem::path& p) { return json::parse(read_text_file(p)); }

void write_fruit_dir(const std::filesystem::path& dir, Category c, int n, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) write_png_rgb(dir / ("f" + std::to_string(i) + ".png"), fstest::fruit_image(rng, c, 40, 40));
}

void write_backgrounds(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Rng rng(2);
  write_png_rgb(dir / "table.png", fstest::background_image(rng, 200, 150));
}

// Table at 600 mm with two 20x20 px boxes 40 mm proud of it.
void write_depth_scene(const fstest::TempDir& dir) {
  DepthImage d(160, 120, 600);
  for (int v = 30; v < 50; ++v)
    for (int u = 30; u < 50; ++u) d.set(u, v, 560);
  for (int v = 60; v < 80; ++v)
    for (int u = 100; u < 120; ++u) d.set(u, v, 560);
  write_png_depth(dir / "depth.png", d);
  write_text_file(dir / "intr.json", R"({"fx": 200, "fy": 200, "cx": 80, "cy": 60})");
  write_text_file(dir / "extr.json",
                  R"({"rotation": [[1,0,0],[0,-1,0],[0,0,-1]], "translation": [0, 0, 0.6]})");
  write_text_file(dir / "pred.json", R"([
    {"scene_id": "s", "category_id": 1, "bbox": [30, 30, 20, 20], "score": 0.6},
    {"scene_id": "s", "category_id": 4, "bbox": [100, 60, 20, 20], "score": 0.9}])");
}

}  // namespace

TEST_CASE("help exits 0 and usage errors exit 2") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"eval", "--help"}) == 0);
  CHECK(run({}) == 2);
  CHECK(run({"eval", "--gt", "a", "--pred", "b", "--out", "c", "--bogus"}) == 2);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"eval", "--gt", "a", "--pred", "b", "--out", "c", "--mode", "polygon"}) == 2);
  CHECK(run({"make-scenes", "--objects", "x", "--backgrounds", "y", "--n-scenes", "1", "--out", "z", "--jitter",
             "big"}) == 2);
}

TEST_CASE("missing inputs are runtime errors") {
  fstest::TempDir dir("cli_missing");
  CHECK(run({"eval", "--gt", (dir / "none.json").string(), "--pred", (dir / "p.json").string(), "--out",
             (dir / "r.json").string()}) == 1);
  CHECK(run({"annotate-objects", "--in", (dir / "nothing").string(), "--out", (dir / "lib").string(), "--category",
             "apple"}) == 1);
}

TEST_CASE("annotate, compose and evaluate through the CLI") {
  fstest::TempDir dir("cli_pipeline");
  write_fruit_dir(dir / "raw_apple", Category::Apple, 3, 1);
  write_fruit_dir(dir / "raw_plum", Category::Plum, 3, 2);
  // A blank image is skipped with a warning rather than failing the run.
  write_png_rgb(dir / "raw_plum" / "blank.png", RgbImage(40, 40, Rgb{255, 255, 255}));
  write_backgrounds(dir / "bg");

  REQUIRE(run({"annotate-objects", "--in", (dir / "raw_apple").string(), "--out", (dir / "lib_apple").string(),
               "--category", "apple"}) == 0);
  REQUIRE(run({"annotate-objects", "--in", (dir / "raw_plum").string(), "--out", (dir / "lib_plum").string(),
               "--category", "6", "--white-thresh", "235"}) == 0);
  CHECK(load(dir / "lib_plum" / "manifest.json").at("objects").size() == 3);
  CHECK(load(dir / "lib_plum" / "run_config.json").at("white-thresh") == "235");

  const std::vector<std::string> scenes_args{"make-scenes", "--objects", (dir / "lib_apple").string(), "--objects",
                                             (dir / "lib_plum").string(), "--backgrounds", (dir / "bg").string(),
                                             "--n-scenes", "4", "--instances-per-scene", "2..5", "--seed", "9",
                                             "--scene-size", "160x120", "--jitter", "0.5..1.0", "--augment"};
  auto with_out = [&](std::string out, std::string jobs) {
    auto a = scenes_args;
    a.insert(a.end(), {"--out", std::move(out), "--jobs", std::move(jobs)});
    return a;
  };
  REQUIRE(run(with_out((dir / "ds1").string(), "1")) == 0);
  REQUIRE(run(with_out((dir / "ds2").string(), "4")) == 0);
  // Thread count does not change the output.
  CHECK(read_text_file(dir / "ds1" / "annotations.json") == read_text_file(dir / "ds2" / "annotations.json"));
  CHECK(read_png_rgb(dir / "ds1" / "images" / "scene_00003.png") ==
        read_png_rgb(dir / "ds2" / "images" / "scene_00003.png"));
  const auto cfg = load(dir / "ds1" / "run_config.json");
  CHECK(cfg.at("seed") == "9");
  CHECK(cfg.at("augment") == true);
  CHECK(cfg.at("rotation") == false);
  CHECK(cfg.at("visibility-floor") == "0.05");

  const auto gt = load_ground_truth(dir / "ds1" / "annotations.json");
  write_text_file(dir / "pred.json", predictions_json(ground_truth_as_predictions(gt), &gt));
  REQUIRE(run({"eval", "--gt", (dir / "ds1" / "annotations.json").string(), "--pred", (dir / "pred.json").string(),
               "--mode", "mask", "--out", (dir / "eval" / "report.json").string()}) == 0);
  const auto rep = load(dir / "eval" / "report.json");
  CHECK(rep.at("overall").at("AP@[0.5:0.95]") == 100.0);
  CHECK(rep.at("overall").at("AR@[0.5:0.95]") == 100.0);
  CHECK(std::filesystem::exists(dir / "eval" / "report_pr_iou50.csv"));
  CHECK(std::filesystem::exists(dir / "eval" / "report_pr_iou75.csv"));
}

TEST_CASE("config files supply defaults that explicit flags override") {
  fstest::TempDir dir("cli_config");
  write_text_file(dir / "cfg.json", R"({"report": {}, "n-scenes": 50, "categories": ["apple", "plum"]})");
  REQUIRE(run({"report", "cost", "--config", (dir / "cfg.json").string(), "--out", (dir / "a.json").string()}) == 0);
  CHECK(load(dir / "a.json").at("n_scenes") == 50);
  REQUIRE(run({"report", "cost", "--config", (dir / "cfg.json").string(), "--n-scenes", "7", "--out",
               (dir / "b.json").string()}) == 0);
  const auto b = load(dir / "b.json");
  CHECK(b.at("n_scenes") == 7);
  CHECK(b.at("fixed_s").get<double>() == doctest::Approx(1404.35 + 68.30 + 1433.73 + 67.92));

  write_text_file(dir / "cfg.ini", "# comment\nn-scenes = 3\n");
  REQUIRE(run({"report", "cost", "--config", (dir / "cfg.ini").string(), "--out", (dir / "c.json").string()}) == 0);
  CHECK(load(dir / "c.json").at("n_scenes") == 3);

  write_text_file(dir / "bad.ini", "no-such-key = 1\n");
  CHECK(run({"report", "cost", "--n-scenes", "1", "--config", (dir / "bad.ini").string()}) == 2);
}

TEST_CASE("report subcommands") {
  fstest::TempDir dir("cli_report");
  REQUIRE(run({"report", "success", "--variant", "gen_hybrid", "--out", (dir / "s.json").string(), "--csv",
               (dir / "s.csv").string()}) == 0);
  const auto s = load(dir / "s.json");
  CHECK(s.at("total").at("labelling") == 98.9);
  CHECK(s.at("total").at("grasping") == 70.0);
  CHECK(read_text_file(dir / "s.csv").find("total,98.9,70") != std::string::npos);
  CHECK(run({"report", "success", "--variant", "nonsense"}) == 2);
  CHECK(run({"report"}) == 2);
}

TEST_CASE("cloud segmentation and grasp through the CLI") {
  fstest::TempDir dir("cli_cloud");
  write_depth_scene(dir);
  REQUIRE(run({"cloud-seg", "--depth", (dir / "depth.png").string(), "--intrinsics", (dir / "intr.json").string(),
               "--method", "dbscan", "--eps", "0.01", "--min-pts", "5", "--out", (dir / "db.json").string(), "--xyz",
               (dir / "db.xyz").string()}) == 0);
  const auto db = load(dir / "db.json");
  CHECK(db.at("n_clusters") == 2);
  CHECK(db.at("clusters")[0].at("size") == 400);

  REQUIRE(run({"cloud-seg", "--depth", (dir / "depth.png").string(), "--intrinsics", (dir / "intr.json").string(),
               "--method", "kmeans", "--k", "2", "--out", (dir / "km.json").string()}) == 0);
  CHECK(load(dir / "km.json").at("n_clusters") == 2);

  REQUIRE(run({"cloud-seg", "--depth", (dir / "depth.png").string(), "--intrinsics", (dir / "intr.json").string(),
               "--method", "masks", "--pred", (dir / "pred.json").string(), "--out", (dir / "m.json").string()}) == 0);
  const auto m = load(dir / "m.json");
  CHECK(m.at("n_clusters") == 2);
  CHECK(m.at("clusters")[0].at("score") == 0.9);
  CHECK(run({"cloud-seg", "--depth", (dir / "depth.png").string(), "--intrinsics", (dir / "intr.json").string(),
             "--method", "masks", "--out", (dir / "m.json").string()}) == 2);

  REQUIRE(run({"grasp-point", "--depth", (dir / "depth.png").string(), "--pred", (dir / "pred.json").string(),
               "--intrinsics", (dir / "intr.json").string(), "--extrinsics", (dir / "extr.json").string(), "--out",
               (dir / "g.json").string()}) == 0);
  const auto g = load(dir / "g.json");
  CHECK(g.at("target").at("category") == "orange");
  CHECK(g.at("alignment").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g.at("point")[2].get<double>() == doctest::Approx(0.04).epsilon(1e-9));

  // Same answer from the XYZ cloud written earlier.
  REQUIRE(run({"grasp-point", "--cloud", (dir / "db.xyz").string(), "--pred", (dir / "pred.json").string(),
               "--intrinsics", (dir / "intr.json").string(), "--extrinsics", (dir / "extr.json").string(), "--out",
               (dir / "g2.json").string()}) == 0);
  const auto g2 = load(dir / "g2.json");
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(g2.at("point")[i].get<double>() - g.at("point")[i].get<double>()) < 1e-5);
}
