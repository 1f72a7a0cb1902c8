#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "fruitsynth/errors.hpp"
#include "fruitsynth/json_io.hpp"
#include "fruitsynth/png_io.hpp"
#include "fruitsynth/report.hpp"

using namespace fruitsynth;

TEST_CASE("fixed cost for apple is the sum of its two timings") {
  const auto p = table1_cost_params();
  CHECK(estimate_prep_time(0, p, {Category::Apple}) == doctest::Approx(1472.65).epsilon(1e-15));
}

TEST_CASE("fixed cost for all categories is the sum of the twelve timings") {
  const double cents = 140435 + 6830 + 139520 + 7068 + 141118 + 5891 + 139756 + 6729 + 138997 + 6852 + 143373 + 6792;
  const auto p = table1_cost_params();
  const std::set<Category> all(kAllCategories.begin(), kAllCategories.end());
  CHECK(estimate_prep_time(0, p, all) == doctest::Approx(cents / 100.0).epsilon(1e-14));
}

TEST_CASE("prep time is affine in the scene count") {
  const auto p = table1_cost_params();
  const std::set<Category> cats{Category::Banana, Category::Plum};
  const double t0 = estimate_prep_time(0, p, cats);
  const double slope = 10 * 19.64 / 1000.0;
  for (std::size_t n : {1U, 17U, 1000U, 123456U}) {
    CHECK(estimate_prep_time(n, p, cats) == doctest::Approx(t0 + n * slope).epsilon(1e-12));
  }
  CHECK(prep_time_slope(p) == doctest::Approx(slope));
}

TEST_CASE("zero parameters cost nothing") {
  CostModelParams zero;
  zero.self_annot_ms = 0;
  zero.gan[Category::Apple] = GanTiming{};
  for (std::size_t n : {0U, 5U, 100000U}) CHECK(estimate_prep_time(n, zero, {Category::Apple}) == 0.0);
  CHECK_THROWS_AS(estimate_prep_time(1, zero, {Category::Plum}), Error);
}

TEST_CASE("success rates match an exact rational oracle") {
  for (long long a = 1; a <= 200; ++a)
    for (long long s = 0; s <= a; ++s)
      REQUIRE(rate_percent_1dp(s, a) == static_cast<double>(fstest::oracle::rate_tenths(s, a)) / 10.0);
  CHECK(rate_percent_1dp(0, 30) == 0.0);
  CHECK_THROWS_AS(rate_percent_1dp(1, 0), Error);
}

TEST_CASE("gen-hybrid totals") {
  const auto r = success_rates(table4_tallies().at("gen_hybrid"));
  CHECK(r.labelling_total == doctest::Approx(98.9));
  CHECK(r.grasping_total == doctest::Approx(70.0));
  CHECK(r.labelling.at(Category::Apple) == doctest::Approx(96.7));
  CHECK(r.grasping.at(Category::Strawberry) == doctest::Approx(56.7));
}

TEST_CASE("tally validation") {
  TrialTally bad;
  bad.labelling[Category::Apple] = Tally{5, 3};
  bad.grasping[Category::Apple] = Tally{1, 3};
  CHECK_THROWS_AS(success_rates(bad), Error);
  TrialTally empty;
  CHECK_THROWS_AS(success_rates(empty), Error);
}

TEST_CASE("tally and cost params parse from JSON") {
  const auto t = parse_tally(R"({"labelling": {"apple": [29, 30]}, "grasping": {"apple": [24, 30]}})");
  CHECK(t.labelling.at(Category::Apple).successes == 29);
  CHECK(t.grasping.at(Category::Apple).attempts == 30);
  const auto p = parse_cost_params(R"({"gan": {"plum": {"train_s": 1.5, "sample_s": 0.5}}, "self_annot_ms": 10})");
  CHECK(estimate_prep_time(100, p, {Category::Plum}) == doctest::Approx(2.0 + 100 * 0.1));
  CHECK_THROWS_AS(parse_cost_params(R"({"bogus": 1})"), Error);
}

TEST_CASE("benchmark over 100 synthetic images") {
  fstest::TempDir dir("bench");
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%03d.png", i);
    write_png_rgb(dir / name, fstest::fruit_image(rng, kAllCategories[static_cast<std::size_t>(i) % 6]));
  }
  const auto a = bench_self_annotation(dir.path(), SelfAnnotateConfig{});
  CHECK(a.samples == 100);
  CHECK(a.failures == 0);
  CHECK(a.mean_ms > 0.0);
  CHECK(a.min_ms <= a.p50_ms);
  CHECK(a.p50_ms <= a.p90_ms);
  CHECK(a.p99_ms <= a.max_ms);
  CHECK(a.reference_ms == 19.64);
  CHECK(a.ratio_to_reference == doctest::Approx(a.mean_ms / 19.64));
  const auto b = bench_self_annotation(dir.path(), SelfAnnotateConfig{});
  CHECK(a.mask_popcounts == b.mask_popcounts);

  CHECK_THROWS_AS(bench_self_annotation(dir.path(), SelfAnnotateConfig{}, 101), Error);
  CHECK_THROWS_AS(bench_self_annotation(dir / "nope", SelfAnnotateConfig{}), Error);
}
