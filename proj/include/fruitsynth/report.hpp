#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fruitsynth/category.hpp"
#include "fruitsynth/image.hpp"
#include "fruitsynth/objprep.hpp"

namespace fruitsynth {

/// Reference mean self-annotation latency per instance, in milliseconds.
inline constexpr double kReferenceSelfAnnotationMs = 19.64;

struct GanTiming {
  double train_s = 0.0;
  double sample_s = 0.0;
};

struct CostModelParams {
  std::map<Category, GanTiming> gan;
  double self_annot_ms = kReferenceSelfAnnotationMs;  // per instance
  double compose_ms = 0.0;                            // per scene
  int instances_per_scene = 10;

  void validate() const;
};

/// GAN training and 10k-image sampling times per category, plus the
/// reference self-annotation latency; compose_ms is left at zero.
CostModelParams table1_cost_params();

/// Fixed GAN cost for the chosen categories plus a per-scene cost that is
/// linear in n_scenes. Seconds.
double estimate_prep_time(std::size_t n_scenes, const CostModelParams& params, const std::set<Category>& categories);

/// Seconds added by each extra scene.
double prep_time_slope(const CostModelParams& params);

struct Tally {
  int successes = 0;
  int attempts = 0;
};

struct TrialTally {
  std::map<Category, Tally> labelling;
  std::map<Category, Tally> grasping;

  void validate() const;
};

/// Pick-and-place tallies per training-set variant ("real_only", "cp_hybrid", "gen_hybrid").
std::map<std::string, TrialTally> table4_tallies();

struct SuccessRates {
  std::map<Category, double> labelling;  // percent, one decimal
  std::map<Category, double> grasping;
  double labelling_total = 0.0;
  double grasping_total = 0.0;
};

/// successes / attempts * 100 rounded half-up to one decimal; totals pool all
/// categories. Throws ZeroAttempts when a column has no attempts at all.
SuccessRates success_rates(const TrialTally& tally);

/// Percentage with exact integer half-up rounding to one decimal.
double rate_percent_1dp(long long successes, long long attempts);

struct BenchReport {
  std::size_t samples = 0;
  std::size_t failures = 0;  // images whose mask came out empty
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  double reference_ms = kReferenceSelfAnnotationMs;
  double ratio_to_reference = 0.0;
  std::vector<double> latencies_ms;
  std::vector<std::size_t> mask_popcounts;  // 0 for failures
};

/// Times extract_mask + clean_mask + make_cutout per image with a monotonic
/// clock, one image at a time. Decoding is not timed.
BenchReport bench_self_annotation(const std::vector<std::pair<std::string, RgbImage>>& images,
                                  const SelfAnnotateConfig& cfg);

/// Directory variant; requires at least `min_images` PNG files.
BenchReport bench_self_annotation(const std::filesystem::path& dir, const SelfAnnotateConfig& cfg,
                                  std::size_t min_images = 100);

}  // namespace fruitsynth
