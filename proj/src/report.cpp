#include "fruitsynth/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fruitsynth/errors.hpp"
#include "fruitsynth/png_io.hpp"

namespace fruitsynth {

void CostModelParams::validate() const {
  for (const auto& [cat, t] : gan)
    if (t.train_s < 0.0 || t.sample_s < 0.0)
      throw Error(Errc::InvalidArgument, "cost model: negative GAN time for " + std::string(category_name(cat)));
  if (self_annot_ms < 0.0 || compose_ms < 0.0 || instances_per_scene < 0)
    throw Error(Errc::InvalidArgument, "cost model: parameters must be non-negative");
}

CostModelParams table1_cost_params() {
  CostModelParams p;
  p.gan = {
      {Category::Apple, {1404.35, 68.30}},  {Category::Banana, {1395.20, 70.68}},
      {Category::Strawberry, {1411.18, 58.91}}, {Category::Orange, {1397.56, 67.29}},
      {Category::Peach, {1389.97, 68.52}},  {Category::Plum, {1433.73, 67.92}},
  };
  return p;
}

double prep_time_slope(const CostModelParams& params) {
  return (params.instances_per_scene * params.self_annot_ms + params.compose_ms) / 1000.0;
}

double estimate_prep_time(std::size_t n_scenes, const CostModelParams& params, const std::set<Category>& categories) {
  params.validate();
  double fixed = 0.0;
  for (Category c : categories) {
    const auto it = params.gan.find(c);
    if (it == params.gan.end())
      throw Error(Errc::InvalidArgument, "cost model has no GAN timing for " + std::string(category_name(c)));
    fixed += it->second.train_s + it->second.sample_s;
  }
  return fixed + static_cast<double>(n_scenes) * prep_time_slope(params);
}

void TrialTally::validate() const {
  for (const auto* column : {&labelling, &grasping})
    for (const auto& [cat, t] : *column)
      if (t.attempts < 0 || t.successes < 0 || t.successes > t.attempts)
        throw Error(Errc::InvalidArgument, "tally for " + std::string(category_name(cat)) +
                                               " must satisfy 0 <= successes <= attempts");
}

std::map<std::string, TrialTally> table4_tallies() {
  using C = Category;
  auto column = [](std::initializer_list<int> s) {
    std::map<Category, Tally> m;
    auto it = s.begin();
    for (C c : kAllCategories) m[c] = Tally{*it++, 30};
    return m;
  };
  return {
      {"real_only", {column({27, 27, 30, 26, 27, 29}), column({17, 17, 12, 15, 15, 17})}},
      {"cp_hybrid", {column({28, 29, 30, 28, 28, 30}), column({20, 18, 15, 18, 18, 19})}},
      {"gen_hybrid", {column({29, 30, 30, 30, 29, 30}), column({24, 21, 17, 22, 20, 22})}},
  };
}

double rate_percent_1dp(long long successes, long long attempts) {
  if (attempts <= 0) throw Error(Errc::ZeroAttempts, "success rate with zero attempts");
  // tenths of a percent = round(1000 * s / a), half-up in integers
  const long long tenths = (2000 * successes + attempts) / (2 * attempts);
  return static_cast<double>(tenths) / 10.0;
}

SuccessRates success_rates(const TrialTally& tally) {
  tally.validate();
  SuccessRates out;
  auto fill = [](const std::map<Category, Tally>& column, std::map<Category, double>& rates, const char* name) {
    long long s = 0, a = 0;
    for (const auto& [cat, t] : column) {
      s += t.successes;
      a += t.attempts;
      if (t.attempts > 0) rates[cat] = rate_percent_1dp(t.successes, t.attempts);
    }
    if (a == 0) throw Error(Errc::ZeroAttempts, std::string(name) + " column has no attempts");
    return rate_percent_1dp(s, a);
  };
  out.labelling_total = fill(tally.labelling, out.labelling, "labelling");
  out.grasping_total = fill(tally.grasping, out.grasping, "grasping");
  return out;
}

BenchReport bench_self_annotation(const std::vector<std::pair<std::string, RgbImage>>& images,
                                  const SelfAnnotateConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  BenchReport r;
  for (const auto& [name, image] : images) {
    std::size_t pop = 0;
    const auto t0 = Clock::now();
    try {
      const auto obj = self_annotate(image, cfg, Category::Apple, name);
      pop = obj.mask.popcount();
    } catch (const Error& e) {
      if (e.code() != Errc::EmptyMask) throw;
      ++r.failures;
    }
    const auto t1 = Clock::now();
    r.latencies_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    r.mask_popcounts.push_back(pop);
  }
  r.samples = r.latencies_ms.size();
  if (r.samples == 0) return r;

  std::vector<double> sorted = r.latencies_ms;
  std::sort(sorted.begin(), sorted.end());
  auto pct = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) ;
    return sorted[std::min(sorted.size() - 1, idx == 0 ? 0 : idx - 1)];
  };
  double sum = 0.0;
  for (double v : sorted) sum += v;
  r.mean_ms = sum / static_cast<double>(sorted.size());
  r.min_ms = sorted.front();
  r.max_ms = sorted.back();
  r.p50_ms = pct(0.50);
  r.p90_ms = pct(0.90);
  r.p99_ms = pct(0.99);
  r.ratio_to_reference = r.mean_ms / r.reference_ms;
  return r;
}

BenchReport bench_self_annotation(const std::filesystem::path& dir, const SelfAnnotateConfig& cfg,
                                  std::size_t min_images) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::IoError, "'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.size() < min_images)
    throw Error(Errc::InvalidArgument, "benchmark needs at least " + std::to_string(min_images) + " PNG images in '" +
                                           dir.string() + "', found " + std::to_string(files.size()));
  std::vector<std::pair<std::string, RgbImage>> images;
  images.reserve(files.size());
  for (const auto& f : files) images.emplace_back(f.filename().string(), read_png_rgb(f));
  return bench_self_annotation(images, cfg);
}

}  // namespace fruitsynth
