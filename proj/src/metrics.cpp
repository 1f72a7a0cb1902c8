#include "fruitsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

std::string_view iou_mode_name(IouMode mode) noexcept { return mode == IouMode::Box ? "box" : "mask"; }

IouMode parse_iou_mode(std::string_view text) {
  if (text == "box" || text == "bbox") return IouMode::Box;
  if (text == "mask" || text == "segm") return IouMode::Mask;
  throw Error(Errc::InvalidArgument, "unknown IoU mode '" + std::string(text) + "'");
}

double iou_box(const Bbox& a, const Bbox& b) {
  const long long ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou_mask(const BitMask& a, const BitMask& b) {
  const std::size_t uni = a.union_count(b);
  if (uni == 0) return 0.0;
  return static_cast<double>(a.intersection_count(b)) / static_cast<double>(uni);
}

double iou(const Detection& det, const GroundTruth& gt, IouMode mode) {
  if (mode == IouMode::Box) return iou_box(det.bbox, gt.bbox);
  if (!det.mask || !gt.mask)
    throw Error(Errc::MissingMask, "mask IoU requested but scene '" + det.scene_id + "' has an instance without a mask");
  return iou_mask(*det.mask, *gt.mask);
}

std::size_t MatchResult::true_positives() const {
  return static_cast<std::size_t>(std::count_if(det_to_gt.begin(), det_to_gt.end(), [](int g) { return g >= 0; }));
}

MatchResult greedy_match(std::span<const double> confidences, const std::vector<std::vector<double>>& iou_table,
                         double iou_threshold) {
  const std::size_t n_det = confidences.size();
  const std::size_t n_gt = n_det == 0 ? 0 : iou_table.front().size();
  MatchResult result{std::vector<int>(n_det, -1), {}};
  std::vector<std::size_t> order(n_det);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] > confidences[b]; });
  std::vector<int> gt_to_det(n_gt, -1);
  for (std::size_t d : order) {
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t g = 0; g < n_gt; ++g) {
      if (gt_to_det[g] >= 0) continue;
      const double v = iou_table[d][g];
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      result.det_to_gt[d] = best;
      gt_to_det[static_cast<std::size_t>(best)] = static_cast<int>(d);
    }
  }
  result.gt_to_det = std::move(gt_to_det);
  return result;
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                             IouMode mode) {
  if (dets.empty()) return MatchResult{{}, std::vector<int>(gts.size(), -1)};
  std::vector<double> conf(dets.size());
  std::vector<std::vector<double>> table(dets.size(), std::vector<double>(gts.size(), 0.0));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    conf[d] = dets[d].confidence;
    for (std::size_t g = 0; g < gts.size(); ++g) table[d][g] = iou(dets[d], gts[g], mode);
  }
  return greedy_match(conf, table, iou_threshold);
}

double interpolated_ap(std::span<const ScoredHit> ranked, std::size_t n_gt) {
  if (n_gt == 0 || ranked.empty()) return 0.0;
  const auto curve = precision_envelope(ranked, n_gt);
  std::vector<std::size_t> tp_cum(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].true_positive) ++tp;
    tp_cum[k] = tp;
  }
  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i <= 100; ++i) {
    // First rank whose recall reaches i/100, compared in integers.
    while (k < ranked.size() && 100 * tp_cum[k] < i * n_gt) ++k;
    if (k == ranked.size()) break;
    sum += curve[k].precision;
  }
  return sum / 101.0 * 100.0;
}

std::vector<PrPoint> precision_envelope(std::span<const ScoredHit> ranked, std::size_t n_gt) {
  std::vector<PrPoint> pts(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].true_positive) ++tp;
    pts[k].recall = n_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_gt);
    pts[k].precision = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  for (std::size_t k = pts.size(); k-- > 1;) pts[k - 1].precision = std::max(pts[k - 1].precision, pts[k].precision);
  return pts;
}

std::vector<double> sweep_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

std::map<Category, StratumHits> accumulate_hits(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                                double iou_threshold, IouMode mode, bool class_agnostic) {
  auto key_of = [&](const std::string& scene, Category c) {
    return std::make_pair(scene, class_agnostic ? Category::Apple : c);
  };
  std::map<std::pair<std::string, Category>, std::vector<std::size_t>> det_groups, gt_groups;
  for (std::size_t i = 0; i < dets.size(); ++i) det_groups[key_of(dets[i].scene_id, dets[i].category)].push_back(i);
  for (std::size_t j = 0; j < gts.size(); ++j) gt_groups[key_of(gts[j].scene_id, gts[j].category)].push_back(j);

  std::map<Category, StratumHits> out;
  std::vector<char> is_tp(dets.size(), 0);
  for (const auto& [key, gidx] : gt_groups) {
    auto& stratum = out[key.second];
    stratum.n_gt += gidx.size();
    auto it = det_groups.find(key);
    if (it == det_groups.end()) continue;
    std::vector<Detection> local_dets;
    std::vector<GroundTruth> local_gts;
    for (auto i : it->second) local_dets.push_back(dets[i]);
    for (auto j : gidx) local_gts.push_back(gts[j]);
    const auto m = match_detections(local_dets, local_gts, iou_threshold, mode);
    for (std::size_t d = 0; d < m.det_to_gt.size(); ++d)
      if (m.det_to_gt[d] >= 0) is_tp[it->second[d]] = 1;
    stratum.matched_gt += m.true_positives();
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  for (std::size_t i : order) {
    const Category c = class_agnostic ? Category::Apple : dets[i].category;
    out[c].ranked.push_back(ScoredHit{dets[i].confidence, is_tp[i] != 0});
  }
  return out;
}

namespace {

template <typename PerStratum>
double category_mean(const std::map<Category, StratumHits>& strata, PerStratum fn) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [cat, s] : strata) {
    if (s.n_gt == 0) continue;
    sum += fn(s);
    ++n;
  }
  if (n == 0) throw Error(Errc::NoGroundTruth, "no ground-truth instances to evaluate against");
  return sum / static_cast<double>(n);
}

double ap_of(const std::map<Category, StratumHits>& strata) {
  return category_mean(strata, [](const StratumHits& s) { return interpolated_ap(s.ranked, s.n_gt); });
}

double ar_of(const std::map<Category, StratumHits>& strata) {
  return category_mean(strata, [](const StratumHits& s) {
    return 100.0 * static_cast<double>(s.matched_gt) / static_cast<double>(s.n_gt);
  });
}

}  // namespace

double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                         IouMode mode, bool class_agnostic) {
  return ap_of(accumulate_hits(dets, gts, iou_threshold, mode, class_agnostic));
}

double average_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                      IouMode mode, bool class_agnostic) {
  return ar_of(accumulate_hits(dets, gts, iou_threshold, mode, class_agnostic));
}

double average_precision_sweep(std::span<const Detection> dets, std::span<const GroundTruth> gts, IouMode mode,
                               bool class_agnostic) {
  double sum = 0.0;
  for (double t : sweep_thresholds()) sum += average_precision(dets, gts, t, mode, class_agnostic);
  return sum / 10.0;
}

double average_recall_sweep(std::span<const Detection> dets, std::span<const GroundTruth> gts, IouMode mode,
                            bool class_agnostic) {
  double sum = 0.0;
  for (double t : sweep_thresholds()) sum += average_recall(dets, gts, t, mode, class_agnostic);
  return sum / 10.0;
}

double f1(double precision_pct, double recall_pct) {
  if (precision_pct < 0.0 || precision_pct > 100.0 || recall_pct < 0.0 || recall_pct > 100.0)
    throw Error(Errc::InvalidArgument, "f1: inputs must be percentages in [0,100]");
  if (precision_pct + recall_pct == 0.0) return 0.0;
  return 2.0 * precision_pct * recall_pct / (precision_pct + recall_pct);
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The 1e-9 nudge absorbs binary representation error of decimal inputs such as 70.15.
  const double r = std::floor(std::abs(value) * scale + 0.5 + 1e-9) / scale;
  return std::copysign(r, value);
}

PrCurve pr_curve(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                 IouMode mode, std::optional<Category> category) {
  PrCurve curve{{}, iou_threshold, mode};
  if (dets.empty()) return curve;
  std::vector<Detection> d;
  std::vector<GroundTruth> g;
  for (const auto& x : dets)
    if (!category || x.category == *category) d.push_back(x);
  for (const auto& x : gts)
    if (!category || x.category == *category) g.push_back(x);
  if (d.empty()) return curve;
  const auto strata = accumulate_hits(d, g, iou_threshold, mode, !category.has_value());
  const auto it = strata.find(category.value_or(Category::Apple));
  if (it == strata.end()) return curve;
  curve.points = precision_envelope(it->second.ranked, it->second.n_gt);
  return curve;
}

std::string pr_curve_csv(const PrCurve& curve) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << "recall,precision\n";
  for (const auto& p : curve.points) os << p.recall << ',' << p.precision << '\n';
  return os.str();
}

MetricsReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts, IouMode mode) {
  MetricsReport report;
  report.mode = mode;
  report.n_detections = dets.size();
  report.n_ground_truth = gts.size();
  if (gts.empty()) throw Error(Errc::NoGroundTruth, "ground truth is empty");

  const auto thresholds = sweep_thresholds();
  std::vector<std::map<Category, StratumHits>> per_t, per_t_agnostic;
  for (double t : thresholds) {
    per_t.push_back(accumulate_hits(dets, gts, t, mode, false));
    per_t_agnostic.push_back(accumulate_hits(dets, gts, t, mode, true));
  }

  auto summarize = [&](const std::vector<std::map<Category, StratumHits>>& strata_by_t) {
    MetricSet m;
    double ap_sum = 0.0, ar_sum = 0.0;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      const double ap = ap_of(strata_by_t[i]);
      const double ar = ar_of(strata_by_t[i]);
      ap_sum += ap;
      ar_sum += ar;
      if (i == 0) {
        m.ap50 = ap;
        m.ar50 = ar;
      }
      if (i == 5) {
        m.ap75 = ap;
        m.ar75 = ar;
      }
    }
    m.ap = ap_sum / 10.0;
    m.ar = ar_sum / 10.0;
    m.f1 = f1(m.ap, m.ar);
    return m;
  };

  report.overall = summarize(per_t);
  report.class_agnostic = summarize(per_t_agnostic);
  for (const auto& [cat, s] : per_t.front()) {
    if (s.n_gt == 0) {
      report.skipped_categories.push_back(cat);
      continue;
    }
    std::vector<std::map<Category, StratumHits>> single;
    for (const auto& strata : per_t) single.push_back({{cat, strata.at(cat)}});
    report.per_category[cat] = summarize(single);
  }
  return report;
}

}  // namespace fruitsynth
