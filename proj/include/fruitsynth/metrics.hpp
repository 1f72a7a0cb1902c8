#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fruitsynth/category.hpp"
#include "fruitsynth/image.hpp"

namespace fruitsynth {

enum class IouMode { Box, Mask };

std::string_view iou_mode_name(IouMode mode) noexcept;
IouMode parse_iou_mode(std::string_view text);

struct Detection {
  std::string scene_id;
  Category category = Category::Apple;
  double confidence = 0.0;
  Bbox bbox;
  std::optional<BitMask> mask;
};

struct GroundTruth {
  std::string scene_id;
  Category category = Category::Apple;
  Bbox bbox;
  std::optional<BitMask> mask;
};

/// Pixel-count IoU of two boxes; 0 when disjoint.
double iou_box(const Bbox& a, const Bbox& b);
/// popcount(a & b) / popcount(a | b); 0 when both are empty.
double iou_mask(const BitMask& a, const BitMask& b);

double iou(const Detection& det, const GroundTruth& gt, IouMode mode);

/// det_to_gt[i] is the matched ground-truth index or -1 (false positive);
/// gt_to_det[j] is the matching detection or -1 (false negative).
struct MatchResult {
  std::vector<int> det_to_gt;
  std::vector<int> gt_to_det;

  std::size_t true_positives() const;
  std::size_t false_positives() const { return det_to_gt.size() - true_positives(); }
  std::size_t false_negatives() const { return gt_to_det.size() - true_positives(); }
};

/// Greedy matching on a precomputed IoU table (iou[d][g]). Detections are
/// visited by descending confidence, ties by lower index; each takes the
/// still-unmatched ground truth with the highest IoU >= threshold (ties by
/// lower index).
MatchResult greedy_match(std::span<const double> confidences, const std::vector<std::vector<double>>& iou,
                         double iou_threshold);

/// Greedy matching of detections to ground truths of one scene/category stratum.
MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                             IouMode mode);

/// A detection after matching, as seen by the precision/recall accumulation.
struct ScoredHit {
  double confidence = 0.0;
  bool true_positive = false;
};

/// 101-point interpolated AP in percent from hits already sorted by
/// descending confidence. Returns 0 when n_gt is zero.
double interpolated_ap(std::span<const ScoredHit> ranked, std::size_t n_gt);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per ranked detection; (0, p0) is implied
  double iou_threshold = 0.5;
  IouMode mode = IouMode::Box;
};

/// Cumulative precision/recall with the monotone precision envelope applied.
std::vector<PrPoint> precision_envelope(std::span<const ScoredHit> ranked, std::size_t n_gt);

/// The ten COCO thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> sweep_thresholds();

/// Per-category (or class-agnostic) ranked hits and GT counts at one threshold.
struct StratumHits {
  std::vector<ScoredHit> ranked;
  std::size_t n_gt = 0;
  std::size_t matched_gt = 0;
};

/// Matches every scene independently and pools hits per category. With
/// class_agnostic set every instance falls into a single stratum keyed by
/// Category::Apple.
std::map<Category, StratumHits> accumulate_hits(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                                                double iou_threshold, IouMode mode, bool class_agnostic = false);

/// Category-averaged AP in percent over categories present in the ground
/// truth. Throws NoGroundTruth when there is no ground truth at all.
double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                         IouMode mode, bool class_agnostic = false);

/// Category-averaged recall (matched / total GT) in percent, no detection cap.
double average_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                      IouMode mode, bool class_agnostic = false);

double average_precision_sweep(std::span<const Detection> dets, std::span<const GroundTruth> gts, IouMode mode,
                               bool class_agnostic = false);
double average_recall_sweep(std::span<const Detection> dets, std::span<const GroundTruth> gts, IouMode mode,
                            bool class_agnostic = false);

/// Harmonic mean of two percentages. Both zero yields 0.
double f1(double precision_pct, double recall_pct);

/// Decimal rounding with ties away from zero (for non-negative values: half-up).
double round_half_up(double value, int decimals);

/// Class-agnostic when `category` is empty.
PrCurve pr_curve(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold,
                 IouMode mode, std::optional<Category> category = std::nullopt);

std::string pr_curve_csv(const PrCurve& curve);

struct MetricSet {
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ap = 0.0;  // mean over 0.50:0.95
  double ar50 = 0.0;
  double ar75 = 0.0;
  double ar = 0.0;
  double f1 = 0.0;  // f1(ap, ar)
};

struct MetricsReport {
  IouMode mode = IouMode::Box;
  std::map<Category, MetricSet> per_category;
  MetricSet overall;         // mean over categories present in GT
  MetricSet class_agnostic;  // all categories pooled as one
  std::vector<Category> skipped_categories;  // detections but no ground truth
  std::size_t n_detections = 0;
  std::size_t n_ground_truth = 0;
};

MetricsReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts, IouMode mode);

}  // namespace fruitsynth
