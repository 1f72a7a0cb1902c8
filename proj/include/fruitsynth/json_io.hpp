#pragma once

#include <string>

#include <Eigen/Geometry>

#include "fruitsynth/cloud.hpp"
#include "fruitsynth/grasp.hpp"
#include "fruitsynth/metrics.hpp"
#include "fruitsynth/report.hpp"

namespace fruitsynth {

// Report writers. Percentages are rounded half-up to one decimal.
std::string metrics_report_json(const MetricsReport& report, const std::vector<PrCurve>& curves = {});
std::string pr_curve_json(const PrCurve& curve);
std::string success_rates_json(const SuccessRates& rates);
std::string bench_report_json(const BenchReport& report);
std::string cloud_seg_scores_json(const CloudSegScores& scores);

// Input readers; all throw ParseError with the offending key named.

/// {"fx":..,"fy":..,"cx":..,"cy":..}
CameraIntrinsics parse_intrinsics(const std::string& json_text);

/// {"rotation": [[3x3]], "translation": [x,y,z]} or {"matrix": [[4x4]]}; camera to world.
Eigen::Isometry3d parse_extrinsics(const std::string& json_text);

/// {"gan": {"apple": {"train_s":..,"sample_s":..}, ...}, "self_annot_ms":..,
///  "compose_ms":.., "instances_per_scene":..}; missing scalars keep defaults.
CostModelParams parse_cost_params(const std::string& json_text);

/// {"labelling": {"apple": [successes, attempts], ...}, "grasping": {...}}
TrialTally parse_tally(const std::string& json_text);

}  // namespace fruitsynth
