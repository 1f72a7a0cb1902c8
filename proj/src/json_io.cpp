#include "fruitsynth/json_io.hpp"

#include <json.hpp>

#include "fruitsynth/errors.hpp"

namespace fruitsynth {

using ordered_json = nlohmann::ordered_json;

namespace {

double pct(double v) { return round_half_up(v, 1); }

ordered_json metric_set_json(const MetricSet& m) {
  return ordered_json{{"AP@0.5", pct(m.ap50)},  {"AP@0.75", pct(m.ap75)}, {"AP@[0.5:0.95]", pct(m.ap)},
                      {"AR@0.5", pct(m.ar50)},  {"AR@0.75", pct(m.ar75)}, {"AR@[0.5:0.95]", pct(m.ar)},
                      {"F1@[0.5:0.95]", pct(m.f1)}};
}

ordered_json curve_json(const PrCurve& c) {
  ordered_json pts = ordered_json::array();
  for (const auto& p : c.points) pts.push_back({p.recall, p.precision});
  return ordered_json{{"iou_threshold", c.iou_threshold}, {"mode", iou_mode_name(c.mode)}, {"points", pts}};
}

nlohmann::json parse(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string(what) + ": " + e.what());
  }
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string metrics_report_json(const MetricsReport& report, const std::vector<PrCurve>& curves) {
  ordered_json doc;
  doc["mode"] = iou_mode_name(report.mode);
  doc["n_detections"] = report.n_detections;
  doc["n_ground_truth"] = report.n_ground_truth;
  doc["overall"] = metric_set_json(report.overall);
  doc["class_agnostic"] = metric_set_json(report.class_agnostic);
  ordered_json per = ordered_json::object();
  for (const auto& [cat, m] : report.per_category) per[std::string(category_name(cat))] = metric_set_json(m);
  doc["per_category"] = per;
  ordered_json skipped = ordered_json::array();
  for (Category c : report.skipped_categories) skipped.push_back(category_name(c));
  doc["skipped_categories"] = skipped;
  if (!curves.empty()) {
    doc["pr_curves"] = ordered_json::array();
    for (const auto& c : curves) doc["pr_curves"].push_back(curve_json(c));
  }
  return doc.dump(1) + "\n";
}

std::string pr_curve_json(const PrCurve& curve) { return curve_json(curve).dump(1) + "\n"; }

std::string success_rates_json(const SuccessRates& rates) {
  ordered_json doc;
  ordered_json per = ordered_json::object();
  for (Category c : kAllCategories) {
    ordered_json row = ordered_json::object();
    if (auto it = rates.labelling.find(c); it != rates.labelling.end()) row["labelling"] = it->second;
    if (auto it = rates.grasping.find(c); it != rates.grasping.end()) row["grasping"] = it->second;
    if (!row.empty()) per[std::string(category_name(c))] = row;
  }
  doc["per_category"] = per;
  doc["total"] = ordered_json{{"labelling", rates.labelling_total}, {"grasping", rates.grasping_total}};
  return doc.dump(1) + "\n";
}

std::string bench_report_json(const BenchReport& r) {
  ordered_json doc{{"samples", r.samples},       {"failures", r.failures},   {"mean_ms", r.mean_ms},
                   {"min_ms", r.min_ms},         {"p50_ms", r.p50_ms},       {"p90_ms", r.p90_ms},
                   {"p99_ms", r.p99_ms},         {"max_ms", r.max_ms},       {"reference_ms", r.reference_ms},
                   {"ratio_to_reference", r.ratio_to_reference}, {"latencies_ms", r.latencies_ms}};
  return doc.dump(1) + "\n";
}

std::string cloud_seg_scores_json(const CloudSegScores& s) {
  ordered_json doc{{"AP", pct(s.ap)}, {"AR", pct(s.ar)}, {"F1", pct(s.f1)},
                   {"n_pred", s.n_pred}, {"n_gt", s.n_gt}, {"matched", s.matched}};
  return doc.dump(1) + "\n";
}

CameraIntrinsics parse_intrinsics(const std::string& json_text) {
  const auto j = parse(json_text, "intrinsics");
  return guarded("intrinsics", [&] {
    CameraIntrinsics intr{j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                          j.at("cy").get<double>()};
    intr.validate();
    return intr;
  });
}

Eigen::Isometry3d parse_extrinsics(const std::string& json_text) {
  const auto j = parse(json_text, "extrinsics");
  return guarded("extrinsics", [&] {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    if (j.contains("matrix")) {
      const auto& m = j.at("matrix");
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) t.matrix()(r, c) = m.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
    } else {
      if (j.contains("rotation")) {
        const auto& m = j.at("rotation");
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            t.linear()(r, c) = m.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
      }
      if (j.contains("translation")) {
        const auto& v = j.at("translation");
        t.translation() = Eigen::Vector3d(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
      }
    }
    const Eigen::Matrix3d rtr = t.linear().transpose() * t.linear();
    if (!rtr.isIdentity(1e-6) || t.linear().determinant() < 0.0)
      throw Error(Errc::ParseError, "extrinsics: rotation is not orthonormal");
    return t;
  });
}

CostModelParams parse_cost_params(const std::string& json_text) {
  const auto j = parse(json_text, "cost params");
  return guarded("cost params", [&] {
    CostModelParams p;
    if (j.contains("gan")) {
      for (const auto& [name, v] : j.at("gan").items())
        p.gan[parse_category(name)] = GanTiming{v.at("train_s").get<double>(), v.at("sample_s").get<double>()};
    }
    if (j.contains("self_annot_ms")) p.self_annot_ms = j.at("self_annot_ms").get<double>();
    if (j.contains("compose_ms")) p.compose_ms = j.at("compose_ms").get<double>();
    if (j.contains("instances_per_scene")) p.instances_per_scene = j.at("instances_per_scene").get<int>();
    for (const auto& [key, v] : j.items())
      if (key != "gan" && key != "self_annot_ms" && key != "compose_ms" && key != "instances_per_scene")
        throw Error(Errc::ParseError, "cost params: unknown key '" + key + "'");
    p.validate();
    return p;
  });
}

TrialTally parse_tally(const std::string& json_text) {
  const auto j = parse(json_text, "tally");
  return guarded("tally", [&] {
    TrialTally t;
    auto column = [&](const char* key, std::map<Category, Tally>& out) {
      if (!j.contains(key)) return;
      for (const auto& [name, v] : j.at(key).items())
        out[parse_category(name)] = Tally{v.at(0).get<int>(), v.at(1).get<int>()};
    };
    column("labelling", t.labelling);
    column("grasping", t.grasping);
    t.validate();
    return t;
  });
}

}  // namespace fruitsynth
