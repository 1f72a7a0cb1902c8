#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fruitsynth/metrics.hpp"
#include "fruitsynth/objprep.hpp"
#include "fruitsynth/scenegen.hpp"

namespace fruitsynth {

/// COCO-style annotation document for a list of scenes. Key order, id
/// assignment and number formatting are fixed, so equal scenes always give
/// identical bytes. Throws DuplicateId on repeated scene ids.
std::string coco_json(const std::vector<SceneAnnotation>& scenes);

/// Writes images/<scene_id>.png and annotations.json under out_dir.
void emit_dataset(const std::vector<SceneAnnotation>& scenes, const std::filesystem::path& out_dir);

struct GroundTruthSet {
  std::vector<GroundTruth> instances;
  std::map<std::string, std::pair<int, int>> scene_dims;  // width, height
  std::map<long long, std::string> image_scene;          // COCO image id -> scene id
};

GroundTruthSet parse_ground_truth(const std::string& json_text);
GroundTruthSet load_ground_truth(const std::filesystem::path& path);

/// Accepts a bare array of results or an object with an "annotations" array.
/// Each entry needs category_id, bbox and score, plus scene_id or an image_id
/// resolvable through `gt`; segmentation is optional.
std::vector<Detection> parse_predictions(const std::string& json_text, const GroundTruthSet* gt = nullptr);
std::vector<Detection> load_predictions(const std::filesystem::path& path, const GroundTruthSet* gt = nullptr);

/// Serializes detections in the prediction schema (image ids taken from `gt` when given).
std::string predictions_json(const std::vector<Detection>& dets, const GroundTruthSet* gt = nullptr);

/// Ground truth re-expressed as confidence-1 detections.
std::vector<Detection> ground_truth_as_predictions(const GroundTruthSet& gt);

/// Cutout library: one PNG patch per object plus manifest.json with the
/// RLE mask, category and source id of each.
void write_object_library(const std::filesystem::path& dir, const std::vector<AnnotatedObject>& objects);
std::vector<AnnotatedObject> read_object_library(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fruitsynth
