#include "fruitsynth/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fruitsynth/errors.hpp"
#include "fruitsynth/png_io.hpp"
#include "fruitsynth/rle.hpp"

namespace fruitsynth {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json rle_to_json(const RleMask& rle) {
  return ordered_json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

RleMask rle_from_json(const nlohmann::json& j) {
  RleMask rle;
  const auto& size = j.at("size");
  rle.height = size.at(0).get<int>();
  rle.width = size.at(1).get<int>();
  const auto& counts = j.at("counts");
  if (!counts.is_array()) throw Error(Errc::ParseError, "only uncompressed (list) RLE counts are supported");
  rle.counts = counts.get<std::vector<std::uint32_t>>();
  return rle;
}

Bbox bbox_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(Errc::ParseError, "bbox must be [x, y, w, h]");
  // Accept float boxes from external predictors; round to pixel grid.
  auto px = [&](std::size_t i) { return static_cast<int>(std::lround(j.at(i).get<double>())); };
  return Bbox{px(0), px(1), px(2), px(3)};
}

Category category_from_json(const nlohmann::json& j) {
  const int id = j.get<int>();
  if (auto c = category_from_id(id)) return *c;
  throw Error(Errc::ParseError, "unknown category_id " + std::to_string(id));
}

nlohmann::json parse_json(const std::string& text, const char* what) {
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

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

std::string coco_json(const std::vector<SceneAnnotation>& scenes) {
  std::set<std::string> ids;
  for (const auto& s : scenes)
    if (!ids.insert(s.scene_id).second) throw Error(Errc::DuplicateId, "scene id '" + s.scene_id + "' repeats");

  ordered_json doc;
  doc["info"] = ordered_json{{"description", "synthetic table-top fruit scenes"}, {"version", "1.0"}};
  doc["images"] = ordered_json::array();
  doc["categories"] = ordered_json::array();
  doc["annotations"] = ordered_json::array();
  for (Category c : kAllCategories)
    doc["categories"].push_back(
        ordered_json{{"id", category_id(c)}, {"name", category_name(c)}, {"supercategory", "fruit"}});

  long long ann_id = 1;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    const auto image_id = static_cast<long long>(i + 1);
    ordered_json img{{"id", image_id},
                     {"file_name", "images/" + s.scene_id + ".png"},
                     {"width", s.image.width()},
                     {"height", s.image.height()},
                     {"scene_id", s.scene_id},
                     {"background", s.background_source},
                     {"seed", s.seed}};
    if (s.letterbox) {
      const auto& t = *s.letterbox;
      img["letterbox"] = ordered_json{{"source_width", t.source_width}, {"source_height", t.source_height},
                                      {"scale", t.scale},               {"offset_x", t.offset_x},
                                      {"offset_y", t.offset_y}};
    }
    doc["images"].push_back(std::move(img));
    for (const auto& inst : s.instances) {
      doc["annotations"].push_back(ordered_json{
          {"id", ann_id++},
          {"image_id", image_id},
          {"category_id", category_id(inst.category)},
          {"segmentation", rle_to_json(encode_mask_rle(inst.visible_mask))},
          {"area", inst.visible_area()},
          {"bbox", {inst.bbox.x, inst.bbox.y, inst.bbox.w, inst.bbox.h}},
          {"iscrowd", 0},
          {"full_area", inst.full_area},
          {"z_order", inst.z_order},
          {"source_id", inst.source_id},
      });
    }
  }
  return doc.dump(1) + "\n";
}

void emit_dataset(const std::vector<SceneAnnotation>& scenes, const std::filesystem::path& out_dir) {
  const std::string doc = coco_json(scenes);  // validates ids before touching the disk
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + (out_dir / "images").string() + "': " + ec.message());
  for (const auto& s : scenes) write_png_rgb(out_dir / "images" / (s.scene_id + ".png"), s.image);
  write_text_file(out_dir / "annotations.json", doc);
}

GroundTruthSet parse_ground_truth(const std::string& json_text) {
  const auto doc = parse_json(json_text, "ground truth");
  return guarded("ground truth", [&] {
    GroundTruthSet gt;
    for (const auto& img : doc.at("images")) {
      const long long id = img.at("id").get<long long>();
      const std::string scene = img.contains("scene_id") ? img.at("scene_id").get<std::string>()
                                                         : img.at("file_name").get<std::string>();
      gt.image_scene[id] = scene;
      gt.scene_dims[scene] = {img.at("width").get<int>(), img.at("height").get<int>()};
    }
    for (const auto& ann : doc.at("annotations")) {
      GroundTruth g;
      const long long image_id = ann.at("image_id").get<long long>();
      const auto it = gt.image_scene.find(image_id);
      if (it == gt.image_scene.end())
        throw Error(Errc::ParseError, "annotation references unknown image_id " + std::to_string(image_id));
      g.scene_id = it->second;
      g.category = category_from_json(ann.at("category_id"));
      g.bbox = bbox_from_json(ann.at("bbox"));
      if (ann.contains("segmentation") && ann.at("segmentation").is_object())
        g.mask = decode_mask_rle(rle_from_json(ann.at("segmentation")));
      gt.instances.push_back(std::move(g));
    }
    return gt;
  });
}

GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(read_text_file(path));
}

std::vector<Detection> parse_predictions(const std::string& json_text, const GroundTruthSet* gt) {
  const auto doc = parse_json(json_text, "predictions");
  return guarded("predictions", [&] {
    const auto& list = doc.is_array() ? doc : doc.at("annotations");
    std::vector<Detection> dets;
    for (const auto& p : list) {
      Detection d;
      if (p.contains("scene_id")) {
        d.scene_id = p.at("scene_id").get<std::string>();
      } else {
        const long long image_id = p.at("image_id").get<long long>();
        if (!gt || !gt->image_scene.count(image_id))
          throw Error(Errc::ParseError, "prediction image_id " + std::to_string(image_id) +
                                            " cannot be resolved to a scene");
        d.scene_id = gt->image_scene.at(image_id);
      }
      d.category = category_from_json(p.at("category_id"));
      d.confidence = p.at("score").get<double>();
      if (d.confidence < 0.0 || d.confidence > 1.0)
        throw Error(Errc::ParseError, "prediction score " + std::to_string(d.confidence) + " outside [0,1]");
      d.bbox = bbox_from_json(p.at("bbox"));
      if (p.contains("segmentation") && p.at("segmentation").is_object()) {
        d.mask = decode_mask_rle(rle_from_json(p.at("segmentation")));
        if (gt) {
          const auto dims = gt->scene_dims.find(d.scene_id);
          if (dims != gt->scene_dims.end() &&
              (dims->second.first != d.mask->width() || dims->second.second != d.mask->height()))
            throw Error(Errc::DimensionMismatch, "prediction mask dims differ from scene '" + d.scene_id + "'");
        }
      }
      dets.push_back(std::move(d));
    }
    return dets;
  });
}

std::vector<Detection> load_predictions(const std::filesystem::path& path, const GroundTruthSet* gt) {
  return parse_predictions(read_text_file(path), gt);
}

std::string predictions_json(const std::vector<Detection>& dets, const GroundTruthSet* gt) {
  std::map<std::string, long long> scene_image;
  if (gt)
    for (const auto& [id, scene] : gt->image_scene) scene_image[scene] = id;
  ordered_json out = ordered_json::array();
  for (const auto& d : dets) {
    ordered_json p;
    if (auto it = scene_image.find(d.scene_id); it != scene_image.end()) p["image_id"] = it->second;
    p["scene_id"] = d.scene_id;
    p["category_id"] = category_id(d.category);
    p["bbox"] = {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h};
    p["score"] = d.confidence;
    if (d.mask) p["segmentation"] = rle_to_json(encode_mask_rle(*d.mask));
    out.push_back(std::move(p));
  }
  return out.dump(1) + "\n";
}

std::vector<Detection> ground_truth_as_predictions(const GroundTruthSet& gt) {
  std::vector<Detection> dets;
  dets.reserve(gt.instances.size());
  for (const auto& g : gt.instances) dets.push_back(Detection{g.scene_id, g.category, 1.0, g.bbox, g.mask});
  return dets;
}

void write_object_library(const std::filesystem::path& dir, const std::vector<AnnotatedObject>& objects) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  std::set<std::string> ids;
  ordered_json manifest{{"objects", ordered_json::array()}};
  for (const auto& obj : objects) {
    if (!ids.insert(obj.source_id).second) throw Error(Errc::DuplicateId, "object id '" + obj.source_id + "' repeats");
    const std::string file = obj.source_id + ".png";
    write_png_rgb(dir / file, obj.patch);
    manifest["objects"].push_back(ordered_json{{"source_id", obj.source_id},
                                               {"category", category_name(obj.category)},
                                               {"category_id", category_id(obj.category)},
                                               {"file", file},
                                               {"width", obj.patch.width()},
                                               {"height", obj.patch.height()},
                                               {"area", obj.mask.popcount()},
                                               {"mask", rle_to_json(encode_mask_rle(obj.mask))}});
  }
  write_text_file(dir / "manifest.json", manifest.dump(1) + "\n");
}

std::vector<AnnotatedObject> read_object_library(const std::filesystem::path& dir) {
  const auto doc = parse_json(read_text_file(dir / "manifest.json"), "object manifest");
  return guarded("object manifest", [&] {
    std::vector<AnnotatedObject> objects;
    for (const auto& o : doc.at("objects")) {
      auto patch = read_png_rgb(dir / o.at("file").get<std::string>());
      auto mask = decode_mask_rle(rle_from_json(o.at("mask")));
      if (mask.width() != patch.width() || mask.height() != patch.height())
        throw Error(Errc::DimensionMismatch, "object '" + o.at("source_id").get<std::string>() +
                                                 "': mask and patch dims differ");
      objects.push_back(AnnotatedObject{std::move(patch), std::move(mask), category_from_json(o.at("category_id")),
                                        o.at("source_id").get<std::string>()});
    }
    return objects;
  });
}

}  // namespace fruitsynth
