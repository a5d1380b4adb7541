#include "socialdist/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "socialdist/errors.hpp"

namespace socialdist::io {

namespace fs = std::filesystem;
using geometry::AnchorPart;
using geometry::PixelPoint;
using geometry::WorldPoint;

namespace {

json world_json(const WorldPoint& p) { return json::array({p.x_mm, p.y_mm, p.z_mm}); }

WorldPoint world_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw MalformedDetection("location_mm must be [X, Y, Z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json anchors_json(const std::map<AnchorPart, PixelPoint>& anchors) {
  json a = json::object();
  for (const auto& [part, px] : anchors) a[std::string(geometry::to_string(part))] = json::array({px.u, px.v});
  return a;
}

std::pair<std::size_t, std::size_t> parse_pair_key(const std::string& key) {
  const auto dash = key.find('-');
  if (dash == std::string::npos) throw MalformedDetection("distance key '" + key + "' is not 'i-j'");
  std::size_t a = 0;
  std::size_t b = 0;
  auto r1 = std::from_chars(key.data(), key.data() + dash, a);
  auto r2 = std::from_chars(key.data() + dash + 1, key.data() + key.size(), b);
  if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != key.data() + dash ||
      r2.ptr != key.data() + key.size() || a == b) {
    throw MalformedDetection("distance key '" + key + "' is not 'i-j'");
  }
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

SkeletonFile skeleton_from_json(const json& j, const std::string& fallback_image_id) {
  SkeletonFile file;
  try {
    file.image_id = j.contains("image") ? j.at("image").get<std::string>() : fallback_image_id;
    for (const auto& person : j.at("people")) {
      const auto& flat = person.at("pose_keypoints_2d");
      if (!flat.is_array() || flat.size() != 3 * geometry::kKeypointCount) {
        throw InputError(fmt::format("{}: pose_keypoints_2d must hold {} numbers", file.image_id,
                                     3 * geometry::kKeypointCount));
      }
      geometry::SkeletonObservation obs;
      for (std::size_t k = 0; k < geometry::kKeypointCount; ++k) {
        obs.keypoints[k] = {flat[3 * k].get<double>(), flat[3 * k + 1].get<double>(), flat[3 * k + 2].get<double>()};
      }
      file.people.push_back(obs);
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("skeleton file {}: {}", fallback_image_id, e.what()));
  }
  return file;
}

json to_json(const SkeletonFile& file) {
  json people = json::array();
  for (const auto& obs : file.people) {
    json flat = json::array();
    for (const auto& k : obs.keypoints) {
      flat.push_back(k.u);
      flat.push_back(k.v);
      flat.push_back(k.confidence);
    }
    people.push_back({{"pose_keypoints_2d", flat}});
  }
  return {{"image", file.image_id}, {"people", people}};
}

evaluation::DetectionInput detection_from_json(const json& j) {
  evaluation::DetectionInput det;
  try {
    det.image_id = j.at("image").get<std::string>();
    for (const auto& pj : j.value("persons", json::array())) {
      evaluation::DetectedPerson p;
      for (auto& [name, xy] : pj.at("anchors").items()) {
        auto part = geometry::parse_anchor_part(name);
        if (!part) throw MalformedDetection(fmt::format("{}: unknown anchor part '{}'", det.image_id, name));
        if (!xy.is_array() || xy.size() != 2) throw MalformedDetection(det.image_id + ": anchors must be [u, v]");
        p.anchors[*part] = {xy[0].get<double>(), xy[1].get<double>()};
      }
      if (pj.contains("location_mm")) p.location = world_from(pj.at("location_mm"));
      det.persons.push_back(std::move(p));
    }
    if (j.contains("distances_mm")) {
      std::map<evaluation::IndexPair, double> d;
      for (auto& [key, value] : j.at("distances_mm").items()) d[parse_pair_key(key)] = value.get<double>();
      det.distances_mm = std::move(d);
    }
  } catch (const json::exception& e) {
    throw MalformedDetection(std::string("detection file: ") + e.what());
  }
  det.validate();
  return det;
}

json to_json(const evaluation::DetectionInput& det) {
  json persons = json::array();
  for (const auto& p : det.persons) {
    json pj = {{"anchors", anchors_json(p.anchors)}};
    if (p.location) pj["location_mm"] = world_json(*p.location);
    persons.push_back(std::move(pj));
  }
  json j = {{"image", det.image_id}, {"persons", persons}};
  if (det.distances_mm) {
    json d = json::object();
    for (const auto& [key, value] : *det.distances_mm) d[fmt::format("{}-{}", key.first, key.second)] = value;
    j["distances_mm"] = d;
  }
  return j;
}

json estimate_to_json(const std::string& image_id, const std::vector<geometry::PersonEstimate>& persons) {
  json pj = json::array();
  for (const auto& p : persons) {
    json parts = json::array();
    for (const auto& e : p.per_part_estimates) {
      parts.push_back({{"part", std::string(geometry::to_string(e.part))},
                       {"depth_mm", e.depth_mm},
                       {"location_mm", world_json(e.location)}});
    }
    pj.push_back({{"anchors", anchors_json(p.anchors)},
                  {"location_mm", world_json(p.location)},
                  {"chosen_part", std::string(geometry::to_string(p.chosen_part))},
                  {"depth_mm", p.depth_mm()},
                  {"per_part", parts}});
  }
  json pairs = json::array();
  for (std::size_t i = 0; i < persons.size(); ++i) {
    for (std::size_t k = i + 1; k < persons.size(); ++k) {
      pairs.push_back(
          {{"a", i}, {"b", k}, {"distance_mm", geometry::pairwise_distance(persons[i].location, persons[k].location)}});
    }
  }
  return {{"image", image_id}, {"persons", pj}, {"pair_distances_mm", pairs}};
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<fs::path> list_json_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

std::string json_name_for(const std::string& image_id) { return fs::path(image_id).stem().string() + ".json"; }

std::vector<evaluation::DetectionInput> read_detection_dir(const fs::path& dir) {
  std::vector<evaluation::DetectionInput> out;
  for (const auto& file : list_json_files(dir)) out.push_back(detection_from_json(read_json_file(file)));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  return out;
}

}  // namespace socialdist::io
