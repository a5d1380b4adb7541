#pragma once

// JSON interchange files.
//
// Skeleton file (OpenPose-style, one per image):
//   {"image": "a.jpg", "people": [{"pose_keypoints_2d": [u0, v0, c0, ..., u24, v24, c24]}]}
//
// Detection file (one per image), either form:
//   {"image": "a.jpg", "persons": [{"anchors": {"Torso": [u, v], ...}, "location_mm": [X, Y, Z]}]}
//   {"image": "a.jpg", "persons": [{"anchors": {...}}], "distances_mm": {"0-1": 2350.0, ...}}

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "socialdist/evaluation.hpp"
#include "socialdist/geometry.hpp"

namespace socialdist::io {

using nlohmann::json;

struct SkeletonFile {
  std::string image_id;
  std::vector<geometry::SkeletonObservation> people;
};

/// `fallback_image_id` is used when the document has no "image" field.
SkeletonFile skeleton_from_json(const json& j, const std::string& fallback_image_id);
json to_json(const SkeletonFile& file);

evaluation::DetectionInput detection_from_json(const json& j);
json to_json(const evaluation::DetectionInput& det);

/// Detection document for estimator output: locations plus the chosen part,
/// per-part depths and the pair-wise distances.
json estimate_to_json(const std::string& image_id, const std::vector<geometry::PersonEstimate>& persons);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

/// *.json files directly inside `dir`, sorted by filename.
std::vector<std::filesystem::path> list_json_files(const std::filesystem::path& dir);

/// Output filename for an image: its stem plus ".json".
std::string json_name_for(const std::string& image_id);

std::vector<evaluation::DetectionInput> read_detection_dir(const std::filesystem::path& dir);

}  // namespace socialdist::io
