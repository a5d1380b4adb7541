#pragma once

// Shared fixtures for unit and acceptance tests: random in-frame scenes, the
// scene -> detections -> score loop, and brute-force oracles written without
// the library's evaluation code.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "socialdist/evaluation.hpp"
#include "socialdist/geometry.hpp"
#include "socialdist/simulator.hpp"

namespace socialdist::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Directory of the bundled data (data/ in the source tree).
std::filesystem::path data_dir();

struct RandomSceneOptions {
  double min_focal_mm = 16.0;
  double max_focal_mm = 300.0;
  std::size_t min_people = 2;
  std::size_t max_people = 6;
  double noise_px = 0.0;
};

/// Level camera, people facing it (theta 0), every keypoint comfortably in
/// frame. Focal length uniform in range, one of the two benchmark resolutions.
/// `layout`, when given, receives the people as placed in the world.
simulator::SyntheticScene random_scene(std::mt19937_64& rng, const RandomSceneOptions& opts = {},
                                       std::vector<simulator::SimPerson>* layout = nullptr);

geometry::CameraIntrinsics benchmark_camera(double focal_mm, bool mark_ii = false);

/// Annotation rows of a scene, as the dataset would store them.
std::vector<dataset::BodyPartAnnotation> scene_annotations(const simulator::SyntheticScene& scene);

/// Runs the estimator over every person's skeleton (noisy or exact) and
/// packages the result as a detection input. Undetectable skeletons are skipped.
evaluation::DetectionInput estimate_scene(const simulator::SyntheticScene& scene, const geometry::EstimatorOptions& opts,
                                          bool use_noisy = true);

/// Matching plus scoring of one synthetic scene.
evaluation::ImageEvaluation score_scene(const simulator::SyntheticScene& scene, const evaluation::DetectionInput& det);

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Mean of |est - gt| / gt * 100 over every unordered pair of matched
/// detections, computed with plain loops from raw locations and positions.
std::optional<double> brute_force_d_e(const std::vector<std::optional<std::tuple<double, double, double>>>& est_locations,
                                      const std::map<std::size_t, std::string>& matches,
                                      const std::map<std::string, std::tuple<double, double, double>>& gt_positions_mm);

struct ToyDetection {
  std::map<geometry::AnchorPart, geometry::PixelPoint> anchors;
};

struct ToyPerson {
  std::string tag;
  std::map<geometry::AnchorPart, geometry::PixelPoint> parts;
};

/// Among all maximal partial assignments of detections to people (edges only
/// where they share a part), the one whose ascending list of
/// (pixel distance, tag order, detection index) keys is lexicographically
/// smallest. Returned as detection index -> tag.
std::map<std::size_t, std::string> exhaustive_nearest_first(const std::vector<ToyDetection>& dets,
                                                            const std::vector<ToyPerson>& people);

}  // namespace socialdist::testing
