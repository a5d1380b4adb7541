#pragma once

// Virtual photoshoots: people and cameras placed in a world frame, projected
// through the pinhole model into BODY_25 skeletons, body-part annotations and
// ground-truth distances.
//
// World frame: millimetres, x/y on the ground plane, z up. A person stands at
// a ground point; the camera sits at its optical centre looking along
// heading `yaw_deg` (counter-clockwise from +x), tilted by `pitch_deg`
// (positive looks up). Cameras never roll, so the camera's horizontal axis
// stays parallel to the ground.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "socialdist/dataset.hpp"
#include "socialdist/geometry.hpp"

namespace socialdist::simulator {

using geometry::CameraIntrinsics;

enum class Posture { Standing, Sitting };

/// How a person's orientation angle shortens horizontal keypoint pairs.
enum class RotationModel {
  // The pair is shortened by cos(theta) and stays at its midpoint's depth.
  Foreshortened,
  // The pair is rotated in 3D about the vertical axis through its midpoint.
  Perspective,
};

std::string_view to_string(Posture p);
std::string_view to_string(RotationModel m);
Posture parse_posture(std::string_view s);
RotationModel parse_rotation_model(std::string_view s);

/// Vertical layout of the synthetic body, millimetres.
struct BodyModel {
  double hip_height_standing_mm = 1000.0;
  double hip_height_sitting_mm = 560.0;
  double eyes_above_neck_mm = 200.0;
  double head_above_neck_mm = 230.0;
};

struct SimPerson {
  std::string tag;
  Eigen::Vector3d position_mm = Eigen::Vector3d::Zero();  // ground contact point
  double theta_deg = 0.0;  // rotation about the vertical axis relative to the camera, [0, 90)
  Posture posture = Posture::Standing;
  geometry::ProportionSet proportions = geometry::default_proportions();
};

struct SimCamera {
  std::string tag;
  Eigen::Vector3d position_mm = Eigen::Vector3d::Zero();  // optical centre
  double yaw_deg = 90.0;
  double pitch_deg = 0.0;  // (-90, 90)
  CameraIntrinsics intrinsics;

  /// Camera-frame coordinates (camera at origin, Z < 0 in front) of a world point.
  geometry::WorldPoint to_camera_frame(const Eigen::Vector3d& world_mm) const;
};

/// Camera at `position` whose heading points at `target`; level unless
/// `aim_pitch` asks it to tilt onto the target too.
SimCamera aim_camera(std::string tag, const Eigen::Vector3d& position_mm, const Eigen::Vector3d& target_mm,
                     const CameraIntrinsics& intrinsics, bool aim_pitch = false);

struct SceneOptions {
  double noise_px = 0.0;  // std-dev of isotropic Gaussian pixel noise
  std::uint64_t seed = 0;
  RotationModel rotation = RotationModel::Foreshortened;
  double keypoint_confidence = 1.0;
  BodyModel body;
};

struct SimulatedPerson {
  std::string tag;
  geometry::SkeletonObservation skeleton;        // noisy; occluded keypoints have zero confidence
  geometry::SkeletonObservation exact_skeleton;  // noiseless, same occlusion
  std::map<geometry::AnchorPart, geometry::PixelPoint> annotations;  // visible parts only
  /// Camera-frame midpoint of each pair, whether visible or not.
  std::map<geometry::BodyPart, geometry::WorldPoint> true_pair_midpoints;

  bool detectable() const { return !annotations.empty(); }
};

struct SyntheticScene {
  std::string image_id;
  SimCamera camera;
  std::vector<SimulatedPerson> people;  // input order
  dataset::GroundTruthPairs ground_truth_mm;
};

/// Projects the people through the camera. Throws InvalidScene when any body
/// point lies behind the camera or a person is outside [0, 90) degrees.
SyntheticScene synthesize_scene(const std::vector<SimPerson>& people, const SimCamera& camera,
                                const SceneOptions& options, std::string image_id = "synthetic.jpg");

struct ReplayOptions {
  Posture posture = Posture::Standing;
  double tripod_height_mm = 1350.0;
  std::optional<double> pitch_deg;  // default: level, or aimed down for elevated cameras
  SceneOptions scene;
};

/// Synthesises one shot of an annotated layout (positions in centimetres)
/// from `camera_tag`, aiming at the people's centroid.
SyntheticScene replay_benchmark_layout(const dataset::GroundTruthScene& scene, const std::string& camera_tag,
                                       const CameraIntrinsics& intrinsics, const ReplayOptions& options = {});

// ---------------------------------------------------------------------------
// Scene configuration files
// ---------------------------------------------------------------------------

struct ShotConfig {
  std::string image;
  std::string camera;
  CameraIntrinsics intrinsics;
  std::optional<double> noise_px;
};

struct CameraConfig {
  std::string tag;
  Eigen::Vector3d position_cm = Eigen::Vector3d::Zero();  // ground-plane position and elevation
  std::optional<double> yaw_deg;
  std::optional<double> pitch_deg;
};

struct PhotoshootConfig {
  int id = 0;
  std::string setting;
  Posture posture = Posture::Standing;
  std::vector<SimPerson> people;  // positions in millimetres after loading
  std::vector<CameraConfig> cameras;
  std::vector<ShotConfig> shots;
};

struct SimulationConfig {
  std::uint64_t seed = 0;
  double noise_px = 0.0;
  double tripod_height_mm = 1350.0;
  RotationModel rotation = RotationModel::Foreshortened;
  std::vector<PhotoshootConfig> photoshoots;

  static SimulationConfig from_json_text(const std::string& text);
  static SimulationConfig from_file(const std::filesystem::path& path);
};

struct SimulationOutput {
  dataset::AnnotationRows rows;
  std::vector<SyntheticScene> shots;  // config order
};

/// Every shot of every photoshoot. Shot k draws noise from a stream seeded by
/// (seed, k), so results do not depend on `jobs`.
SimulationOutput simulate(const SimulationConfig& config, unsigned jobs = 1);

}  // namespace socialdist::simulator
