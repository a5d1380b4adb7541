#pragma once

// Pinhole ranging of people from body keypoint pairs.
//
// Coordinate conventions:
//   pixel   (u, v)    origin at the top-left image corner, v grows downward
//   sensor  (x, y)    millimetres on the sensor plane, origin at its centre, y up
//   camera  (X, Y, Z) millimetres, camera at the origin, Z < 0 in front of it
//
// All functions are pure; every type here is a plain value.

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace socialdist::geometry {

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct SensorPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;

  friend bool operator==(const SensorPoint&, const SensorPoint&) = default;
};

struct WorldPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double z_mm = 0.0;

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

struct CameraIntrinsics {
  double focal_length_mm = 0.0;
  double sensor_width_mm = 36.0;
  double sensor_height_mm = 24.0;
  int image_width_px = 0;
  int image_height_px = 0;

  /// Throws InvalidIntrinsics unless every field is strictly positive.
  void validate() const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Keypoint pairs used as ranging yardsticks.
enum class BodyPart { Pupils, Shoulders, Torso };

/// Body-part labels used by annotations and for detection matching.
enum class AnchorPart { Eyes, Shoulder, Torso, Head };

inline constexpr std::array<BodyPart, 3> kAllBodyParts = {BodyPart::Torso, BodyPart::Shoulders,
                                                          BodyPart::Pupils};
inline constexpr std::array<AnchorPart, 4> kAllAnchorParts = {AnchorPart::Eyes, AnchorPart::Shoulder,
                                                              AnchorPart::Torso, AnchorPart::Head};

std::string_view to_string(BodyPart part);
std::string_view to_string(AnchorPart part);
std::optional<BodyPart> parse_body_part(std::string_view name);
std::optional<AnchorPart> parse_anchor_part(std::string_view name);

/// Annotation label whose pixel location is the midpoint of the given pair.
AnchorPart anchor_for(BodyPart part);

/// OpenPose BODY_25 indices of the pair's endpoints.
std::pair<std::size_t, std::size_t> keypoint_indices(BodyPart part);

/// Tie-break priority for selection, lower wins: Torso, Shoulders, Pupils.
int selection_priority(BodyPart part);

struct BodyProportion {
  BodyPart part = BodyPart::Torso;
  double world_length_mm = 0.0;

  friend bool operator==(const BodyProportion&, const BodyProportion&) = default;
};

using ProportionSet = std::vector<BodyProportion>;

inline constexpr double kPupilsLengthMm = 63.0;
inline constexpr double kShouldersLengthMm = 389.0;
inline constexpr double kTorsoLengthMm = 444.0;

/// Average adult proportions: pupils 63 mm, shoulders 389 mm, torso 444 mm.
ProportionSet default_proportions();

/// Length for `part` in `set`, if the set ranges with that part at all.
std::optional<double> proportion_length(const ProportionSet& set, BodyPart part);

inline constexpr std::size_t kKeypointCount = 25;

struct Keypoint {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// One detected person in OpenPose BODY_25 layout.
struct SkeletonObservation {
  std::array<Keypoint, kKeypointCount> keypoints{};

  friend bool operator==(const SkeletonObservation&, const SkeletonObservation&) = default;
};

struct KeypointPairObservation {
  BodyPart part = BodyPart::Torso;
  PixelPoint p0;
  PixelPoint p1;
  double confidence = 0.0;  // min of the two endpoint confidences
};

inline constexpr double kDefaultConfidenceFloor = 0.1;

/// Pairs of `obs` whose two endpoints both reach `confidence_floor`.
std::vector<KeypointPairObservation> usable_pairs(const SkeletonObservation& obs,
                                                  double confidence_floor = kDefaultConfidenceFloor);

// ---------------------------------------------------------------------------
// Core pinhole operations
// ---------------------------------------------------------------------------

/// Per-axis linear pixel->sensor mapping with the principal point at the image
/// centre. Throws InvalidPixel outside [0, W) x [0, H).
SensorPoint pixel_to_sensor(PixelPoint p, const CameraIntrinsics& cam);

/// Inverse of pixel_to_sensor, without bounds checks.
PixelPoint sensor_to_pixel(SensorPoint s, const CameraIntrinsics& cam);

double image_pair_distance(SensorPoint p0, SensorPoint p1);

/// Triangle similarity: d = f * L / d_image. Throws DegeneratePair when
/// d_image <= 0.
double estimate_depth(double d_image_mm, const CameraIntrinsics& cam, const BodyProportion& proportion);

/// X = -(d/f) x_a, Y = -(d/f) y_a, Z = -d.
WorldPoint back_project(SensorPoint p, double depth_mm, const CameraIntrinsics& cam);

/// Inverse of back_project: the sensor point a camera-frame point images to.
/// Requires z < 0.
SensorPoint project(const WorldPoint& point, const CameraIntrinsics& cam);

double pairwise_distance(const WorldPoint& a, const WorldPoint& b);

// ---------------------------------------------------------------------------
// Person-level estimation
// ---------------------------------------------------------------------------

struct PartEstimate {
  BodyPart part = BodyPart::Torso;
  double depth_mm = 0.0;
  WorldPoint location;
};

struct PersonEstimate {
  WorldPoint location;
  BodyPart chosen_part = BodyPart::Torso;
  std::map<AnchorPart, PixelPoint> anchors;
  std::vector<PartEstimate> per_part_estimates;

  double depth_mm() const { return -location.z_mm; }
};

struct EstimatorOptions {
  ProportionSet proportions = default_proportions();
  double confidence_floor = kDefaultConfidenceFloor;
  // Depths within this relative distance of the minimum are treated as tied.
  double tie_tolerance = 1e-9;
};

/// Ranges one person from every usable pair and keeps the estimate closest to
/// the camera (smallest depth). Throws NoUsableKeypoints when nothing in
/// `opts.proportions` can be ranged.
PersonEstimate estimate_person(const SkeletonObservation& obs, const CameraIntrinsics& cam,
                               const EstimatorOptions& opts = {});

/// Index into `candidates` of the selected estimate; `candidates` must be non-empty.
std::size_t select_estimate(std::span<const PartEstimate> candidates, double tie_tolerance = 1e-9);

/// Matching anchors for a skeleton: pair midpoints, or the single visible
/// endpoint for the eyes and shoulders of a sideways person.
std::map<AnchorPart, PixelPoint> skeleton_anchors(const SkeletonObservation& obs, double confidence_floor);

}  // namespace socialdist::geometry
