#include "socialdist/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "socialdist/errors.hpp"

namespace socialdist::geometry {

void CameraIntrinsics::validate() const {
  auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
  if (bad(focal_length_mm) || bad(sensor_width_mm) || bad(sensor_height_mm) || image_width_px <= 0 ||
      image_height_px <= 0) {
    std::ostringstream os;
    os << "camera intrinsics must be strictly positive (f=" << focal_length_mm << " sensor=" << sensor_width_mm
       << "x" << sensor_height_mm << " image=" << image_width_px << "x" << image_height_px << ")";
    throw InvalidIntrinsics(os.str());
  }
}

std::string_view to_string(BodyPart part) {
  switch (part) {
    case BodyPart::Pupils:
      return "Pupils";
    case BodyPart::Shoulders:
      return "Shoulders";
    case BodyPart::Torso:
      return "Torso";
  }
  return "?";
}

std::string_view to_string(AnchorPart part) {
  switch (part) {
    case AnchorPart::Eyes:
      return "Eyes";
    case AnchorPart::Shoulder:
      return "Shoulder";
    case AnchorPart::Torso:
      return "Torso";
    case AnchorPart::Head:
      return "Head";
  }
  return "?";
}

std::optional<BodyPart> parse_body_part(std::string_view name) {
  for (BodyPart p : kAllBodyParts) {
    if (to_string(p) == name) return p;
  }
  if (name == "pupils") return BodyPart::Pupils;
  if (name == "shoulders") return BodyPart::Shoulders;
  if (name == "torso") return BodyPart::Torso;
  return std::nullopt;
}

std::optional<AnchorPart> parse_anchor_part(std::string_view name) {
  for (AnchorPart p : kAllAnchorParts) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

AnchorPart anchor_for(BodyPart part) {
  switch (part) {
    case BodyPart::Pupils:
      return AnchorPart::Eyes;
    case BodyPart::Shoulders:
      return AnchorPart::Shoulder;
    case BodyPart::Torso:
      return AnchorPart::Torso;
  }
  return AnchorPart::Torso;
}

std::pair<std::size_t, std::size_t> keypoint_indices(BodyPart part) {
  switch (part) {
    case BodyPart::Pupils:
      return {15, 16};
    case BodyPart::Shoulders:
      return {2, 5};
    case BodyPart::Torso:
      return {1, 8};
  }
  return {1, 8};
}

int selection_priority(BodyPart part) {
  switch (part) {
    case BodyPart::Torso:
      return 0;
    case BodyPart::Shoulders:
      return 1;
    case BodyPart::Pupils:
      return 2;
  }
  return 3;
}

ProportionSet default_proportions() {
  return {{BodyPart::Pupils, kPupilsLengthMm},
          {BodyPart::Shoulders, kShouldersLengthMm},
          {BodyPart::Torso, kTorsoLengthMm}};
}

std::optional<double> proportion_length(const ProportionSet& set, BodyPart part) {
  for (const auto& p : set) {
    if (p.part == part) return p.world_length_mm;
  }
  return std::nullopt;
}

std::vector<KeypointPairObservation> usable_pairs(const SkeletonObservation& obs, double confidence_floor) {
  std::vector<KeypointPairObservation> pairs;
  for (BodyPart part : kAllBodyParts) {
    auto [i0, i1] = keypoint_indices(part);
    const Keypoint& k0 = obs.keypoints[i0];
    const Keypoint& k1 = obs.keypoints[i1];
    if (k0.confidence < confidence_floor || k1.confidence < confidence_floor) continue;
    if (k0.confidence <= 0.0 || k1.confidence <= 0.0) continue;
    pairs.push_back({part, {k0.u, k0.v}, {k1.u, k1.v}, std::min(k0.confidence, k1.confidence)});
  }
  return pairs;
}

SensorPoint pixel_to_sensor(PixelPoint p, const CameraIntrinsics& cam) {
  const double w = cam.image_width_px;
  const double h = cam.image_height_px;
  if (!(p.u >= 0.0 && p.u < w && p.v >= 0.0 && p.v < h)) {
    std::ostringstream os;
    os << "pixel (" << p.u << ", " << p.v << ") outside a " << cam.image_width_px << "x" << cam.image_height_px
       << " image";
    throw InvalidPixel(os.str());
  }
  return {(p.u - w / 2.0) * cam.sensor_width_mm / w, (h / 2.0 - p.v) * cam.sensor_height_mm / h};
}

PixelPoint sensor_to_pixel(SensorPoint s, const CameraIntrinsics& cam) {
  const double w = cam.image_width_px;
  const double h = cam.image_height_px;
  return {w / 2.0 + s.x_mm * w / cam.sensor_width_mm, h / 2.0 - s.y_mm * h / cam.sensor_height_mm};
}

double image_pair_distance(SensorPoint p0, SensorPoint p1) { return std::hypot(p0.x_mm - p1.x_mm, p0.y_mm - p1.y_mm); }

double estimate_depth(double d_image_mm, const CameraIntrinsics& cam, const BodyProportion& proportion) {
  if (!(d_image_mm > 0.0)) {
    throw DegeneratePair(std::string("keypoint pair '") + std::string(to_string(proportion.part)) +
                         "' has zero length in the image");
  }
  return cam.focal_length_mm * proportion.world_length_mm / d_image_mm;
}

WorldPoint back_project(SensorPoint p, double depth_mm, const CameraIntrinsics& cam) {
  const double scale = depth_mm / cam.focal_length_mm;
  return {-scale * p.x_mm, -scale * p.y_mm, -depth_mm};
}

SensorPoint project(const WorldPoint& point, const CameraIntrinsics& cam) {
  const double depth = -point.z_mm;
  return {-cam.focal_length_mm * point.x_mm / depth, -cam.focal_length_mm * point.y_mm / depth};
}

double pairwise_distance(const WorldPoint& a, const WorldPoint& b) {
  return std::hypot(a.x_mm - b.x_mm, a.y_mm - b.y_mm, a.z_mm - b.z_mm);
}

std::size_t select_estimate(std::span<const PartEstimate> candidates, double tie_tolerance) {
  double min_depth = candidates.front().depth_mm;
  for (const auto& c : candidates) min_depth = std::min(min_depth, c.depth_mm);
  const double limit = min_depth * (1.0 + tie_tolerance);
  std::size_t best = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].depth_mm > limit) continue;
    if (best == candidates.size() ||
        selection_priority(candidates[i].part) < selection_priority(candidates[best].part)) {
      best = i;
    }
  }
  return best;
}

namespace {

PixelPoint midpoint(PixelPoint a, PixelPoint b) { return {(a.u + b.u) / 2.0, (a.v + b.v) / 2.0}; }

}  // namespace

std::map<AnchorPart, PixelPoint> skeleton_anchors(const SkeletonObservation& obs, double confidence_floor) {
  std::map<AnchorPart, PixelPoint> anchors;
  for (BodyPart part : kAllBodyParts) {
    auto [i0, i1] = keypoint_indices(part);
    const Keypoint& k0 = obs.keypoints[i0];
    const Keypoint& k1 = obs.keypoints[i1];
    const bool ok0 = k0.confidence > 0.0 && k0.confidence >= confidence_floor;
    const bool ok1 = k1.confidence > 0.0 && k1.confidence >= confidence_floor;
    if (ok0 && ok1) {
      anchors[anchor_for(part)] = midpoint({k0.u, k0.v}, {k1.u, k1.v});
    } else if ((ok0 || ok1) && part != BodyPart::Torso) {
      // A sideways head or body shows one eye/shoulder; it still anchors.
      const Keypoint& k = ok0 ? k0 : k1;
      anchors[anchor_for(part)] = {k.u, k.v};
    }
  }
  return anchors;
}

PersonEstimate estimate_person(const SkeletonObservation& obs, const CameraIntrinsics& cam,
                               const EstimatorOptions& opts) {
  cam.validate();
  PersonEstimate est;
  for (const auto& pair : usable_pairs(obs, opts.confidence_floor)) {
    auto length = proportion_length(opts.proportions, pair.part);
    if (!length) continue;
    const SensorPoint s0 = pixel_to_sensor(pair.p0, cam);
    const SensorPoint s1 = pixel_to_sensor(pair.p1, cam);
    const double d_image = image_pair_distance(s0, s1);
    if (!(d_image > 0.0)) continue;  // collapsed pair cannot range this person
    const double depth = estimate_depth(d_image, cam, {pair.part, *length});
    const SensorPoint mid{(s0.x_mm + s1.x_mm) / 2.0, (s0.y_mm + s1.y_mm) / 2.0};
    est.per_part_estimates.push_back({pair.part, depth, back_project(mid, depth, cam)});
  }
  if (est.per_part_estimates.empty()) {
    throw NoUsableKeypoints("no usable keypoint pair above confidence floor " +
                            std::to_string(opts.confidence_floor));
  }
  const auto& chosen = est.per_part_estimates[select_estimate(est.per_part_estimates, opts.tie_tolerance)];
  est.location = chosen.location;
  est.chosen_part = chosen.part;
  est.anchors = skeleton_anchors(obs, opts.confidence_floor);
  return est;
}

}  // namespace socialdist::geometry
