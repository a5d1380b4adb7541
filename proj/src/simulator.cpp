#include "socialdist/simulator.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "socialdist/csv.hpp"
#include "socialdist/errors.hpp"
#include "socialdist/parallel.hpp"

namespace socialdist::simulator {

using geometry::AnchorPart;
using geometry::BodyPart;
using geometry::PixelPoint;
using geometry::WorldPoint;
using Eigen::Vector3d;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct CameraBasis {
  Vector3d forward;
  Vector3d right;
  Vector3d up;
};

CameraBasis basis(double yaw_deg, double pitch_deg) {
  const double y = yaw_deg * kDegToRad;
  const double p = pitch_deg * kDegToRad;
  CameraBasis b;
  b.forward = Vector3d(std::cos(p) * std::cos(y), std::cos(p) * std::sin(y), std::sin(p));
  b.right = Vector3d(std::sin(y), -std::cos(y), 0.0);
  b.up = b.right.cross(b.forward);
  return b;
}

double length_or_default(const geometry::ProportionSet& set, BodyPart part) {
  if (auto l = geometry::proportion_length(set, part)) return *l;
  return *geometry::proportion_length(geometry::default_proportions(), part);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

bool in_frame(const PixelPoint& p, const CameraIntrinsics& cam) {
  return p.u >= 0.0 && p.u < cam.image_width_px && p.v >= 0.0 && p.v < cam.image_height_px;
}

double hip_height(Posture posture, const BodyModel& body) {
  return posture == Posture::Standing ? body.hip_height_standing_mm : body.hip_height_sitting_mm;
}

}  // namespace

std::string_view to_string(Posture p) { return p == Posture::Standing ? "standing" : "sitting"; }

std::string_view to_string(RotationModel m) {
  return m == RotationModel::Foreshortened ? "foreshortened" : "perspective";
}

Posture parse_posture(std::string_view s) {
  if (s == "standing" || s == "Standing") return Posture::Standing;
  if (s == "sitting" || s == "Sitting") return Posture::Sitting;
  throw ConfigError(fmt::format("unknown posture '{}'", s));
}

RotationModel parse_rotation_model(std::string_view s) {
  if (s == "foreshortened") return RotationModel::Foreshortened;
  if (s == "perspective") return RotationModel::Perspective;
  throw ConfigError(fmt::format("unknown rotation model '{}'", s));
}

WorldPoint SimCamera::to_camera_frame(const Vector3d& world_mm) const {
  const CameraBasis b = basis(yaw_deg, pitch_deg);
  const Vector3d rel = world_mm - position_mm;
  return {-rel.dot(b.right), -rel.dot(b.up), -rel.dot(b.forward)};
}

SimCamera aim_camera(std::string tag, const Vector3d& position_mm, const Vector3d& target_mm,
                     const CameraIntrinsics& intrinsics, bool aim_pitch) {
  const Vector3d dir = target_mm - position_mm;
  SimCamera cam;
  cam.tag = std::move(tag);
  cam.position_mm = position_mm;
  cam.yaw_deg = std::atan2(dir.y(), dir.x()) / kDegToRad;
  cam.pitch_deg = aim_pitch ? std::atan2(dir.z(), std::hypot(dir.x(), dir.y())) / kDegToRad : 0.0;
  cam.intrinsics = intrinsics;
  return cam;
}

SyntheticScene synthesize_scene(const std::vector<SimPerson>& people, const SimCamera& camera,
                                const SceneOptions& options, std::string image_id) {
  camera.intrinsics.validate();
  if (!(camera.pitch_deg > -90.0 && camera.pitch_deg < 90.0)) {
    throw InvalidScene(fmt::format("camera pitch {} outside (-90, 90)", camera.pitch_deg));
  }
  const CameraIntrinsics& cam = camera.intrinsics;
  const CameraBasis b = basis(camera.yaw_deg, camera.pitch_deg);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> noise(0.0, options.noise_px > 0.0 ? options.noise_px : 1.0);

  SyntheticScene scene;
  scene.image_id = std::move(image_id);
  scene.camera = camera;

  for (const SimPerson& person : people) {
    if (!(person.theta_deg >= 0.0 && person.theta_deg < 90.0)) {
      throw InvalidScene(fmt::format("{}: orientation {} outside [0, 90)", person.tag, person.theta_deg));
    }
    const double torso = length_or_default(person.proportions, BodyPart::Torso);
    const double shoulders = length_or_default(person.proportions, BodyPart::Shoulders);
    const double pupils = length_or_default(person.proportions, BodyPart::Pupils);

    const double theta = person.theta_deg * kDegToRad;
    Vector3d lateral;
    if (options.rotation == RotationModel::Foreshortened) {
      lateral = std::cos(theta) * b.right;
    } else {
      lateral = Vector3d(b.right.x() * std::cos(theta) - b.right.y() * std::sin(theta),
                         b.right.x() * std::sin(theta) + b.right.y() * std::cos(theta), 0.0);
    }

    const Vector3d up(0.0, 0.0, 1.0);
    const Vector3d hip = person.position_mm + hip_height(person.posture, options.body) * up;
    const Vector3d neck = hip + torso * up;
    const Vector3d eyes = neck + options.body.eyes_above_neck_mm * up;
    const Vector3d head = neck + options.body.head_above_neck_mm * up;

    // BODY_25: 1 neck, 2 right shoulder, 5 left shoulder, 8 mid hip, 15 right eye, 16 left eye.
    // Facing the camera, the person's right side is on the camera's left.
    const std::array<std::pair<std::size_t, Vector3d>, 6> points = {{
        {1, neck},
        {2, neck - 0.5 * shoulders * lateral},
        {5, neck + 0.5 * shoulders * lateral},
        {8, hip},
        {15, eyes - 0.5 * pupils * lateral},
        {16, eyes + 0.5 * pupils * lateral},
    }};

    SimulatedPerson out;
    out.tag = person.tag;
    std::map<std::size_t, WorldPoint> camera_points;
    std::map<std::size_t, bool> visible;
    for (const auto& [index, world] : points) {
      const WorldPoint c = camera.to_camera_frame(world);
      if (!(c.z_mm < 0.0)) {
        throw InvalidScene(fmt::format("{}: keypoint {} is not in front of camera {}", person.tag, index, camera.tag));
      }
      camera_points[index] = c;
      const PixelPoint px = geometry::sensor_to_pixel(geometry::project(c, cam), cam);
      const bool shown = in_frame(px, cam);
      visible[index] = shown;
      if (!shown) continue;
      out.exact_skeleton.keypoints[index] = {px.u, px.v, options.keypoint_confidence};
      PixelPoint noisy = px;
      if (options.noise_px > 0.0) {
        noisy.u += noise(rng);
        noisy.v += noise(rng);
      }
      if (in_frame(noisy, cam)) out.skeleton.keypoints[index] = {noisy.u, noisy.v, options.keypoint_confidence};
    }

    for (BodyPart part : geometry::kAllBodyParts) {
      auto [i0, i1] = geometry::keypoint_indices(part);
      const WorldPoint& a = camera_points.at(i0);
      const WorldPoint& c = camera_points.at(i1);
      out.true_pair_midpoints[part] = {(a.x_mm + c.x_mm) / 2.0, (a.y_mm + c.y_mm) / 2.0, (a.z_mm + c.z_mm) / 2.0};
      if (visible.at(i0) && visible.at(i1)) {
        const auto& k0 = out.exact_skeleton.keypoints[i0];
        const auto& k1 = out.exact_skeleton.keypoints[i1];
        out.annotations[geometry::anchor_for(part)] = {(k0.u + k1.u) / 2.0, (k0.v + k1.v) / 2.0};
      }
    }
    const WorldPoint head_c = camera.to_camera_frame(head);
    if (!(head_c.z_mm < 0.0)) throw InvalidScene(person.tag + ": head is not in front of the camera");
    const PixelPoint head_px = geometry::sensor_to_pixel(geometry::project(head_c, cam), cam);
    if (in_frame(head_px, cam)) out.annotations[AnchorPart::Head] = head_px;

    scene.people.push_back(std::move(out));
  }

  for (std::size_t i = 0; i < people.size(); ++i) {
    for (std::size_t j = i + 1; j < people.size(); ++j) {
      scene.ground_truth_mm[dataset::make_tag_pair(people[i].tag, people[j].tag)] =
          (people[i].position_mm - people[j].position_mm).norm();
    }
  }
  return scene;
}

namespace {

Vector3d to_mm(const dataset::PointCm& p) { return Vector3d(p.x, p.y, p.z) * 10.0; }

Vector3d aim_target(const std::vector<SimPerson>& people, const BodyModel& body) {
  Vector3d centroid = Vector3d::Zero();
  for (const auto& p : people) {
    const double torso = length_or_default(p.proportions, BodyPart::Torso);
    centroid += p.position_mm + Vector3d(0, 0, hip_height(p.posture, body) + torso / 2.0);
  }
  return people.empty() ? centroid : Vector3d(centroid / static_cast<double>(people.size()));
}

}  // namespace

SyntheticScene replay_benchmark_layout(const dataset::GroundTruthScene& scene, const std::string& camera_tag,
                                       const CameraIntrinsics& intrinsics, const ReplayOptions& options) {
  auto cam_it = scene.cameras.find(camera_tag);
  if (cam_it == scene.cameras.end()) {
    throw DanglingReference(camera_tag, "photoshoot " + std::to_string(scene.photoshoot_id));
  }
  std::vector<SimPerson> people;
  for (const auto& [tag, pos] : scene.people) {
    SimPerson p;
    p.tag = tag;
    p.position_mm = to_mm(pos);
    p.posture = options.posture;
    people.push_back(std::move(p));
  }
  const Vector3d ground = to_mm(cam_it->second);
  const Vector3d centre = ground + Vector3d(0, 0, options.tripod_height_mm);
  const bool elevated = cam_it->second.z > 0.0;
  SimCamera camera = aim_camera(camera_tag, centre, aim_target(people, options.scene.body), intrinsics, elevated);
  if (options.pitch_deg) camera.pitch_deg = *options.pitch_deg;
  const std::string image =
      fmt::format("replay_ps{}_{}_{:g}mm.jpg", scene.photoshoot_id, camera_tag, intrinsics.focal_length_mm);
  return synthesize_scene(people, camera, options.scene, image);
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

Vector3d read_vec3(const json& j, const char* key, bool z_optional) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() < 2 || a.size() > 3 || (!z_optional && a.size() != 3)) {
    throw ConfigError(fmt::format("'{}' must be an array of {} numbers", key, z_optional ? "2 or 3" : "3"));
  }
  return Vector3d(a[0].get<double>(), a[1].get<double>(), a.size() == 3 ? a[2].get<double>() : 0.0);
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

geometry::ProportionSet read_proportions(const json& j) {
  geometry::ProportionSet set = geometry::default_proportions();
  for (auto& [name, value] : j.items()) {
    auto part = geometry::parse_body_part(name);
    if (!part) throw ConfigError(fmt::format("unknown body proportion '{}'", name));
    const double v = value.get<double>();
    if (!(v > 0.0)) throw ConfigError(fmt::format("proportion '{}' must be positive", name));
    for (auto& p : set) {
      if (p.part == *part) p.world_length_mm = v;
    }
  }
  return set;
}

}  // namespace

SimulationConfig SimulationConfig::from_json_text(const std::string& text) {
  SimulationConfig cfg;
  try {
    const json j = json::parse(text);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.noise_px = j.value("noise_px", 0.0);
    cfg.tripod_height_mm = j.value("tripod_height_mm", 1350.0);
    cfg.rotation = parse_rotation_model(j.value("rotation_model", std::string("foreshortened")));
    if (cfg.noise_px < 0.0) throw ConfigError("noise_px must be non-negative");
    for (const auto& ps : j.at("photoshoots")) {
      PhotoshootConfig shoot;
      shoot.id = ps.at("id").get<int>();
      shoot.setting = ps.value("setting", std::string());
      shoot.posture = parse_posture(ps.value("posture", std::string("standing")));
      for (const auto& pj : ps.at("people")) {
        SimPerson p;
        p.tag = pj.at("tag").get<std::string>();
        if (!dataset::is_person_tag(p.tag)) throw ConfigError("person tag '" + p.tag + "' must be P<int>");
        p.position_mm = read_vec3(pj, "position_cm", true) * 10.0;
        p.theta_deg = pj.value("theta_deg", 0.0);
        p.posture = pj.contains("posture") ? parse_posture(pj.at("posture").get<std::string>()) : shoot.posture;
        if (pj.contains("proportions")) p.proportions = read_proportions(pj.at("proportions"));
        shoot.people.push_back(std::move(p));
      }
      for (const auto& cj : ps.at("cameras")) {
        CameraConfig c;
        c.tag = cj.at("tag").get<std::string>();
        if (!dataset::is_camera_tag(c.tag)) throw ConfigError("camera tag '" + c.tag + "' must be C<int>");
        c.position_cm = read_vec3(cj, "position_cm", true);
        c.yaw_deg = optional_number(cj, "yaw_deg");
        c.pitch_deg = optional_number(cj, "pitch_deg");
        shoot.cameras.push_back(std::move(c));
      }
      for (const auto& sj : ps.at("shots")) {
        ShotConfig s;
        s.image = sj.at("image").get<std::string>();
        s.camera = sj.at("camera").get<std::string>();
        s.intrinsics.focal_length_mm = sj.at("focal_length_mm").get<double>();
        if (sj.contains("sensor_mm")) {
          s.intrinsics.sensor_width_mm = sj.at("sensor_mm").at(0).get<double>();
          s.intrinsics.sensor_height_mm = sj.at("sensor_mm").at(1).get<double>();
        }
        s.intrinsics.image_width_px = sj.at("resolution_px").at(0).get<int>();
        s.intrinsics.image_height_px = sj.at("resolution_px").at(1).get<int>();
        s.intrinsics.validate();
        s.noise_px = optional_number(sj, "noise_px");
        shoot.shots.push_back(std::move(s));
      }
      cfg.photoshoots.push_back(std::move(shoot));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene config: ") + e.what());
  }
  return cfg;
}

SimulationConfig SimulationConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

SimulationOutput simulate(const SimulationConfig& config, unsigned jobs) {
  struct Job {
    const PhotoshootConfig* shoot;
    const ShotConfig* shot;
  };
  std::vector<Job> work;
  SimulationOutput out;
  BodyModel body;

  for (const auto& shoot : config.photoshoots) {
    for (const auto& p : shoot.people) {
      out.rows.locations.push_back({0, shoot.id, p.tag,
                                    {p.position_mm.x() / 10.0, p.position_mm.y() / 10.0, p.position_mm.z() / 10.0}});
    }
    for (const auto& c : shoot.cameras) {
      out.rows.locations.push_back({0, shoot.id, c.tag, {c.position_cm.x(), c.position_cm.y(), c.position_cm.z()}});
    }
    for (const auto& s : shoot.shots) {
      out.rows.images.push_back({0, s.image, shoot.id, s.camera, shoot.setting});
      out.rows.intrinsics.push_back({0, s.image, s.intrinsics.focal_length_mm, s.intrinsics.sensor_width_mm,
                                     s.intrinsics.sensor_height_mm, s.intrinsics.image_width_px,
                                     s.intrinsics.image_height_px});
      work.push_back({&shoot, &s});
    }
  }

  out.shots.resize(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t k) {
    const PhotoshootConfig& shoot = *work[k].shoot;
    const ShotConfig& shot = *work[k].shot;
    const CameraConfig* cc = nullptr;
    for (const auto& c : shoot.cameras) {
      if (c.tag == shot.camera) cc = &c;
    }
    if (!cc) throw DanglingReference(shot.camera, shot.image);

    const Vector3d centre = cc->position_cm * 10.0 + Vector3d(0, 0, config.tripod_height_mm);
    const bool elevated = cc->position_cm.z() > 0.0;
    SimCamera camera = aim_camera(cc->tag, centre, aim_target(shoot.people, body), shot.intrinsics, elevated);
    if (cc->yaw_deg) camera.yaw_deg = *cc->yaw_deg;
    if (cc->pitch_deg) camera.pitch_deg = *cc->pitch_deg;

    SceneOptions opts;
    opts.noise_px = shot.noise_px.value_or(config.noise_px);
    opts.seed = splitmix64(config.seed ^ splitmix64(k));
    opts.rotation = config.rotation;
    opts.body = body;
    out.shots[k] = synthesize_scene(shoot.people, camera, opts, shot.image);
  });

  for (const auto& scene : out.shots) {
    for (const auto& person : scene.people) {
      for (const auto& [part, px] : person.annotations) {
        out.rows.bodyparts.push_back({0, scene.image_id, person.tag, std::string(geometry::to_string(part)), px.u, px.v});
      }
    }
  }
  return out;
}

}  // namespace socialdist::simulator
