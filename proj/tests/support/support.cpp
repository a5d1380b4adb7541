#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <fstream>
#include <functional>
#include <sstream>
#include <limits>

#include "socialdist/dataset.hpp"
#include "socialdist/errors.hpp"
#include <random>

namespace socialdist::testing {

using geometry::AnchorPart;
using geometry::CameraIntrinsics;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("socialdist_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path data_dir() { return SOCIALDIST_DATA_DIR; }

CameraIntrinsics benchmark_camera(double focal_mm, bool mark_ii) {
  CameraIntrinsics c;
  c.focal_length_mm = focal_mm;
  c.sensor_width_mm = 36.0;
  c.sensor_height_mm = 24.0;
  c.image_width_px = mark_ii ? 4080 : 4180;
  c.image_height_px = mark_ii ? 2720 : 2768;
  return c;
}

simulator::SyntheticScene random_scene(std::mt19937_64& rng, const RandomSceneOptions& opts,
                                       std::vector<simulator::SimPerson>* layout) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double focal = opts.min_focal_mm + (opts.max_focal_mm - opts.min_focal_mm) * unit(rng);
  const auto cam = benchmark_camera(focal, unit(rng) < 0.5);

  simulator::SimCamera camera;
  camera.tag = "C0";
  camera.position_mm = {0.0, 0.0, 1350.0};
  camera.yaw_deg = 90.0;
  camera.pitch_deg = 0.0;
  camera.intrinsics = cam;

  // Standing body spans z in [1000, 1674] mm; it stays in frame when the
  // vertical half field of view at depth d exceeds 350 mm with margin.
  const double half_h = 0.5 * cam.sensor_height_mm / focal;
  const double half_w = 0.5 * cam.sensor_width_mm / focal;
  const double d_min = 400.0 / (0.85 * half_h);
  std::uniform_int_distribution<std::size_t> count(opts.min_people, opts.max_people);
  const std::size_t n = count(rng);

  std::vector<simulator::SimPerson> people;
  for (std::size_t i = 0; i < n; ++i) {
    const double depth = d_min * (1.0 + 2.0 * unit(rng));
    const double reach = 0.85 * half_w * depth - 250.0;
    const double x = (2.0 * unit(rng) - 1.0) * std::max(reach, 0.0);
    simulator::SimPerson p;
    p.tag = "P" + std::to_string(i);
    p.position_mm = {x, depth, 0.0};
    people.push_back(p);
  }
  simulator::SceneOptions so;
  so.noise_px = opts.noise_px;
  so.seed = rng();
  if (layout) *layout = people;
  return simulator::synthesize_scene(people, camera, so, "random.jpg");
}

std::vector<dataset::BodyPartAnnotation> scene_annotations(const simulator::SyntheticScene& scene) {
  std::vector<dataset::BodyPartAnnotation> out;
  for (const auto& p : scene.people) {
    for (const auto& [part, px] : p.annotations) out.push_back({scene.image_id, p.tag, part, px.u, px.v});
  }
  return out;
}

evaluation::DetectionInput estimate_scene(const simulator::SyntheticScene& scene, const geometry::EstimatorOptions& opts,
                                          bool use_noisy) {
  evaluation::DetectionInput det;
  det.image_id = scene.image_id;
  for (const auto& p : scene.people) {
    try {
      const auto est = geometry::estimate_person(use_noisy ? p.skeleton : p.exact_skeleton, scene.camera.intrinsics, opts);
      if (est.anchors.empty()) continue;
      det.persons.push_back({est.anchors, est.location});
    } catch (const InputError&) {
    }
  }
  return det;
}

evaluation::ImageEvaluation score_scene(const simulator::SyntheticScene& scene, const evaluation::DetectionInput& det) {
  const auto annotations = scene_annotations(scene);
  const auto match = evaluation::match_detections(det, annotations);
  auto e = evaluation::image_error(det, match, scene.ground_truth_mm);
  std::set<std::string> present;
  for (const auto& a : annotations) present.insert(a.person_tag);
  e.n_ground_truth = present.size();
  return e;
}

std::optional<double> brute_force_d_e(const std::vector<std::optional<std::tuple<double, double, double>>>& est,
                                      const std::map<std::size_t, std::string>& matches,
                                      const std::map<std::string, std::tuple<double, double, double>>& gt) {
  std::vector<std::pair<std::size_t, std::string>> m(matches.begin(), matches.end());
  const std::size_t n = m.size();
  if (n < 2) return std::nullopt;
  auto dist = [](const std::tuple<double, double, double>& a, const std::tuple<double, double, double>& b) {
    const double dx = std::get<0>(a) - std::get<0>(b);
    const double dy = std::get<1>(a) - std::get<1>(b);
    const double dz = std::get<2>(a) - std::get<2>(b);
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double e = dist(*est[m[i].first], *est[m[j].first]);
      const double g = dist(gt.at(m[i].second), gt.at(m[j].second));
      sum += std::abs(e - g) / g * 100.0;
      ++pairs;
    }
  }
  // Binomial denominator n(n-1)/2.
  return sum / static_cast<double>(n * (n - 1) / 2);
}

namespace {

struct Edge {
  double dist;
  std::size_t person;  // index into people sorted by tag
  std::size_t det;
};

bool edge_less(const Edge& a, const Edge& b) {
  return std::tie(a.dist, a.person, a.det) < std::tie(b.dist, b.person, b.det);
}

}  // namespace

std::map<std::size_t, std::string> exhaustive_nearest_first(const std::vector<ToyDetection>& dets,
                                                            const std::vector<ToyPerson>& people_in) {
  std::vector<ToyPerson> people = people_in;
  std::sort(people.begin(), people.end(),
            [](const ToyPerson& a, const ToyPerson& b) { return dataset::TagLess{}(a.tag, b.tag); });

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> w(dets.size(), std::vector<double>(people.size(), inf));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t p = 0; p < people.size(); ++p) {
      for (const auto& [part, px] : dets[d].anchors) {
        auto it = people[p].parts.find(part);
        if (it == people[p].parts.end()) continue;
        w[d][p] = std::min(w[d][p], std::hypot(px.u - it->second.u, px.v - it->second.v));
      }
    }
  }

  std::vector<Edge> best;
  bool have_best = false;
  std::vector<int> assign(dets.size(), -1);
  std::vector<bool> used(people.size(), false);

  auto is_maximal = [&] {
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (assign[d] >= 0) continue;
      for (std::size_t p = 0; p < people.size(); ++p) {
        if (!used[p] && w[d][p] < inf) return false;
      }
    }
    return true;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == dets.size()) {
      if (!is_maximal()) return;
      std::vector<Edge> edges;
      for (std::size_t k = 0; k < dets.size(); ++k) {
        if (assign[k] >= 0) edges.push_back({w[k][assign[k]], static_cast<std::size_t>(assign[k]), k});
      }
      std::sort(edges.begin(), edges.end(), edge_less);
      // A longer list wins when one is a prefix of the other.
      const bool better = !have_best || std::lexicographical_compare(edges.begin(), edges.end(), best.begin(),
                                                                     best.end(), edge_less) ||
                          (edges.size() > best.size() &&
                           std::equal(best.begin(), best.end(), edges.begin(), [](const Edge& a, const Edge& b) {
                             return !edge_less(a, b) && !edge_less(b, a);
                           }));
      if (better) {
        best = edges;
        have_best = true;
      }
      return;
    }
    rec(d + 1);
    for (std::size_t p = 0; p < people.size(); ++p) {
      if (used[p] || w[d][p] == inf) continue;
      used[p] = true;
      assign[d] = static_cast<int>(p);
      rec(d + 1);
      assign[d] = -1;
      used[p] = false;
    }
  };
  rec(0);

  std::map<std::size_t, std::string> out;
  for (const auto& e : best) out[e.det] = people[e.person].tag;
  return out;
}

}  // namespace socialdist::testing
