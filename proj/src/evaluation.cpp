#include "socialdist/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "socialdist/errors.hpp"
#include "socialdist/parallel.hpp"

namespace socialdist::evaluation {

void DetectionInput::validate() const {
  for (std::size_t i = 0; i < persons.size(); ++i) {
    if (persons[i].anchors.empty()) {
      throw MalformedDetection(fmt::format("{}: person {} has no body-part anchors", image_id, i));
    }
  }
  const bool all_located =
      std::all_of(persons.begin(), persons.end(), [](const DetectedPerson& p) { return p.location.has_value(); });
  const bool any_located =
      std::any_of(persons.begin(), persons.end(), [](const DetectedPerson& p) { return p.location.has_value(); });
  if (distances_mm) {
    if (any_located) throw MalformedDetection(image_id + ": both locations and a distance map were given");
    for (std::size_t i = 0; i < persons.size(); ++i) {
      for (std::size_t j = i + 1; j < persons.size(); ++j) {
        if (!distances_mm->contains({i, j})) {
          throw MalformedDetection(fmt::format("{}: distance map lacks pair {}-{}", image_id, i, j));
        }
      }
    }
  } else if (!all_located && persons.size() > 1) {
    throw MalformedDetection(image_id + ": every person needs a location when no distance map is given");
  }
}

double DetectionInput::estimated_distance(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  if (distances_mm) {
    auto it = distances_mm->find({i, j});
    if (it == distances_mm->end()) throw MalformedDetection(fmt::format("{}: no distance for {}-{}", image_id, i, j));
    return it->second;
  }
  const auto& a = persons.at(i).location;
  const auto& b = persons.at(j).location;
  if (!a || !b) throw MalformedDetection(fmt::format("{}: no location for pair {}-{}", image_id, i, j));
  return geometry::pairwise_distance(*a, *b);
}

std::optional<double> anchor_distance(const DetectedPerson& det, std::span<const BodyPartAnnotation> person_parts) {
  std::optional<double> best;
  for (const auto& ann : person_parts) {
    auto it = det.anchors.find(ann.part);
    if (it == det.anchors.end()) continue;
    const double d = std::hypot(it->second.u - ann.u, it->second.v - ann.v);
    if (!best || d < *best) best = d;
  }
  return best;
}

MatchResult match_detections(const DetectionInput& det, std::span<const BodyPartAnnotation> annotations) {
  for (std::size_t i = 0; i < det.persons.size(); ++i) {
    if (det.persons[i].anchors.empty()) {
      throw MalformedDetection(fmt::format("{}: detection {} has no anchors", det.image_id, i));
    }
  }

  std::map<std::string, std::vector<BodyPartAnnotation>, dataset::TagLess> by_person;
  for (const auto& a : annotations) by_person[a.person_tag].push_back(a);

  struct Candidate {
    double distance;
    const std::string* tag;
    std::size_t detection;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < det.persons.size(); ++i) {
    for (const auto& [tag, parts] : by_person) {
      if (auto d = anchor_distance(det.persons[i], parts)) candidates.push_back({*d, &tag, i});
    }
  }
  dataset::TagLess tag_less;
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (*a.tag != *b.tag) return tag_less(*a.tag, *b.tag);
    return a.detection < b.detection;
  });

  MatchResult result;
  std::set<std::string> taken;
  for (const auto& c : candidates) {
    if (result.matches.contains(c.detection) || taken.contains(*c.tag)) continue;
    result.matches.emplace(c.detection, *c.tag);
    result.match_pixel_distance.emplace(c.detection, c.distance);
    taken.insert(*c.tag);
  }

  const bool surplus = det.persons.size() > by_person.size();
  for (std::size_t i = 0; i < det.persons.size(); ++i) {
    if (result.matches.contains(i)) continue;
    (surplus ? result.false_positives : result.unmatched).insert(i);
  }
  return result;
}

double PairError::abs_percent() const { return std::abs(signed_percent); }

ImageEvaluation image_error(const DetectionInput& det, const MatchResult& match, const GroundTruthPairs& gt_pairs) {
  ImageEvaluation e;
  e.image_id = det.image_id;
  e.n_matched = match.matches.size();
  e.n_false_positive = match.false_positives.size();
  e.n_detections = det.persons.size();
  e.matches = match.matches;

  std::vector<std::pair<std::size_t, std::string>> matched(match.matches.begin(), match.matches.end());
  for (std::size_t a = 0; a < matched.size(); ++a) {
    for (std::size_t b = a + 1; b < matched.size(); ++b) {
      const auto& [det_a, tag_a] = matched[a];
      const auto& [det_b, tag_b] = matched[b];
      const TagPair pair = dataset::make_tag_pair(tag_a, tag_b);
      auto gt = gt_pairs.find(pair);
      if (gt == gt_pairs.end()) throw DanglingReference(pair.first + "-" + pair.second, det.image_id);
      PairError pe;
      pe.pair = pair;
      pe.detections = pair.first == tag_a ? IndexPair{det_a, det_b} : IndexPair{det_b, det_a};
      pe.estimated_mm = det.estimated_distance(det_a, det_b);
      pe.ground_truth_mm = gt->second;
      pe.signed_percent = (pe.estimated_mm - pe.ground_truth_mm) / pe.ground_truth_mm * 100.0;
      e.pair_errors.push_back(pe);
    }
  }
  std::sort(e.pair_errors.begin(), e.pair_errors.end(),
            [](const PairError& x, const PairError& y) { return dataset::TagPairLess{}(x.pair, y.pair); });
  if (e.n_matched >= 2) {
    double sum = 0.0;
    for (const auto& pe : e.pair_errors) sum += pe.abs_percent();
    e.d_e = sum / static_cast<double>(e.pair_errors.size());
  }
  return e;
}

DatasetEvaluation aggregate(std::span<const ImageEvaluation> per_image) {
  if (per_image.empty()) throw EmptyEvaluation("no images to aggregate");
  DatasetEvaluation out;
  out.n_images = per_image.size();
  double de_sum = 0.0;
  double rate_sum = 0.0;
  std::size_t rate_n = 0;
  double fdr_sum = 0.0;
  for (const auto& e : per_image) {
    if (e.d_e) {
      de_sum += *e.d_e;
      ++out.n_images_scored;
    }
    if (e.n_ground_truth > 0) {
      rate_sum += static_cast<double>(e.n_matched) / static_cast<double>(e.n_ground_truth);
      ++rate_n;
    }
    const std::size_t scored_detections = e.n_matched + e.n_false_positive;
    if (scored_detections > 0) {
      fdr_sum += static_cast<double>(e.n_false_positive) / static_cast<double>(scored_detections);
    }
  }
  if (out.n_images_scored > 0) out.d_E = de_sum / static_cast<double>(out.n_images_scored);
  out.detection_rate = rate_n ? rate_sum / static_cast<double>(rate_n) : 0.0;
  out.false_discovery_rate = fdr_sum / static_cast<double>(out.n_images);
  return out;
}

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::FocalLength:
      return "focal_length";
    case GroupBy::Setting:
      return "setting";
    case GroupBy::Camera:
      return "camera";
    case GroupBy::Photoshoot:
      return "photoshoot";
  }
  return "?";
}

std::optional<GroupBy> parse_group_by(std::string_view name) {
  for (GroupBy g : {GroupBy::FocalLength, GroupBy::Setting, GroupBy::Camera, GroupBy::Photoshoot}) {
    if (to_string(g) == name) return g;
  }
  if (name == "focal") return GroupBy::FocalLength;
  if (name == "indoor-outdoor") return GroupBy::Setting;
  return std::nullopt;
}

std::string group_key(const ImageEvaluation& e, GroupBy g) {
  switch (g) {
    case GroupBy::FocalLength:
      return e.meta.focal_length_mm ? fmt::format("{:g}", *e.meta.focal_length_mm) : "unknown";
    case GroupBy::Setting:
      return e.meta.setting.empty() ? "unknown" : e.meta.setting;
    case GroupBy::Camera:
      return fmt::format("{}/{}", e.meta.photoshoot_id, e.meta.camera_tag);
    case GroupBy::Photoshoot:
      return std::to_string(e.meta.photoshoot_id);
  }
  return {};
}

std::vector<GroupRow> breakdown(std::span<const ImageEvaluation> per_image, GroupBy g) {
  std::map<std::string, std::vector<ImageEvaluation>> groups;
  for (const auto& e : per_image) groups[group_key(e, g)].push_back(e);
  std::vector<GroupRow> rows;
  for (auto& [key, images] : groups) rows.push_back({key, aggregate(images)});
  if (g == GroupBy::FocalLength || g == GroupBy::Photoshoot) {
    auto numeric = [](const std::string& k) {
      try {
        return std::stod(k);
      } catch (...) {
        return HUGE_VAL;
      }
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const GroupRow& a, const GroupRow& b) { return numeric(a.key) < numeric(b.key); });
  }
  return rows;
}

BinaryScores binary_classification(std::span<const ImageEvaluation> per_image, double threshold_mm) {
  BinaryScores s;
  s.threshold_mm = threshold_mm;
  for (const auto& e : per_image) {
    for (const auto& pe : e.pair_errors) {
      const bool predicted = pe.estimated_mm < threshold_mm;
      const bool actual = pe.ground_truth_mm < threshold_mm;
      if (predicted && actual) ++s.tp;
      else if (predicted) ++s.fp;
      else if (actual) ++s.fn;
      else ++s.tn;
    }
  }
  s.precision = (s.tp + s.fp) ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
  s.recall = (s.tp + s.fn) ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

ImageEvaluation evaluate_image(const DetectionInput& det, const dataset::Dataset& ds) {
  const dataset::ImageRecord* img = ds.find_image(det.image_id);
  if (!img) throw DanglingReference(det.image_id, "detections");
  det.validate();
  const auto& annotations = ds.annotations(det.image_id);
  const auto present = ds.annotated_people(det.image_id);
  const MatchResult match = match_detections(det, annotations);
  ImageEvaluation e = image_error(det, match, dataset::ground_truth_pairwise(ds.scene(img->photoshoot_id), present));
  e.n_ground_truth = present.size();
  e.meta.photoshoot_id = img->photoshoot_id;
  e.meta.camera_tag = img->camera_tag;
  e.meta.setting = img->setting;
  if (img->intrinsics) e.meta.focal_length_mm = img->intrinsics->focal_length_mm;
  return e;
}

std::vector<ImageEvaluation> evaluate(const dataset::Dataset& ds, std::span<const DetectionInput> detections,
                                      unsigned jobs) {
  std::map<std::string, const DetectionInput*, std::less<>> by_image;
  for (const auto& d : detections) {
    if (!ds.find_image(d.image_id)) throw DanglingReference(d.image_id, "detections");
    if (!by_image.emplace(d.image_id, &d).second) {
      throw MalformedDetection("two detection entries for image " + d.image_id);
    }
  }
  const auto& images = ds.images();
  std::vector<ImageEvaluation> out(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    auto it = by_image.find(images[i].image_id);
    if (it != by_image.end()) {
      out[i] = evaluate_image(*it->second, ds);
    } else {
      DetectionInput empty;
      empty.image_id = images[i].image_id;
      out[i] = evaluate_image(empty, ds);
    }
  });
  return out;
}

}  // namespace socialdist::evaluation
