#pragma once

// Benchmark evaluation protocol: thresholdless greedy matching of detections
// to annotated people through body-part pixel anchors, per-image pair-wise
// percentual distance error (D_e), its dataset average (D_E), person
// detection rate, false discovery rate, and the safe-distance binary
// classification scores.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "socialdist/dataset.hpp"
#include "socialdist/geometry.hpp"

namespace socialdist::evaluation {

using dataset::BodyPartAnnotation;
using dataset::TagPair;
using geometry::AnchorPart;
using geometry::PixelPoint;
using geometry::WorldPoint;

struct DetectedPerson {
  std::map<AnchorPart, PixelPoint> anchors;
  std::optional<WorldPoint> location;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

/// What an estimator reports for one image: anchors for every person plus
/// either a location per person or a full pair-wise distance map.
struct DetectionInput {
  std::string image_id;
  std::vector<DetectedPerson> persons;
  std::optional<std::map<IndexPair, double>> distances_mm;  // keys (i, j) with i < j

  /// Throws MalformedDetection when a person has no anchors or when neither
  /// (or both) of the location/distance forms is complete.
  void validate() const;

  /// Estimated distance between persons i and j in millimetres.
  double estimated_distance(std::size_t i, std::size_t j) const;
};

struct MatchResult {
  std::map<std::size_t, std::string> matches;  // detection index -> person tag
  std::map<std::size_t, double> match_pixel_distance;
  std::set<std::size_t> false_positives;
  // Detections left over while annotated people remain free, because they
  // share no anchor part with any of them. Not counted as false positives.
  std::set<std::size_t> unmatched;
};

/// Pixel distance from a detection to an annotated person: the minimum over
/// the detection's anchors of the distance to the same annotated part.
/// Empty when they share no part.
std::optional<double> anchor_distance(const DetectedPerson& det, std::span<const BodyPartAnnotation> person_parts);

/// Greedy nearest-first matching with no distance threshold. Candidate pairs
/// are taken in order of (pixel distance, person tag, detection index).
MatchResult match_detections(const DetectionInput& det, std::span<const BodyPartAnnotation> annotations);

struct PairError {
  TagPair pair;
  IndexPair detections;
  double estimated_mm = 0.0;
  double ground_truth_mm = 0.0;
  double signed_percent = 0.0;  // (est - gt) / gt * 100

  double abs_percent() const;
};

struct ImageMeta {
  int photoshoot_id = 0;
  std::string camera_tag;
  std::string setting;
  std::optional<double> focal_length_mm;
};

struct ImageEvaluation {
  std::string image_id;
  ImageMeta meta;
  std::size_t n_matched = 0;
  std::size_t n_ground_truth = 0;
  std::size_t n_false_positive = 0;
  std::size_t n_detections = 0;
  std::optional<double> d_e;  // present iff n_matched >= 2
  std::vector<PairError> pair_errors;
  std::map<std::size_t, std::string> matches;
};

using dataset::GroundTruthPairs;

/// Mean relative pair-distance error over all matched pairs, using |est - gt| / gt.
/// Throws DanglingReference when a matched pair has no ground truth.
ImageEvaluation image_error(const DetectionInput& det, const MatchResult& match, const GroundTruthPairs& gt_pairs);

struct DatasetEvaluation {
  std::optional<double> d_E;  // absent when no image has two matches
  double detection_rate = 0.0;
  double false_discovery_rate = 0.0;
  std::size_t n_images = 0;
  std::size_t n_images_scored = 0;
};

/// Averages per-image results. Throws EmptyEvaluation for an empty list.
DatasetEvaluation aggregate(std::span<const ImageEvaluation> per_image);

enum class GroupBy { FocalLength, Setting, Camera, Photoshoot };

std::string_view to_string(GroupBy g);
std::optional<GroupBy> parse_group_by(std::string_view name);

/// Group key for one image under `g`; cameras are qualified by photoshoot.
std::string group_key(const ImageEvaluation& e, GroupBy g);

struct GroupRow {
  std::string key;
  DatasetEvaluation summary;
};

/// Aggregates per group; rows sorted by key (numerically for focal lengths).
std::vector<GroupRow> breakdown(std::span<const ImageEvaluation> per_image, GroupBy g);

struct BinaryScores {
  double threshold_mm = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Unsafe (distance < threshold) is the positive class. Undefined ratios are 0.
BinaryScores binary_classification(std::span<const ImageEvaluation> per_image, double threshold_mm);

inline const std::vector<double> kDefaultThresholdsMm = {1000.0, 1500.0, 2000.0, 3000.0};

/// Matches and scores one image against the dataset's annotations.
ImageEvaluation evaluate_image(const DetectionInput& det, const dataset::Dataset& ds);

/// Evaluates every image of `ds`. Images without a detection entry count as
/// having zero detections; a detection for an unknown image throws
/// DanglingReference. Results are in image-id order for any `jobs`.
std::vector<ImageEvaluation> evaluate(const dataset::Dataset& ds, std::span<const DetectionInput> detections,
                                      unsigned jobs = 1);

}  // namespace socialdist::evaluation
