#pragma once

// Benchmark annotation files and the ground truth derived from them.
//
// A dataset directory holds four CSV files (canonical headers shown):
//   bodyparts.csv   image,person,part,x,y           body-part pixel locations
//   locations.csv   photoshoot,tag,x,y,z            people/camera positions, cm
//   images.csv      image,photoshoot,camera[,setting]
//   intrinsics.csv  image,focal_length_mm,sensor_width_mm,sensor_height_mm,  (optional)
//                   image_width_px,image_height_px

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "socialdist/geometry.hpp"

namespace socialdist::dataset {

using geometry::AnchorPart;
using geometry::CameraIntrinsics;

/// Orders tags such as P2 < P10 by prefix letter then integer id.
struct TagLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

using TagPair = std::pair<std::string, std::string>;

struct TagPairLess {
  bool operator()(const TagPair& a, const TagPair& b) const;
};

using GroundTruthPairs = std::map<TagPair, double, TagPairLess>;

/// Ordered pair (a, b) with a before b under TagLess.
TagPair make_tag_pair(const std::string& a, const std::string& b);

bool is_person_tag(std::string_view tag);
bool is_camera_tag(std::string_view tag);

struct PointCm {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// ---------------------------------------------------------------------------
// Raw rows, one struct per CSV file
// ---------------------------------------------------------------------------

struct BodyPartRow {
  std::size_t line = 0;
  std::string image;
  std::string person;
  std::string part;  // validated against the four part names later
  double u = 0.0;
  double v = 0.0;
};

struct LocationRow {
  std::size_t line = 0;
  int photoshoot = 0;
  std::string tag;
  PointCm position;
};

struct ImageRow {
  std::size_t line = 0;
  std::string image;
  int photoshoot = 0;
  std::string camera;
  std::string setting;  // optional column; empty when absent
};

struct IntrinsicsRow {
  std::size_t line = 0;
  std::string image;
  std::optional<double> focal_length_mm;
  double sensor_width_mm = 36.0;
  double sensor_height_mm = 24.0;
  std::optional<int> image_width_px;
  std::optional<int> image_height_px;

  /// Intrinsics when every field is known and positive.
  std::optional<CameraIntrinsics> intrinsics() const;
};

struct AnnotationRows {
  std::vector<BodyPartRow> bodyparts;
  std::vector<LocationRow> locations;
  std::vector<ImageRow> images;
  std::vector<IntrinsicsRow> intrinsics;
};

// ---------------------------------------------------------------------------
// Validated dataset
// ---------------------------------------------------------------------------

struct BodyPartAnnotation {
  std::string image_id;
  std::string person_tag;
  AnchorPart part = AnchorPart::Torso;
  double u = 0.0;
  double v = 0.0;
};

struct GroundTruthScene {
  int photoshoot_id = 0;
  std::map<std::string, PointCm, TagLess> people;
  std::map<std::string, PointCm, TagLess> cameras;
};

struct ImageRecord {
  std::string image_id;
  int photoshoot_id = 0;
  std::string camera_tag;
  std::string setting;
  std::optional<CameraIntrinsics> intrinsics;
};

class Dataset {
 public:
  Dataset() = default;

  const std::map<int, GroundTruthScene>& scenes() const { return scenes_; }
  /// Images sorted by image id.
  const std::vector<ImageRecord>& images() const { return images_; }

  const ImageRecord* find_image(std::string_view image_id) const;
  const GroundTruthScene& scene(int photoshoot_id) const;
  const std::vector<BodyPartAnnotation>& annotations(std::string_view image_id) const;
  std::size_t annotation_count() const;

  /// Person tags annotated with at least one body part in the image.
  std::set<std::string, TagLess> annotated_people(std::string_view image_id) const;

  friend Dataset build_dataset(const AnnotationRows& rows);

 private:
  std::map<int, GroundTruthScene> scenes_;
  std::vector<ImageRecord> images_;
  std::map<std::string, std::vector<BodyPartAnnotation>, std::less<>> annotations_;
};

/// Header aliases: canonical column name -> name used in a particular file.
struct HeaderAliases {
  std::map<std::string, std::string> bodyparts;
  std::map<std::string, std::string> locations;
  std::map<std::string, std::string> images;
  std::map<std::string, std::string> intrinsics;

  /// Reads {"bodyparts": {"image": "Image name", ...}, ...}.
  static HeaderAliases from_json_file(const std::filesystem::path& path);
};

struct DatasetFiles {
  std::string bodyparts = "bodyparts.csv";
  std::string locations = "locations.csv";
  std::string images = "images.csv";
  std::string intrinsics = "intrinsics.csv";
};

struct LoadOptions {
  DatasetFiles files;
  HeaderAliases aliases;
  /// Overrides `files.intrinsics` when set (absolute or relative to cwd).
  std::optional<std::filesystem::path> intrinsics_path;
};

std::vector<BodyPartRow> parse_bodyparts(const std::filesystem::path& path, const HeaderAliases& aliases = {});
std::vector<LocationRow> parse_locations(const std::filesystem::path& path, const HeaderAliases& aliases = {});
std::vector<ImageRow> parse_images(const std::filesystem::path& path, const HeaderAliases& aliases = {});
std::vector<IntrinsicsRow> parse_intrinsics(const std::filesystem::path& path, const HeaderAliases& aliases = {});

AnnotationRows read_annotation_rows(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Cross-validates rows into a Dataset. Throws DanglingReference for unknown
/// tags or images and ParseError for rule-breaking rows.
Dataset build_dataset(const AnnotationRows& rows);

Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Writes the four CSV files with canonical headers.
void write_annotation_rows(const std::filesystem::path& dir, const AnnotationRows& rows,
                           const DatasetFiles& files = {});

/// Millimetre distances between all unordered pairs of `present`.
GroundTruthPairs ground_truth_pairwise(const GroundTruthScene& scene, const std::set<std::string, TagLess>& present);

enum class ViolationKind { NamingRule, DuplicateAnnotation, PhotoshootConsistency, MissingReference };

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind = ViolationKind::NamingRule;
  std::string message;
};

/// Checks new rows against the dataset extension rules, optionally together
/// with an existing dataset they extend. Violations are returned, not thrown.
std::vector<Violation> validate_extension(const AnnotationRows& new_rows, const Dataset* base = nullptr);

/// Counts used to audit a dataset against its published description.
struct DatasetAudit {
  std::size_t n_images = 0;
  std::map<std::string, std::size_t> by_setting;
  std::map<int, std::size_t> by_photoshoot;
  std::map<std::pair<double, std::string>, std::size_t> by_focal_and_setting;
  std::map<std::pair<int, int>, std::size_t> by_resolution;
  std::size_t missing_intrinsics = 0;
};

DatasetAudit audit(const Dataset& ds);

}  // namespace socialdist::dataset
