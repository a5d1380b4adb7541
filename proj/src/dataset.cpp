#include "socialdist/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <tuple>

#include <fmt/format.h>
#include "json.hpp"

#include "socialdist/csv.hpp"
#include "socialdist/errors.hpp"

namespace socialdist::dataset {

namespace fs = std::filesystem;

namespace {

std::optional<long> tag_number(std::string_view tag) {
  if (tag.size() < 2) return std::nullopt;
  std::string_view digits = tag.substr(1);
  long value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value < 0) return std::nullopt;
  return value;
}

std::string alias(const std::map<std::string, std::string>& aliases, const std::string& canonical) {
  auto it = aliases.find(canonical);
  return it == aliases.end() ? canonical : it->second;
}

}  // namespace

bool TagLess::operator()(const std::string& a, const std::string& b) const {
  auto na = tag_number(a);
  auto nb = tag_number(b);
  if (na && nb && !a.empty() && !b.empty()) {
    if (a.front() != b.front()) return a.front() < b.front();
    if (*na != *nb) return *na < *nb;
  }
  return a < b;
}

bool TagPairLess::operator()(const TagPair& a, const TagPair& b) const {
  TagLess less;
  if (less(a.first, b.first)) return true;
  if (less(b.first, a.first)) return false;
  return less(a.second, b.second);
}

TagPair make_tag_pair(const std::string& a, const std::string& b) {
  return TagLess{}(b, a) ? TagPair{b, a} : TagPair{a, b};
}

bool is_person_tag(std::string_view tag) { return !tag.empty() && tag.front() == 'P' && tag_number(tag).has_value(); }
bool is_camera_tag(std::string_view tag) { return !tag.empty() && tag.front() == 'C' && tag_number(tag).has_value(); }

std::optional<CameraIntrinsics> IntrinsicsRow::intrinsics() const {
  if (!focal_length_mm || !image_width_px || !image_height_px) return std::nullopt;
  CameraIntrinsics cam{*focal_length_mm, sensor_width_mm, sensor_height_mm, *image_width_px, *image_height_px};
  if (!(cam.focal_length_mm > 0) || !(cam.sensor_width_mm > 0) || !(cam.sensor_height_mm > 0) ||
      cam.image_width_px <= 0 || cam.image_height_px <= 0) {
    return std::nullopt;
  }
  return cam;
}

// ---------------------------------------------------------------------------
// Dataset accessors
// ---------------------------------------------------------------------------

const ImageRecord* Dataset::find_image(std::string_view image_id) const {
  auto it = std::lower_bound(images_.begin(), images_.end(), image_id,
                             [](const ImageRecord& r, std::string_view id) { return r.image_id < id; });
  if (it == images_.end() || it->image_id != image_id) return nullptr;
  return &*it;
}

const GroundTruthScene& Dataset::scene(int photoshoot_id) const {
  auto it = scenes_.find(photoshoot_id);
  if (it == scenes_.end()) throw DanglingReference(std::to_string(photoshoot_id), "<photoshoot>");
  return it->second;
}

const std::vector<BodyPartAnnotation>& Dataset::annotations(std::string_view image_id) const {
  static const std::vector<BodyPartAnnotation> kEmpty;
  auto it = annotations_.find(image_id);
  return it == annotations_.end() ? kEmpty : it->second;
}

std::size_t Dataset::annotation_count() const {
  std::size_t n = 0;
  for (const auto& [_, v] : annotations_) n += v.size();
  return n;
}

std::set<std::string, TagLess> Dataset::annotated_people(std::string_view image_id) const {
  std::set<std::string, TagLess> out;
  for (const auto& a : annotations(image_id)) out.insert(a.person_tag);
  return out;
}

HeaderAliases HeaderAliases::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open header alias file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("header alias file " + path.string() + ": " + e.what());
  }
  HeaderAliases out;
  auto read = [&](const char* key, std::map<std::string, std::string>& dst) {
    if (!j.contains(key)) return;
    for (auto& [k, v] : j.at(key).items()) dst[k] = v.get<std::string>();
  };
  read("bodyparts", out.bodyparts);
  read("locations", out.locations);
  read("images", out.images);
  read("intrinsics", out.intrinsics);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

std::vector<BodyPartRow> parse_bodyparts(const fs::path& path, const HeaderAliases& aliases) {
  const csv::Table t = csv::read_file(path);
  std::vector<BodyPartRow> rows;
  if (t.header().empty()) return rows;
  const auto& a = aliases.bodyparts;
  const auto c_image = t.require_column(alias(a, "image"));
  const auto c_person = t.require_column(alias(a, "person"));
  const auto c_part = t.require_column(alias(a, "part"));
  const auto c_x = t.require_column(alias(a, "x"));
  const auto c_y = t.require_column(alias(a, "y"));
  for (const auto& r : t.rows()) {
    rows.push_back({r.line, std::string(t.field(r, c_image)), std::string(t.field(r, c_person)),
                    std::string(t.field(r, c_part)), t.number(r, c_x), t.number(r, c_y)});
  }
  return rows;
}

std::vector<LocationRow> parse_locations(const fs::path& path, const HeaderAliases& aliases) {
  const csv::Table t = csv::read_file(path);
  std::vector<LocationRow> rows;
  if (t.header().empty()) return rows;
  const auto& a = aliases.locations;
  const auto c_shoot = t.require_column(alias(a, "photoshoot"));
  const auto c_tag = t.require_column(alias(a, "tag"));
  const auto c_x = t.require_column(alias(a, "x"));
  const auto c_y = t.require_column(alias(a, "y"));
  const auto c_z = t.column(alias(a, "z"));
  for (const auto& r : t.rows()) {
    LocationRow row;
    row.line = r.line;
    row.photoshoot = static_cast<int>(t.integer(r, c_shoot));
    row.tag = std::string(t.field(r, c_tag));
    row.position = {t.number(r, c_x), t.number(r, c_y), t.optional_number(r, c_z).value_or(0.0)};
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ImageRow> parse_images(const fs::path& path, const HeaderAliases& aliases) {
  const csv::Table t = csv::read_file(path);
  std::vector<ImageRow> rows;
  if (t.header().empty()) return rows;
  const auto& a = aliases.images;
  const auto c_image = t.require_column(alias(a, "image"));
  const auto c_shoot = t.require_column(alias(a, "photoshoot"));
  const auto c_camera = t.require_column(alias(a, "camera"));
  const auto c_setting = t.column(alias(a, "setting"));
  for (const auto& r : t.rows()) {
    ImageRow row;
    row.line = r.line;
    row.image = std::string(t.field(r, c_image));
    row.photoshoot = static_cast<int>(t.integer(r, c_shoot));
    row.camera = std::string(t.field(r, c_camera));
    if (c_setting) row.setting = std::string(t.field(r, *c_setting));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<IntrinsicsRow> parse_intrinsics(const fs::path& path, const HeaderAliases& aliases) {
  const csv::Table t = csv::read_file(path);
  std::vector<IntrinsicsRow> rows;
  if (t.header().empty()) return rows;
  const auto& a = aliases.intrinsics;
  const auto c_image = t.require_column(alias(a, "image"));
  const auto c_f = t.column(alias(a, "focal_length_mm"));
  const auto c_sw = t.column(alias(a, "sensor_width_mm"));
  const auto c_sh = t.column(alias(a, "sensor_height_mm"));
  const auto c_w = t.column(alias(a, "image_width_px"));
  const auto c_h = t.column(alias(a, "image_height_px"));
  auto as_int = [&](const csv::Row& r, std::optional<std::size_t> c) -> std::optional<int> {
    auto v = t.optional_number(r, c);
    if (!v) return std::nullopt;
    if (*v != std::floor(*v)) throw ParseError(t.source(), r.line, "image size must be an integer pixel count");
    return static_cast<int>(*v);
  };
  for (const auto& r : t.rows()) {
    IntrinsicsRow row;
    row.line = r.line;
    row.image = std::string(t.field(r, c_image));
    row.focal_length_mm = t.optional_number(r, c_f);
    row.sensor_width_mm = t.optional_number(r, c_sw).value_or(36.0);
    row.sensor_height_mm = t.optional_number(r, c_sh).value_or(24.0);
    row.image_width_px = as_int(r, c_w);
    row.image_height_px = as_int(r, c_h);
    rows.push_back(std::move(row));
  }
  return rows;
}

AnnotationRows read_annotation_rows(const fs::path& dir, const LoadOptions& options) {
  AnnotationRows rows;
  rows.bodyparts = parse_bodyparts(dir / options.files.bodyparts, options.aliases);
  rows.locations = parse_locations(dir / options.files.locations, options.aliases);
  rows.images = parse_images(dir / options.files.images, options.aliases);
  if (options.intrinsics_path) {
    rows.intrinsics = parse_intrinsics(*options.intrinsics_path, options.aliases);
  } else if (fs::exists(dir / options.files.intrinsics)) {
    rows.intrinsics = parse_intrinsics(dir / options.files.intrinsics, options.aliases);
  }
  return rows;
}

Dataset build_dataset(const AnnotationRows& rows) {
  Dataset ds;

  for (const auto& row : rows.locations) {
    const bool person = is_person_tag(row.tag);
    if (!person && !is_camera_tag(row.tag)) {
      throw ParseError("locations", row.line, fmt::format("tag '{}' is neither P<int> nor C<int>", row.tag));
    }
    GroundTruthScene& scene = ds.scenes_[row.photoshoot];
    scene.photoshoot_id = row.photoshoot;
    auto& bucket = person ? scene.people : scene.cameras;
    if (!bucket.emplace(row.tag, row.position).second) {
      throw ParseError("locations", row.line,
                       fmt::format("tag '{}' repeated within photoshoot {}", row.tag, row.photoshoot));
    }
  }

  std::map<std::string, const IntrinsicsRow*, std::less<>> intrinsics;
  for (const auto& row : rows.intrinsics) intrinsics[row.image] = &row;

  for (const auto& row : rows.images) {
    auto scene = ds.scenes_.find(row.photoshoot);
    if (scene == ds.scenes_.end()) throw DanglingReference("photoshoot " + std::to_string(row.photoshoot), row.image);
    if (!scene->second.cameras.contains(row.camera)) throw DanglingReference(row.camera, row.image);
    ImageRecord rec{row.image, row.photoshoot, row.camera, row.setting, std::nullopt};
    if (auto it = intrinsics.find(row.image); it != intrinsics.end()) rec.intrinsics = it->second->intrinsics();
    ds.images_.push_back(std::move(rec));
  }
  std::sort(ds.images_.begin(), ds.images_.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  for (std::size_t i = 1; i < ds.images_.size(); ++i) {
    if (ds.images_[i].image_id == ds.images_[i - 1].image_id) {
      throw ParseError("images", 0, "image '" + ds.images_[i].image_id + "' listed twice");
    }
  }

  std::set<std::tuple<std::string, std::string, AnchorPart>> seen;
  for (const auto& row : rows.bodyparts) {
    const ImageRecord* img = ds.find_image(row.image);
    if (!img) throw DanglingReference(row.image, "bodyparts line " + std::to_string(row.line));
    if (!ds.scenes_.at(img->photoshoot_id).people.contains(row.person)) throw DanglingReference(row.person, row.image);
    auto part = geometry::parse_anchor_part(row.part);
    if (!part) {
      throw ParseError("bodyparts", row.line,
                       fmt::format("body part '{}' is not one of Eyes, Shoulder, Torso, Head", row.part));
    }
    if (!seen.emplace(row.image, row.person, *part).second) {
      throw ParseError("bodyparts", row.line,
                       fmt::format("duplicate {} annotation for {} in {}", row.part, row.person, row.image));
    }
    ds.annotations_[row.image].push_back({row.image, row.person, *part, row.u, row.v});
  }
  return ds;
}

Dataset load_dataset(const fs::path& dir, const LoadOptions& options) {
  return build_dataset(read_annotation_rows(dir, options));
}

void write_annotation_rows(const fs::path& dir, const AnnotationRows& rows, const DatasetFiles& files) {
  using csv::format_number;
  csv::Writer bodyparts({"image", "person", "part", "x", "y"});
  for (const auto& r : rows.bodyparts) {
    bodyparts.add_row({r.image, r.person, r.part, format_number(r.u), format_number(r.v)});
  }
  csv::Writer locations({"photoshoot", "tag", "x", "y", "z"});
  for (const auto& r : rows.locations) {
    locations.add_row({std::to_string(r.photoshoot), r.tag, format_number(r.position.x), format_number(r.position.y),
                       format_number(r.position.z)});
  }
  csv::Writer images({"image", "photoshoot", "camera", "setting"});
  for (const auto& r : rows.images) images.add_row({r.image, std::to_string(r.photoshoot), r.camera, r.setting});
  csv::Writer intrinsics(
      {"image", "focal_length_mm", "sensor_width_mm", "sensor_height_mm", "image_width_px", "image_height_px"});
  for (const auto& r : rows.intrinsics) {
    intrinsics.add_row({r.image, r.focal_length_mm ? format_number(*r.focal_length_mm) : "",
                        format_number(r.sensor_width_mm), format_number(r.sensor_height_mm),
                        r.image_width_px ? std::to_string(*r.image_width_px) : "",
                        r.image_height_px ? std::to_string(*r.image_height_px) : ""});
  }
  fs::create_directories(dir);
  bodyparts.save(dir / files.bodyparts);
  locations.save(dir / files.locations);
  images.save(dir / files.images);
  intrinsics.save(dir / files.intrinsics);
}

GroundTruthPairs ground_truth_pairwise(const GroundTruthScene& scene, const std::set<std::string, TagLess>& present) {
  std::vector<std::pair<std::string, PointCm>> people;
  for (const auto& tag : present) {
    auto it = scene.people.find(tag);
    if (it == scene.people.end()) throw DanglingReference(tag, "photoshoot " + std::to_string(scene.photoshoot_id));
    people.emplace_back(tag, it->second);
  }
  GroundTruthPairs out;
  for (std::size_t i = 0; i < people.size(); ++i) {
    for (std::size_t j = i + 1; j < people.size(); ++j) {
      const PointCm& a = people[i].second;
      const PointCm& b = people[j].second;
      const double cm = std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
      out[make_tag_pair(people[i].first, people[j].first)] = cm * 10.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extension rules
// ---------------------------------------------------------------------------

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::NamingRule:
      return "NamingRule";
    case ViolationKind::DuplicateAnnotation:
      return "DuplicateAnnotation";
    case ViolationKind::PhotoshootConsistency:
      return "PhotoshootConsistency";
    case ViolationKind::MissingReference:
      return "MissingReference";
  }
  return "?";
}

std::vector<Violation> validate_extension(const AnnotationRows& new_rows, const Dataset* base) {
  std::vector<Violation> out;
  auto add = [&out](ViolationKind kind, std::string msg) { out.push_back({kind, std::move(msg)}); };

  // (photoshoot, tag) -> position, seeded from the base dataset.
  std::map<std::pair<int, std::string>, PointCm> tags;
  std::map<std::string, std::pair<int, std::string>> image_shoot;
  if (base) {
    for (const auto& [id, scene] : base->scenes()) {
      for (const auto& [tag, p] : scene.people) tags[{id, tag}] = p;
      for (const auto& [tag, p] : scene.cameras) tags[{id, tag}] = p;
    }
    for (const auto& img : base->images()) image_shoot[img.image_id] = {img.photoshoot_id, img.camera_tag};
  }

  for (const auto& row : new_rows.locations) {
    if (!is_person_tag(row.tag) && !is_camera_tag(row.tag)) {
      add(ViolationKind::NamingRule,
          fmt::format("line {}: tag '{}' must be P or C followed by an integer", row.line, row.tag));
      continue;
    }
    auto [it, inserted] = tags.emplace(std::pair{row.photoshoot, row.tag}, row.position);
    if (!inserted) {
      const PointCm& p = it->second;
      const bool same = p.x == row.position.x && p.y == row.position.y && p.z == row.position.z;
      add(ViolationKind::PhotoshootConsistency,
          fmt::format("line {}: tag '{}' already defined in photoshoot {}{}", row.line, row.tag, row.photoshoot,
                      same ? "" : " at a different position"));
    }
  }

  for (const auto& row : new_rows.images) {
    if (!is_camera_tag(row.camera)) {
      add(ViolationKind::NamingRule, fmt::format("line {}: camera tag '{}' must be C<int>", row.line, row.camera));
    } else if (!tags.contains({row.photoshoot, row.camera})) {
      add(ViolationKind::MissingReference,
          fmt::format("line {}: camera {} not defined in photoshoot {}", row.line, row.camera, row.photoshoot));
    }
    auto [it, inserted] = image_shoot.emplace(row.image, std::pair{row.photoshoot, row.camera});
    if (!inserted) {
      add(ViolationKind::PhotoshootConsistency, fmt::format("line {}: image '{}' already assigned to photoshoot {}",
                                                            row.line, row.image, it->second.first));
    }
  }

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  if (base) {
    for (const auto& img : base->images()) {
      for (const auto& a : base->annotations(img.image_id)) {
        seen.emplace(a.image_id, a.person_tag, std::string(geometry::to_string(a.part)));
      }
    }
  }
  for (const auto& row : new_rows.bodyparts) {
    if (!geometry::parse_anchor_part(row.part)) {
      add(ViolationKind::NamingRule,
          fmt::format("line {}: body part '{}' must be Eyes, Shoulder, Torso or Head", row.line, row.part));
    }
    if (!is_person_tag(row.person)) {
      add(ViolationKind::NamingRule, fmt::format("line {}: person tag '{}' must be P<int>", row.line, row.person));
    }
    if (!seen.emplace(row.image, row.person, row.part).second) {
      add(ViolationKind::DuplicateAnnotation,
          fmt::format("line {}: second {} annotation for {} in {}", row.line, row.part, row.person, row.image));
    }
    auto img = image_shoot.find(row.image);
    if (img == image_shoot.end()) {
      add(ViolationKind::MissingReference, fmt::format("line {}: image '{}' has no photoshoot row", row.line, row.image));
    } else if (is_person_tag(row.person) && !tags.contains({img->second.first, row.person})) {
      add(ViolationKind::MissingReference, fmt::format("line {}: person {} not defined in photoshoot {}", row.line,
                                                       row.person, img->second.first));
    }
  }
  return out;
}

DatasetAudit audit(const Dataset& ds) {
  DatasetAudit a;
  a.n_images = ds.images().size();
  for (const auto& img : ds.images()) {
    ++a.by_setting[img.setting];
    ++a.by_photoshoot[img.photoshoot_id];
    if (img.intrinsics) {
      ++a.by_focal_and_setting[{img.intrinsics->focal_length_mm, img.setting}];
      ++a.by_resolution[{img.intrinsics->image_width_px, img.intrinsics->image_height_px}];
    } else {
      ++a.missing_intrinsics;
    }
  }
  return a;
}

}  // namespace socialdist::dataset
