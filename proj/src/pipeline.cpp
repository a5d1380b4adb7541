#include "socialdist/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "socialdist/csv.hpp"
#include "socialdist/dataset.hpp"
#include "socialdist/errors.hpp"
#include "socialdist/io.hpp"
#include "socialdist/parallel.hpp"
#include "socialdist/simulator.hpp"

namespace socialdist::pipeline {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
  }
}

geometry::BodyPart require_part(const std::string& name) {
  auto part = geometry::parse_body_part(name);
  if (!part) throw ConfigError("unknown body part '" + name + "' (expected torso, shoulders or pupils)");
  return *part;
}

geometry::ProportionSet ordered(std::map<geometry::BodyPart, double> lengths) {
  geometry::ProportionSet set;
  for (geometry::BodyPart part : geometry::kAllBodyParts) {
    if (auto it = lengths.find(part); it != lengths.end()) set.push_back({part, it->second});
  }
  return set;
}

double default_length(geometry::BodyPart part) {
  return *geometry::proportion_length(geometry::default_proportions(), part);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

dataset::LoadOptions load_options(const RunConfig& config) {
  dataset::LoadOptions opts;
  if (config.header_aliases) opts.aliases = dataset::HeaderAliases::from_json_file(*config.header_aliases);
  opts.intrinsics_path = config.intrinsics;
  return opts;
}

template <typename T>
T get_config(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Estimate:
      return "estimate";
    case Command::Evaluate:
      return "evaluate";
    case Command::Simulate:
      return "simulate";
    case Command::GtDistances:
      return "gt-distances";
    case Command::Report:
      return "report";
    case Command::Validate:
      return "validate";
    case Command::Audit:
      return "audit";
  }
  return "?";
}

MethodSource parse_method_source(const std::string& text) {
  const auto eq = text.find('=');
  if (eq != std::string::npos) {
    if (eq == 0 || eq + 1 == text.size()) throw ConfigError("detections '" + text + "' must be label=dir");
    return {text.substr(0, eq), fs::path(text.substr(eq + 1))};
  }
  fs::path dir(text);
  std::string label = dir.filename().string();
  if (label.empty() || label == ".") label = dir.parent_path().filename().string();
  if (label.empty()) label = "detections";
  return {label, dir};
}

geometry::ProportionSet parse_proportions(const std::string& text) {
  std::map<geometry::BodyPart, double> lengths;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    const auto part = require_part(item.substr(0, eq));
    lengths[part] = eq == std::string::npos ? default_length(part) : parse_double(item.substr(eq + 1), "proportions");
  }
  if (lengths.empty()) throw ConfigError("proportions: no body part given");
  return ordered(lengths);
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item, "thresholds"));
  return out;
}

std::vector<evaluation::GroupBy> parse_group_list(const std::string& text) {
  std::vector<evaluation::GroupBy> out;
  for (const auto& item : split(text, ',')) {
    auto g = evaluation::parse_group_by(item);
    if (!g) throw ConfigError("unknown group '" + item + "' (expected focal_length, setting, camera or photoshoot)");
    if (std::find(out.begin(), out.end(), *g) == out.end()) out.push_back(*g);
  }
  return out;
}

void RunConfig::validate(Command command) const {
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(fmt::format("{}: {} is required", to_string(command), what));
  };
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) throw ConfigError("confidence floor must be in [0, 1]");
  if (proportions.empty()) throw ConfigError("proportions: no body part given");
  for (const auto& p : proportions) {
    if (!(p.world_length_mm > 0.0)) {
      throw ConfigError(fmt::format("proportion for {} must be positive", geometry::to_string(p.part)));
    }
  }
  for (double t : thresholds_mm) {
    if (!(t > 0.0)) throw ConfigError("thresholds must be positive");
  }
  if (noise_px && !(*noise_px >= 0.0)) throw ConfigError("noise must be non-negative");

  switch (command) {
    case Command::Estimate:
      need(input.has_value(), "a skeleton directory");
      need(intrinsics.has_value(), "--intrinsics");
      break;
    case Command::Evaluate:
      need(annotations.has_value(), "--annotations");
      need(!detections.empty(), "--detections");
      need(!thresholds_mm.empty(), "--thresholds");
      for (std::size_t i = 0; i < detections.size(); ++i) {
        for (std::size_t j = i + 1; j < detections.size(); ++j) {
          if (detections[i].label == detections[j].label) {
            throw ConfigError("duplicate detections label '" + detections[i].label + "'");
          }
        }
      }
      break;
    case Command::Simulate:
    case Command::Report:
      need(input.has_value(), "an input file");
      break;
    case Command::GtDistances:
    case Command::Validate:
    case Command::Audit:
      need(annotations.has_value(), "--annotations");
      break;
  }
}

void apply_config(RunConfig& config, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "annotations", "detections", "intrinsics", "header_aliases", "input", "proportions", "confidence_floor",
      "group_by",    "thresholds_mm", "jobs",    "seed",           "noise_px", "out",       "filter"};
  for (auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  }
  if (doc.contains("annotations")) config.annotations = get_config<std::string>(doc, "annotations");
  if (doc.contains("intrinsics")) config.intrinsics = get_config<std::string>(doc, "intrinsics");
  if (doc.contains("header_aliases")) config.header_aliases = get_config<std::string>(doc, "header_aliases");
  if (doc.contains("input")) config.input = get_config<std::string>(doc, "input");
  if (doc.contains("out")) config.out = get_config<std::string>(doc, "out");
  if (doc.contains("detections")) {
    config.detections.clear();
    for (const auto& d : get_config<std::vector<std::string>>(doc, "detections")) {
      config.detections.push_back(parse_method_source(d));
    }
  }
  if (doc.contains("proportions")) {
    std::map<geometry::BodyPart, double> lengths;
    for (const auto& [name, mm] : get_config<std::map<std::string, double>>(doc, "proportions")) {
      lengths[require_part(name)] = mm;
    }
    config.proportions = ordered(lengths);
  }
  if (doc.contains("confidence_floor")) config.confidence_floor = get_config<double>(doc, "confidence_floor");
  if (doc.contains("group_by")) {
    std::string joined;
    for (const auto& g : get_config<std::vector<std::string>>(doc, "group_by")) joined += g + ",";
    config.group_by = parse_group_list(joined);
  }
  if (doc.contains("thresholds_mm")) config.thresholds_mm = get_config<std::vector<double>>(doc, "thresholds_mm");
  if (doc.contains("jobs")) config.jobs = get_config<unsigned>(doc, "jobs");
  if (doc.contains("seed")) config.seed = get_config<std::uint64_t>(doc, "seed");
  if (doc.contains("noise_px")) config.noise_px = get_config<double>(doc, "noise_px");
  if (doc.contains("filter")) {
    const json f = doc.at("filter");
    if (!f.is_object()) throw ConfigError("config key 'filter' must be an object");
    if (f.contains("camera")) config.filter.camera = get_config<std::string>(f, "camera");
    if (f.contains("setting")) config.filter.setting = get_config<std::string>(f, "setting");
    if (f.contains("photoshoot")) config.filter.photoshoot = get_config<int>(f, "photoshoot");
    if (f.contains("focal_length_mm")) config.filter.focal_length_mm = get_config<double>(f, "focal_length_mm");
  }
}

void apply_config_file(RunConfig& config, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  apply_config(config, doc);
}

void apply_environment(RunConfig& config) {
  if (config.annotations) return;
  if (const char* env = std::getenv(kDatasetEnvVar); env && *env) config.annotations = fs::path(env);
}

// ---------------------------------------------------------------------------

EstimateSummary run_estimate(const RunConfig& config) {
  config.validate(Command::Estimate);
  const dataset::HeaderAliases aliases =
      config.header_aliases ? dataset::HeaderAliases::from_json_file(*config.header_aliases) : dataset::HeaderAliases{};
  std::map<std::string, geometry::CameraIntrinsics> intrinsics;
  for (const auto& row : dataset::parse_intrinsics(*config.intrinsics, aliases)) {
    if (auto cam = row.intrinsics()) intrinsics[row.image] = *cam;
  }

  const auto files = io::list_json_files(*config.input);
  std::vector<io::SkeletonFile> skeletons;
  skeletons.reserve(files.size());
  for (const auto& f : files) skeletons.push_back(io::skeleton_from_json(io::read_json_file(f), f.stem().string()));
  std::sort(skeletons.begin(), skeletons.end(),
            [](const auto& a, const auto& b) { return a.image_id < b.image_id; });

  std::vector<std::string> missing;
  for (const auto& s : skeletons) {
    if (!intrinsics.contains(s.image_id)) missing.push_back(s.image_id);
  }
  if (!missing.empty()) throw MissingIntrinsics(missing);

  geometry::EstimatorOptions opts;
  opts.proportions = config.proportions;
  opts.confidence_floor = config.confidence_floor;

  struct Slot {
    std::vector<geometry::PersonEstimate> persons;
    std::vector<std::string> warnings;
  };
  std::vector<Slot> slots(skeletons.size());
  parallel_for(skeletons.size(), config.jobs, [&](std::size_t i) {
    const auto& file = skeletons[i];
    const auto& cam = intrinsics.at(file.image_id);
    for (std::size_t p = 0; p < file.people.size(); ++p) {
      try {
        slots[i].persons.push_back(geometry::estimate_person(file.people[p], cam, opts));
      } catch (const NoUsableKeypoints& e) {
        slots[i].warnings.push_back(fmt::format("{}: skeleton {} dropped: {}", file.image_id, p, e.what()));
      }
    }
    io::write_json_file(config.out / io::json_name_for(file.image_id),
                        io::estimate_to_json(file.image_id, slots[i].persons));
  });

  EstimateSummary summary;
  summary.images = skeletons.size();
  for (const auto& s : slots) {
    summary.persons += s.persons.size();
    summary.dropped += s.warnings.size();
    for (const auto& w : s.warnings) {
      spdlog::warn("{}", w);
      summary.warnings.push_back(w);
    }
  }
  return summary;
}

report::EvaluationReport run_evaluate(const RunConfig& config) {
  config.validate(Command::Evaluate);
  const dataset::Dataset ds = dataset::load_dataset(*config.annotations, load_options(config));

  report::EvaluationReport rep;
  rep.group_by = config.group_by;
  rep.thresholds_mm = config.thresholds_mm;
  for (const auto& source : config.detections) {
    const auto detections = io::read_detection_dir(source.dir);
    rep.methods.push_back(report::evaluate_method(source.label, evaluation::evaluate(ds, detections, config.jobs),
                                                  rep.group_by, rep.thresholds_mm));
  }

  io::write_json_file(config.out / "evaluation.json", report::to_json(rep));
  for (auto g : rep.group_by) {
    write_text(config.out / fmt::format("breakdown_{}.csv", evaluation::to_string(g)), report::breakdown_csv(rep, g));
  }
  write_text(config.out / "f1.csv", report::f1_csv(rep));
  write_text(config.out / "per_image.csv", report::per_image_csv(rep));
  return rep;
}

SimulateSummary run_simulate(const RunConfig& config) {
  config.validate(Command::Simulate);
  auto sim = simulator::SimulationConfig::from_file(*config.input);
  if (config.seed) sim.seed = *config.seed;
  if (config.noise_px) sim.noise_px = *config.noise_px;

  const auto output = simulator::simulate(sim, config.jobs);
  dataset::write_annotation_rows(config.out / "dataset", output.rows);

  SimulateSummary summary;
  summary.images = output.shots.size();
  csv::Writer gt({"image", "a", "b", "distance_mm"});
  parallel_for(output.shots.size(), config.jobs, [&](std::size_t k) {
    const auto& scene = output.shots[k];
    io::SkeletonFile skel{scene.image_id, {}};
    evaluation::DetectionInput truth;
    truth.image_id = scene.image_id;
    std::vector<std::string> tags;
    for (const auto& person : scene.people) {
      const bool any = std::any_of(person.skeleton.keypoints.begin(), person.skeleton.keypoints.end(),
                                   [](const geometry::Keypoint& kp) { return kp.confidence > 0.0; });
      if (any) skel.people.push_back(person.skeleton);
      if (person.detectable()) {
        truth.persons.push_back({person.annotations, std::nullopt});
        tags.push_back(person.tag);
      }
    }
    std::map<evaluation::IndexPair, double> distances;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      for (std::size_t j = i + 1; j < tags.size(); ++j) {
        distances[{i, j}] = scene.ground_truth_mm.at(dataset::make_tag_pair(tags[i], tags[j]));
      }
    }
    truth.distances_mm = std::move(distances);
    const std::string name = io::json_name_for(scene.image_id);
    io::write_json_file(config.out / "skeletons" / name, io::to_json(skel));
    io::write_json_file(config.out / "truth" / name, io::to_json(truth));
  });

  std::vector<std::size_t> order(output.shots.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return output.shots[a].image_id < output.shots[b].image_id; });
  for (std::size_t k : order) {
    const auto& scene = output.shots[k];
    std::set<std::string, dataset::TagLess> present;
    for (const auto& person : scene.people) {
      if (person.detectable()) present.insert(person.tag);
    }
    summary.people += present.size();
    for (const auto& [pair, mm] : scene.ground_truth_mm) {
      if (present.contains(pair.first) && present.contains(pair.second)) {
        gt.add_row({scene.image_id, pair.first, pair.second, csv::format_number(mm)});
      }
    }
  }
  gt.save(config.out / "ground_truth_distances.csv");
  return summary;
}

std::size_t run_gt_distances(const RunConfig& config) {
  config.validate(Command::GtDistances);
  const dataset::Dataset ds = dataset::load_dataset(*config.annotations, load_options(config));
  csv::Writer gt({"image", "a", "b", "distance_mm"});
  std::size_t n = 0;
  for (const auto& img : ds.images()) {
    const auto pairs = dataset::ground_truth_pairwise(ds.scene(img.photoshoot_id), ds.annotated_people(img.image_id));
    for (const auto& [pair, mm] : pairs) {
      gt.add_row({img.image_id, pair.first, pair.second, csv::format_number(mm)});
      ++n;
    }
  }
  gt.save(config.out / "ground_truth_distances.csv");
  return n;
}

report::EvaluationReport run_report(const RunConfig& config) {
  config.validate(Command::Report);
  auto rep = report::report_from_json(io::read_json_file(*config.input));
  if (!config.filter.empty()) rep = report::filter_report(rep, config.filter);

  write_text(config.out / "tables.md", report::render_markdown(rep));
  std::vector<evaluation::GroupBy> groups = rep.group_by;
  if (std::find(groups.begin(), groups.end(), evaluation::GroupBy::FocalLength) == groups.end()) {
    groups.insert(groups.begin(), evaluation::GroupBy::FocalLength);
  }
  for (auto g : groups) {
    write_text(config.out / fmt::format("breakdown_{}.csv", evaluation::to_string(g)), report::breakdown_csv(rep, g));
  }
  write_text(config.out / "f1.csv", report::f1_csv(rep));
  write_text(config.out / "error_series.csv", report::error_series_csv(report::error_series(rep)));
  return rep;
}

std::vector<dataset::Violation> run_validate(const RunConfig& config) {
  config.validate(Command::Validate);
  return dataset::validate_extension(dataset::read_annotation_rows(*config.annotations, load_options(config)));
}

json to_json(const dataset::DatasetAudit& a) {
  json settings = json::object();
  for (const auto& [s, n] : a.by_setting) settings[s.empty() ? "unspecified" : s] = n;
  json shoots = json::object();
  for (const auto& [id, n] : a.by_photoshoot) shoots[std::to_string(id)] = n;
  json focal = json::array();
  for (const auto& [key, n] : a.by_focal_and_setting) {
    focal.push_back({{"focal_length_mm", key.first}, {"setting", key.second}, {"images", n}});
  }
  json res = json::array();
  for (const auto& [wh, n] : a.by_resolution) {
    res.push_back({{"width_px", wh.first}, {"height_px", wh.second}, {"images", n}});
  }
  return {{"images", a.n_images},       {"by_setting", settings},  {"by_photoshoot", shoots},
          {"by_focal_and_setting", focal}, {"by_resolution", res}, {"missing_intrinsics", a.missing_intrinsics}};
}

dataset::DatasetAudit run_audit(const RunConfig& config) {
  config.validate(Command::Audit);
  const auto a = dataset::audit(dataset::load_dataset(*config.annotations, load_options(config)));
  io::write_json_file(config.out / "audit.json", to_json(a));
  return a;
}

}  // namespace socialdist::pipeline
