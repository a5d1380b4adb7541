#pragma once

// Batch commands behind the `socialdist` CLI. Every command reads its inputs,
// does per-image work on `jobs` threads and writes outputs in a fixed order,
// so the output tree does not depend on the thread count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "socialdist/evaluation.hpp"
#include "socialdist/geometry.hpp"
#include "socialdist/report.hpp"

namespace socialdist::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kDatasetEnvVar = "SOCIALDIST_DATASET";

enum class Command { Estimate, Evaluate, Simulate, GtDistances, Report, Validate, Audit };

std::string_view to_string(Command c);

struct MethodSource {
  std::string label;
  fs::path dir;
};

/// "label=dir" or a bare "dir", which is labelled by its last path component.
MethodSource parse_method_source(const std::string& text);

/// "torso=444,shoulders=389" or "torso". Only listed parts are used; a part
/// given without a length keeps its default length.
geometry::ProportionSet parse_proportions(const std::string& text);

std::vector<double> parse_thresholds(const std::string& text);
std::vector<evaluation::GroupBy> parse_group_list(const std::string& text);

struct RunConfig {
  std::optional<fs::path> annotations;
  std::vector<MethodSource> detections;
  std::optional<fs::path> intrinsics;
  std::optional<fs::path> header_aliases;
  std::optional<fs::path> input;  // skeleton dir, scene config or evaluation JSON
  geometry::ProportionSet proportions = geometry::default_proportions();
  double confidence_floor = geometry::kDefaultConfidenceFloor;
  std::vector<evaluation::GroupBy> group_by = {evaluation::GroupBy::FocalLength, evaluation::GroupBy::Setting,
                                               evaluation::GroupBy::Camera};
  std::vector<double> thresholds_mm = evaluation::kDefaultThresholdsMm;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_px;
  fs::path out = "out";
  report::ImageFilter filter;

  /// Throws ConfigError when a required field for `command` is missing or a
  /// value is out of range.
  void validate(Command command) const;
};

/// Overlays keys of a JSON config document onto `config`:
/// annotations, detections ([string]), intrinsics, header_aliases, input,
/// proportions ({part: mm}), confidence_floor, group_by ([string]),
/// thresholds_mm ([number]), jobs, seed, noise_px, out, and filter
/// ({camera, setting, photoshoot, focal_length_mm}).
void apply_config(RunConfig& config, const nlohmann::json& doc);
void apply_config_file(RunConfig& config, const fs::path& path);

/// Fills `annotations` from the environment variable when unset.
void apply_environment(RunConfig& config);

struct EstimateSummary {
  std::size_t images = 0;
  std::size_t persons = 0;
  std::size_t dropped = 0;  // skeletons without a usable pair
  std::vector<std::string> warnings;
};

/// input: skeleton JSON directory; intrinsics: intrinsics CSV.
/// Writes out/<stem>.json per skeleton file.
EstimateSummary run_estimate(const RunConfig& config);

/// Writes evaluation.json, breakdown_<group>.csv, f1.csv and per_image.csv.
report::EvaluationReport run_evaluate(const RunConfig& config);

struct SimulateSummary {
  std::size_t images = 0;
  std::size_t people = 0;
};

/// input: scene config. Writes out/dataset/*.csv, out/skeletons/*.json,
/// out/truth/*.json (perfect detections) and out/ground_truth_distances.csv.
SimulateSummary run_simulate(const RunConfig& config);

/// Ground-truth distances of every annotated image, one row per pair:
/// image,a,b,distance_mm. Written to out/ground_truth_distances.csv.
std::size_t run_gt_distances(const RunConfig& config);

/// input: evaluation JSON. Writes tables.md, breakdown CSVs, f1.csv and
/// error_series.csv after applying the filter.
report::EvaluationReport run_report(const RunConfig& config);

/// Extension-rule check of a dataset directory on its own.
std::vector<dataset::Violation> run_validate(const RunConfig& config);

/// Counts of the dataset's images, also written to out/audit.json.
dataset::DatasetAudit run_audit(const RunConfig& config);
nlohmann::json to_json(const dataset::DatasetAudit& a);

}  // namespace socialdist::pipeline
