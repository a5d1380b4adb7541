#pragma once

// Evaluation reports: the JSON document written by `evaluate`, and the
// tables and data series rendered from it by `report`.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "socialdist/evaluation.hpp"

namespace socialdist::report {

using evaluation::BinaryScores;
using evaluation::DatasetEvaluation;
using evaluation::GroupBy;
using evaluation::GroupRow;
using evaluation::ImageEvaluation;

struct GroupTable {
  GroupBy group = GroupBy::FocalLength;
  std::vector<GroupRow> rows;
};

/// Results for one estimator variant (e.g. torso-only, combined).
struct MethodEvaluation {
  std::string name;
  DatasetEvaluation overall;
  std::vector<ImageEvaluation> per_image;
  std::vector<GroupTable> breakdowns;
  std::vector<BinaryScores> f1;
};

struct EvaluationReport {
  std::vector<GroupBy> group_by;
  std::vector<double> thresholds_mm;
  std::vector<MethodEvaluation> methods;
};

MethodEvaluation evaluate_method(std::string name, std::vector<ImageEvaluation> per_image,
                                 const std::vector<GroupBy>& group_by, const std::vector<double>& thresholds_mm);

nlohmann::json to_json(const EvaluationReport& report);

/// Restores per-image results and recomputes every summary from them.
EvaluationReport report_from_json(const nlohmann::json& j);

/// Keeps images matching every set field, then recomputes summaries.
struct ImageFilter {
  std::optional<std::string> camera;  // "photoshoot/camera", e.g. "0/C2"
  std::optional<std::string> setting;
  std::optional<int> photoshoot;
  std::optional<double> focal_length_mm;

  bool accepts(const ImageEvaluation& e) const;
  bool empty() const { return !camera && !setting && !photoshoot && !focal_length_mm; }
};

EvaluationReport filter_report(const EvaluationReport& report, const ImageFilter& filter);

/// Rows = focal lengths plus "All"; per method: detection rate and D_E.
std::string focal_length_table_markdown(const EvaluationReport& report, const std::string& title);
std::string f1_table_markdown(const EvaluationReport& report);
/// Full markdown document: overall table, one table per setting, F1 table.
std::string render_markdown(const EvaluationReport& report);

std::string breakdown_csv(const EvaluationReport& report, GroupBy group);
std::string f1_csv(const EvaluationReport& report);
std::string per_image_csv(const EvaluationReport& report);

struct SeriesPoint {
  std::string method;
  std::string image_id;
  std::string pair;
  double ground_truth_mm = 0.0;
  double estimated_mm = 0.0;
  double percent_error = 0.0;
  double signed_percent_error = 0.0;
};

/// Every matched pair, sorted ascending by ground-truth distance.
std::vector<SeriesPoint> error_series(const EvaluationReport& report);
std::string error_series_csv(const std::vector<SeriesPoint>& series);

}  // namespace socialdist::report
