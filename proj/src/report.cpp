#include "socialdist/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "socialdist/csv.hpp"
#include "socialdist/errors.hpp"

namespace socialdist::report {

using nlohmann::json;
using evaluation::PairError;

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json summary_json(const DatasetEvaluation& s) {
  return {{"d_E", optional_json(s.d_E)},
          {"detection_rate", s.detection_rate},
          {"false_discovery_rate", s.false_discovery_rate},
          {"n_images", s.n_images},
          {"n_images_scored", s.n_images_scored}};
}

json image_json(const ImageEvaluation& e) {
  json matches = json::object();
  for (const auto& [det, tag] : e.matches) matches[std::to_string(det)] = tag;
  json pairs = json::array();
  for (const auto& p : e.pair_errors) {
    pairs.push_back({{"a", p.pair.first},
                     {"b", p.pair.second},
                     {"det_a", p.detections.first},
                     {"det_b", p.detections.second},
                     {"estimated_mm", p.estimated_mm},
                     {"ground_truth_mm", p.ground_truth_mm},
                     {"signed_percent", p.signed_percent}});
  }
  return {{"image", e.image_id},
          {"photoshoot", e.meta.photoshoot_id},
          {"camera", e.meta.camera_tag},
          {"setting", e.meta.setting},
          {"focal_length_mm", optional_json(e.meta.focal_length_mm)},
          {"n_matched", e.n_matched},
          {"n_ground_truth", e.n_ground_truth},
          {"n_false_positive", e.n_false_positive},
          {"n_detections", e.n_detections},
          {"d_e", optional_json(e.d_e)},
          {"matches", matches},
          {"pairs", pairs}};
}

ImageEvaluation image_from(const json& j) {
  ImageEvaluation e;
  e.image_id = j.at("image").get<std::string>();
  e.meta.photoshoot_id = j.value("photoshoot", 0);
  e.meta.camera_tag = j.value("camera", std::string());
  e.meta.setting = j.value("setting", std::string());
  e.meta.focal_length_mm = optional_from(j, "focal_length_mm");
  e.n_matched = j.at("n_matched").get<std::size_t>();
  e.n_ground_truth = j.at("n_ground_truth").get<std::size_t>();
  e.n_false_positive = j.at("n_false_positive").get<std::size_t>();
  e.n_detections = j.value("n_detections", e.n_matched + e.n_false_positive);
  e.d_e = optional_from(j, "d_e");
  const json matches = j.value("matches", json::object());
  for (auto& [k, v] : matches.items()) e.matches[std::stoul(k)] = v.get<std::string>();
  for (const auto& pj : j.value("pairs", json::array())) {
    PairError p;
    p.pair = {pj.at("a").get<std::string>(), pj.at("b").get<std::string>()};
    p.detections = {pj.value("det_a", std::size_t{0}), pj.value("det_b", std::size_t{0})};
    p.estimated_mm = pj.at("estimated_mm").get<double>();
    p.ground_truth_mm = pj.at("ground_truth_mm").get<double>();
    p.signed_percent = pj.at("signed_percent").get<double>();
    e.pair_errors.push_back(p);
  }
  return e;
}

std::string fixed2(double v) { return fmt::format("{:.2f}", v); }
std::string error_cell(const std::optional<double>& v) { return v ? fixed2(*v) : "-"; }

}  // namespace

MethodEvaluation evaluate_method(std::string name, std::vector<ImageEvaluation> per_image,
                                 const std::vector<GroupBy>& group_by, const std::vector<double>& thresholds_mm) {
  MethodEvaluation m;
  m.name = std::move(name);
  m.overall = evaluation::aggregate(per_image);
  for (GroupBy g : group_by) m.breakdowns.push_back({g, evaluation::breakdown(per_image, g)});
  for (double t : thresholds_mm) m.f1.push_back(evaluation::binary_classification(per_image, t));
  m.per_image = std::move(per_image);
  return m;
}

json to_json(const EvaluationReport& report) {
  json groups = json::array();
  for (GroupBy g : report.group_by) groups.push_back(std::string(evaluation::to_string(g)));
  json methods = json::array();
  for (const auto& m : report.methods) {
    json breakdowns = json::object();
    for (const auto& table : m.breakdowns) {
      json rows = json::array();
      for (const auto& r : table.rows) {
        json row = summary_json(r.summary);
        row["key"] = r.key;
        rows.push_back(std::move(row));
      }
      breakdowns[std::string(evaluation::to_string(table.group))] = rows;
    }
    json f1 = json::array();
    for (const auto& s : m.f1) {
      f1.push_back({{"threshold_mm", s.threshold_mm},
                    {"tp", s.tp},
                    {"fp", s.fp},
                    {"fn", s.fn},
                    {"tn", s.tn},
                    {"precision", s.precision},
                    {"recall", s.recall},
                    {"f1", s.f1}});
    }
    json images = json::array();
    for (const auto& e : m.per_image) images.push_back(image_json(e));
    methods.push_back({{"name", m.name},
                       {"summary", summary_json(m.overall)},
                       {"breakdowns", breakdowns},
                       {"f1", f1},
                       {"per_image", images}});
  }
  return {{"group_by", groups}, {"thresholds_mm", report.thresholds_mm}, {"methods", methods}};
}

EvaluationReport report_from_json(const json& j) {
  EvaluationReport report;
  try {
    for (const auto& g : j.value("group_by", json::array())) {
      auto parsed = evaluation::parse_group_by(g.get<std::string>());
      if (!parsed) throw InputError("unknown group '" + g.get<std::string>() + "' in evaluation report");
      report.group_by.push_back(*parsed);
    }
    report.thresholds_mm = j.value("thresholds_mm", evaluation::kDefaultThresholdsMm);
    for (const auto& mj : j.at("methods")) {
      std::vector<ImageEvaluation> images;
      for (const auto& ij : mj.at("per_image")) images.push_back(image_from(ij));
      report.methods.push_back(
          evaluate_method(mj.at("name").get<std::string>(), std::move(images), report.group_by, report.thresholds_mm));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("evaluation report: ") + e.what());
  }
  return report;
}

bool ImageFilter::accepts(const ImageEvaluation& e) const {
  if (camera && evaluation::group_key(e, GroupBy::Camera) != *camera) return false;
  if (setting && e.meta.setting != *setting) return false;
  if (photoshoot && e.meta.photoshoot_id != *photoshoot) return false;
  if (focal_length_mm && e.meta.focal_length_mm != focal_length_mm) return false;
  return true;
}

EvaluationReport filter_report(const EvaluationReport& report, const ImageFilter& filter) {
  EvaluationReport out;
  out.group_by = report.group_by;
  out.thresholds_mm = report.thresholds_mm;
  for (const auto& m : report.methods) {
    std::vector<ImageEvaluation> kept;
    std::copy_if(m.per_image.begin(), m.per_image.end(), std::back_inserter(kept),
                 [&](const ImageEvaluation& e) { return filter.accepts(e); });
    if (kept.empty()) throw EmptyEvaluation("no images left after filtering method '" + m.name + "'");
    out.methods.push_back(evaluate_method(m.name, std::move(kept), out.group_by, out.thresholds_mm));
  }
  return out;
}

std::string focal_length_table_markdown(const EvaluationReport& report, const std::string& title) {
  std::string out = "### " + title + "\n\n| Focal length (mm) | Pictures |";
  std::string rule = "|---:|---:|";
  for (const auto& m : report.methods) {
    out += fmt::format(" {} detection rate | {} error (%) |", m.name, m.name);
    rule += "---:|---:|";
  }
  out += "\n" + rule + "\n";
  if (report.methods.empty()) return out;

  std::vector<std::vector<GroupRow>> per_method;
  for (const auto& m : report.methods) per_method.push_back(evaluation::breakdown(m.per_image, GroupBy::FocalLength));
  for (std::size_t r = 0; r < per_method.front().size(); ++r) {
    out += fmt::format("| {} | {} |", per_method.front()[r].key, per_method.front()[r].summary.n_images);
    for (const auto& rows : per_method) {
      out += fmt::format(" {} | {} |", fixed2(rows[r].summary.detection_rate), error_cell(rows[r].summary.d_E));
    }
    out += "\n";
  }
  out += fmt::format("| All | {} |", report.methods.front().overall.n_images);
  for (const auto& m : report.methods) {
    out += fmt::format(" {} | {} |", fixed2(m.overall.detection_rate), error_cell(m.overall.d_E));
  }
  return out + "\n";
}

std::string f1_table_markdown(const EvaluationReport& report) {
  std::string out = "### F1 at safe-distance thresholds\n\n| Safe distance (m) |";
  std::string rule = "|---:|";
  for (const auto& m : report.methods) {
    out += fmt::format(" {} F1 |", m.name);
    rule += "---:|";
  }
  out += "\n" + rule + "\n";
  for (std::size_t t = 0; t < report.thresholds_mm.size(); ++t) {
    out += fmt::format("| {:g} |", report.thresholds_mm[t] / 1000.0);
    for (const auto& m : report.methods) out += fmt::format(" {} |", fixed2(m.f1.at(t).f1));
    out += "\n";
  }
  return out;
}

std::string render_markdown(const EvaluationReport& report) {
  std::string out = "# Social distance evaluation\n\n";
  for (const auto& m : report.methods) {
    out += fmt::format("- **{}**: D_E {} %, detection rate {}, false discovery rate {} ({} images, {} scored)\n",
                       m.name, error_cell(m.overall.d_E), fixed2(m.overall.detection_rate),
                       fixed2(m.overall.false_discovery_rate), m.overall.n_images, m.overall.n_images_scored);
  }
  out += "\n" + focal_length_table_markdown(report, "All images") + "\n";
  std::set<std::string> settings;
  if (!report.methods.empty()) {
    for (const auto& e : report.methods.front().per_image) {
      if (!e.meta.setting.empty()) settings.insert(e.meta.setting);
    }
  }
  if (settings.size() > 1) {
    for (const auto& s : settings) {
      ImageFilter f;
      f.setting = s;
      out += focal_length_table_markdown(filter_report(report, f), fmt::format("Setting: {}", s)) + "\n";
    }
  }
  out += f1_table_markdown(report);
  return out;
}

std::string breakdown_csv(const EvaluationReport& report, GroupBy group) {
  csv::Writer w({"method", std::string(evaluation::to_string(group)), "n_images", "n_images_scored", "detection_rate",
                 "d_E", "false_discovery_rate"});
  for (const auto& m : report.methods) {
    for (const auto& r : evaluation::breakdown(m.per_image, group)) {
      w.add_row({m.name, r.key, std::to_string(r.summary.n_images), std::to_string(r.summary.n_images_scored),
                 csv::format_number(r.summary.detection_rate), r.summary.d_E ? csv::format_number(*r.summary.d_E) : "",
                 csv::format_number(r.summary.false_discovery_rate)});
    }
  }
  return w.str();
}

std::string f1_csv(const EvaluationReport& report) {
  csv::Writer w({"method", "threshold_mm", "tp", "fp", "fn", "tn", "precision", "recall", "f1"});
  for (const auto& m : report.methods) {
    for (const auto& s : m.f1) {
      w.add_row({m.name, csv::format_number(s.threshold_mm), std::to_string(s.tp), std::to_string(s.fp),
                 std::to_string(s.fn), std::to_string(s.tn), csv::format_number(s.precision),
                 csv::format_number(s.recall), csv::format_number(s.f1)});
    }
  }
  return w.str();
}

std::string per_image_csv(const EvaluationReport& report) {
  csv::Writer w({"method", "image", "photoshoot", "camera", "setting", "focal_length_mm", "n_ground_truth", "n_matched",
                 "n_false_positive", "d_e"});
  for (const auto& m : report.methods) {
    for (const auto& e : m.per_image) {
      w.add_row({m.name, e.image_id, std::to_string(e.meta.photoshoot_id), e.meta.camera_tag, e.meta.setting,
                 e.meta.focal_length_mm ? csv::format_number(*e.meta.focal_length_mm) : "",
                 std::to_string(e.n_ground_truth), std::to_string(e.n_matched), std::to_string(e.n_false_positive),
                 e.d_e ? csv::format_number(*e.d_e) : ""});
    }
  }
  return w.str();
}

std::vector<SeriesPoint> error_series(const EvaluationReport& report) {
  std::vector<SeriesPoint> series;
  for (const auto& m : report.methods) {
    for (const auto& e : m.per_image) {
      for (const auto& p : e.pair_errors) {
        series.push_back({m.name, e.image_id, p.pair.first + "-" + p.pair.second, p.ground_truth_mm, p.estimated_mm,
                          p.abs_percent(), p.signed_percent});
      }
    }
  }
  std::stable_sort(series.begin(), series.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    return std::tie(a.ground_truth_mm, a.method, a.image_id, a.pair) <
           std::tie(b.ground_truth_mm, b.method, b.image_id, b.pair);
  });
  return series;
}

std::string error_series_csv(const std::vector<SeriesPoint>& series) {
  csv::Writer w({"method", "image", "pair", "ground_truth_mm", "estimated_mm", "percent_error", "signed_percent_error"});
  for (const auto& s : series) {
    w.add_row({s.method, s.image_id, s.pair, csv::format_number(s.ground_truth_mm), csv::format_number(s.estimated_mm),
               csv::format_number(s.percent_error), csv::format_number(s.signed_percent_error)});
  }
  return w.str();
}

}  // namespace socialdist::report
