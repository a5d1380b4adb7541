#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "socialdist/errors.hpp"
#include "socialdist/pipeline.hpp"

namespace sp = socialdist::pipeline;

namespace {

struct Flags {
  std::string config_file;
  std::string annotations;
  std::vector<std::string> detections;
  std::string intrinsics;
  std::string aliases;
  std::string input;
  std::string proportions;
  std::string group_by;
  std::string thresholds;
  std::string filter_camera;
  std::string filter_setting;
  double confidence_floor = -1.0;
  int photoshoot = -1;
  double focal_length = -1.0;
  unsigned jobs = 0;
  long long seed = -1;
  double noise = -1.0;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON run config; its keys override flags");
  cmd->add_option("--jobs,-j", f.jobs, "Worker threads (default 1)");
  cmd->add_option("--out,-o", f.out, "Output directory (default ./out)");
  cmd->add_flag("--quiet,-q", f.quiet, "Only print errors");
}

void add_dataset(CLI::App* cmd, Flags& f) {
  cmd->add_option("--annotations,-a", f.annotations,
                  fmt::format("Dataset directory (default ${})", sp::kDatasetEnvVar));
  cmd->add_option("--intrinsics", f.intrinsics, "Intrinsics CSV overriding the dataset's own");
  cmd->add_option("--header-aliases", f.aliases, "JSON mapping canonical CSV headers to the file's headers");
}

sp::RunConfig to_config(const Flags& f) {
  sp::RunConfig c;
  if (!f.annotations.empty()) c.annotations = f.annotations;
  for (const auto& d : f.detections) c.detections.push_back(sp::parse_method_source(d));
  if (!f.intrinsics.empty()) c.intrinsics = f.intrinsics;
  if (!f.aliases.empty()) c.header_aliases = f.aliases;
  if (!f.input.empty()) c.input = f.input;
  if (!f.proportions.empty()) c.proportions = sp::parse_proportions(f.proportions);
  if (f.confidence_floor >= 0.0) c.confidence_floor = f.confidence_floor;
  if (!f.group_by.empty()) c.group_by = sp::parse_group_list(f.group_by);
  if (!f.thresholds.empty()) c.thresholds_mm = sp::parse_thresholds(f.thresholds);
  if (f.jobs > 0) c.jobs = f.jobs;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (f.noise >= 0.0) c.noise_px = f.noise;
  if (!f.out.empty()) c.out = f.out;
  if (!f.filter_camera.empty()) c.filter.camera = f.filter_camera;
  if (!f.filter_setting.empty()) c.filter.setting = f.filter_setting;
  if (f.photoshoot >= 0) c.filter.photoshoot = f.photoshoot;
  if (f.focal_length > 0.0) c.filter.focal_length_mm = f.focal_length;
  if (!f.config_file.empty()) sp::apply_config_file(c, f.config_file);
  sp::apply_environment(c);
  return c;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:.2f} %", *v) : "-"; }

int run(sp::Command command, const Flags& flags) {
  const sp::RunConfig config = to_config(flags);
  switch (command) {
    case sp::Command::Estimate: {
      const auto s = sp::run_estimate(config);
      fmt::print("estimated {} person(s) in {} image(s), {} skeleton(s) dropped -> {}\n", s.persons, s.images,
                 s.dropped, config.out.string());
      return 0;
    }
    case sp::Command::Evaluate: {
      const auto rep = sp::run_evaluate(config);
      for (const auto& m : rep.methods) {
        fmt::print("{}: D_E {}, detection rate {:.3f}, false discovery rate {:.3f} ({} images, {} scored)\n", m.name,
                   fmt_opt(m.overall.d_E), m.overall.detection_rate, m.overall.false_discovery_rate,
                   m.overall.n_images, m.overall.n_images_scored);
      }
      return 0;
    }
    case sp::Command::Simulate: {
      const auto s = sp::run_simulate(config);
      fmt::print("simulated {} image(s) with {} visible person(s) -> {}\n", s.images, s.people, config.out.string());
      return 0;
    }
    case sp::Command::GtDistances: {
      const auto n = sp::run_gt_distances(config);
      fmt::print("wrote {} pair distance(s) -> {}\n", n, (config.out / "ground_truth_distances.csv").string());
      return 0;
    }
    case sp::Command::Report: {
      const auto rep = sp::run_report(config);
      fmt::print("report for {} method(s) -> {}\n", rep.methods.size(), config.out.string());
      return 0;
    }
    case sp::Command::Validate: {
      const auto violations = sp::run_validate(config);
      for (const auto& v : violations) {
        fmt::print("{}: {}\n", socialdist::dataset::to_string(v.kind), v.message);
      }
      if (violations.empty()) fmt::print("ok\n");
      return violations.empty() ? 0 : 2;
    }
    case sp::Command::Audit: {
      const auto a = sp::run_audit(config);
      std::cout << sp::to_json(a).dump(2) << '\n';
      return 0;
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pair-wise social distance estimation from body keypoints, and its benchmark harness"};
  app.require_subcommand(1);
  Flags flags;
  sp::Command command = sp::Command::Estimate;

  auto* estimate = app.add_subcommand("estimate", "Estimate 3D positions and pair distances from skeleton files");
  estimate->add_option("skeletons", flags.input, "Directory of skeleton JSON files");
  estimate->add_option("--intrinsics", flags.intrinsics, "Intrinsics CSV (image,focal_length_mm,...)");
  estimate->add_option("--header-aliases", flags.aliases, "JSON header aliases for the intrinsics CSV");
  estimate->add_option("--proportions", flags.proportions, "Parts and lengths, e.g. torso=444,shoulders=389,pupils=63");
  estimate->add_option("--confidence-floor", flags.confidence_floor, "Minimum keypoint confidence (default 0.1)");
  add_common(estimate, flags);
  estimate->callback([&] { command = sp::Command::Estimate; });

  auto* evaluate = app.add_subcommand("evaluate", "Score detections against the annotated benchmark");
  add_dataset(evaluate, flags);
  evaluate->add_option("--detections,-d", flags.detections, "Detection directory, optionally label=dir; repeatable");
  evaluate->add_option("--group-by", flags.group_by, "focal_length,setting,camera,photoshoot");
  evaluate->add_option("--thresholds", flags.thresholds, "Safe-distance thresholds in mm (default 1000,1500,2000,3000)");
  add_common(evaluate, flags);
  evaluate->callback([&] { command = sp::Command::Evaluate; });

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a scene config");
  simulate->add_option("scene", flags.input, "Scene config JSON");
  simulate->add_option("--seed", flags.seed, "Override the config's noise seed");
  simulate->add_option("--noise", flags.noise, "Override the config's keypoint noise (px)");
  add_common(simulate, flags);
  simulate->callback([&] { command = sp::Command::Simulate; });

  auto* gt = app.add_subcommand("gt-distances", "Ground-truth pair distances of every annotated image");
  add_dataset(gt, flags);
  add_common(gt, flags);
  gt->callback([&] { command = sp::Command::GtDistances; });

  auto* rep = app.add_subcommand("report", "Render tables and the error series from evaluation.json");
  rep->add_option("evaluation", flags.input, "evaluation.json written by `evaluate`");
  rep->add_option("--camera", flags.filter_camera, "Only this camera, as photoshoot/tag (e.g. 0/C2)");
  rep->add_option("--setting", flags.filter_setting, "Only this setting (indoor/outdoor)");
  rep->add_option("--photoshoot", flags.photoshoot, "Only this photoshoot");
  rep->add_option("--focal-length", flags.focal_length, "Only this focal length (mm)");
  add_common(rep, flags);
  rep->callback([&] { command = sp::Command::Report; });

  auto* validate = app.add_subcommand("validate", "Check a dataset directory against the extension rules");
  add_dataset(validate, flags);
  add_common(validate, flags);
  validate->callback([&] { command = sp::Command::Validate; });

  auto* aud = app.add_subcommand("audit", "Count images by setting, focal length and resolution");
  add_dataset(aud, flags);
  add_common(aud, flags);
  aud->callback([&] { command = sp::Command::Audit; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(flags.quiet ? spdlog::level::err : spdlog::level::info);

  try {
    return run(command, flags);
  } catch (const socialdist::InputError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 1;
  }
}
