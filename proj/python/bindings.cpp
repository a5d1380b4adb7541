#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "socialdist/errors.hpp"
#include "socialdist/evaluation.hpp"
#include "socialdist/geometry.hpp"
#include "socialdist/io.hpp"
#include "socialdist/pipeline.hpp"
#include "socialdist/simulator.hpp"

namespace py = pybind11;
using namespace socialdist;
using nlohmann::json;

namespace {

geometry::ProportionSet proportions_from(const std::optional<std::map<std::string, double>>& lengths) {
  if (!lengths) return geometry::default_proportions();
  std::string text;
  for (const auto& [name, mm] : *lengths) text += name + "=" + std::to_string(mm) + ",";
  return pipeline::parse_proportions(text);
}

geometry::SkeletonObservation skeleton_from(const std::vector<double>& flat) {
  if (flat.size() != 3 * geometry::kKeypointCount) {
    throw InputError("keypoints must hold 75 numbers (u, v, confidence for 25 BODY_25 points)");
  }
  geometry::SkeletonObservation obs;
  for (std::size_t k = 0; k < geometry::kKeypointCount; ++k) {
    obs.keypoints[k] = {flat[3 * k], flat[3 * k + 1], flat[3 * k + 2]};
  }
  return obs;
}

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_python(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict person_dict(const geometry::PersonEstimate& p) {
  py::dict d;
  d["location_mm"] = py::make_tuple(p.location.x_mm, p.location.y_mm, p.location.z_mm);
  d["chosen_part"] = std::string(geometry::to_string(p.chosen_part));
  d["depth_mm"] = p.depth_mm();
  py::dict parts;
  for (const auto& e : p.per_part_estimates) parts[py::str(std::string(geometry::to_string(e.part)))] = e.depth_mm;
  d["per_part_depth_mm"] = parts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pair-wise social distance estimation core";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", base.ptr());

  py::class_<geometry::CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double f, int w, int h, double sw, double sh) {
             geometry::CameraIntrinsics c{f, sw, sh, w, h};
             c.validate();
             return c;
           }),
           py::arg("focal_length_mm"), py::arg("image_width_px"), py::arg("image_height_px"),
           py::arg("sensor_width_mm") = 36.0, py::arg("sensor_height_mm") = 24.0)
      .def_readonly("focal_length_mm", &geometry::CameraIntrinsics::focal_length_mm)
      .def_readonly("sensor_width_mm", &geometry::CameraIntrinsics::sensor_width_mm)
      .def_readonly("sensor_height_mm", &geometry::CameraIntrinsics::sensor_height_mm)
      .def_readonly("image_width_px", &geometry::CameraIntrinsics::image_width_px)
      .def_readonly("image_height_px", &geometry::CameraIntrinsics::image_height_px);

  m.def("default_proportions", [] {
    std::map<std::string, double> out;
    for (const auto& p : geometry::default_proportions()) out[std::string(geometry::to_string(p.part))] = p.world_length_mm;
    return out;
  });

  m.def(
      "pixel_to_sensor",
      [](double u, double v, const geometry::CameraIntrinsics& cam) {
        auto s = geometry::pixel_to_sensor({u, v}, cam);
        return py::make_tuple(s.x_mm, s.y_mm);
      },
      py::arg("u"), py::arg("v"), py::arg("camera"));

  m.def(
      "estimate_depth",
      [](double d_image_mm, const geometry::CameraIntrinsics& cam, const std::string& part,
         std::optional<double> length_mm) {
        auto parsed = geometry::parse_body_part(part);
        if (!parsed) throw InputError("unknown body part '" + part + "'");
        const double len = length_mm.value_or(*geometry::proportion_length(geometry::default_proportions(), *parsed));
        return geometry::estimate_depth(d_image_mm, cam, {*parsed, len});
      },
      py::arg("d_image_mm"), py::arg("camera"), py::arg("part"), py::arg("length_mm") = py::none());

  m.def(
      "back_project",
      [](double x_mm, double y_mm, double depth_mm, const geometry::CameraIntrinsics& cam) {
        auto p = geometry::back_project({x_mm, y_mm}, depth_mm, cam);
        return py::make_tuple(p.x_mm, p.y_mm, p.z_mm);
      },
      py::arg("x_mm"), py::arg("y_mm"), py::arg("depth_mm"), py::arg("camera"));

  m.def(
      "estimate_person",
      [](const std::vector<double>& keypoints, const geometry::CameraIntrinsics& cam,
         const std::optional<std::map<std::string, double>>& proportions, double confidence_floor) {
        geometry::EstimatorOptions opts;
        opts.proportions = proportions_from(proportions);
        opts.confidence_floor = confidence_floor;
        return person_dict(geometry::estimate_person(skeleton_from(keypoints), cam, opts));
      },
      py::arg("keypoints"), py::arg("camera"), py::arg("proportions") = py::none(),
      py::arg("confidence_floor") = geometry::kDefaultConfidenceFloor,
      "Estimate one person's camera-frame position from 75 BODY_25 numbers.");

  m.def(
      "estimate_image",
      [](const py::object& skeleton_doc, const geometry::CameraIntrinsics& cam,
         const std::optional<std::map<std::string, double>>& proportions, double confidence_floor) {
        const auto file = io::skeleton_from_json(from_python(skeleton_doc), "image");
        geometry::EstimatorOptions opts;
        opts.proportions = proportions_from(proportions);
        opts.confidence_floor = confidence_floor;
        std::vector<geometry::PersonEstimate> persons;
        for (const auto& obs : file.people) {
          try {
            persons.push_back(geometry::estimate_person(obs, cam, opts));
          } catch (const NoUsableKeypoints&) {
          }
        }
        return to_python(io::estimate_to_json(file.image_id, persons));
      },
      py::arg("skeleton"), py::arg("camera"), py::arg("proportions") = py::none(),
      py::arg("confidence_floor") = geometry::kDefaultConfidenceFloor,
      "Estimate every person of an OpenPose-style skeleton document; returns the estimate document.");

  m.def(
      "match_detections",
      [](const py::object& detection_doc, const std::vector<std::tuple<std::string, std::string, double, double>>& parts) {
        const auto det = io::detection_from_json(from_python(detection_doc));
        std::vector<dataset::BodyPartAnnotation> annotations;
        for (const auto& [person, part, u, v] : parts) {
          auto a = geometry::parse_anchor_part(part);
          if (!a) throw InputError("unknown anchor part '" + part + "'");
          annotations.push_back({det.image_id, person, *a, u, v});
        }
        const auto r = evaluation::match_detections(det, annotations);
        py::dict d;
        d["matches"] = r.matches;
        d["false_positives"] = std::vector<std::size_t>(r.false_positives.begin(), r.false_positives.end());
        d["unmatched"] = std::vector<std::size_t>(r.unmatched.begin(), r.unmatched.end());
        return d;
      },
      py::arg("detection"), py::arg("annotations"),
      "Greedy matching; annotations are (person, part, u, v) tuples.");

  m.def(
      "simulate",
      [](const py::object& config, unsigned jobs) {
        const auto sim = simulator::SimulationConfig::from_json_text(from_python(config).dump());
        const auto out = simulator::simulate(sim, jobs);
        py::list shots;
        for (const auto& scene : out.shots) {
          io::SkeletonFile skel{scene.image_id, {}};
          py::dict gt;
          for (const auto& [pair, mm] : scene.ground_truth_mm) gt[py::make_tuple(pair.first, pair.second)] = mm;
          py::list tags;
          for (const auto& p : scene.people) {
            skel.people.push_back(p.skeleton);
            tags.append(p.tag);
          }
          py::dict shot;
          shot["image"] = scene.image_id;
          shot["tags"] = tags;
          shot["skeleton"] = to_python(io::to_json(skel));
          shot["ground_truth_mm"] = gt;
          shots.append(shot);
        }
        return shots;
      },
      py::arg("config"), py::arg("jobs") = 1, "Run a scene config (a dict) and return one entry per shot.");

  m.def(
      "run",
      [](const std::string& command, const py::object& config) -> py::object {
        pipeline::RunConfig rc;
        pipeline::apply_config(rc, from_python(config));
        if (command == "estimate") {
          const auto s = pipeline::run_estimate(rc);
          py::dict d;
          d["images"] = s.images;
          d["persons"] = s.persons;
          d["dropped"] = s.dropped;
          return d;
        }
        if (command == "evaluate") {
          return to_python(report::to_json(pipeline::run_evaluate(rc)));
        }
        if (command == "simulate") {
          const auto s = pipeline::run_simulate(rc);
          py::dict d;
          d["images"] = s.images;
          d["people"] = s.people;
          return d;
        }
        if (command == "gt-distances") return py::int_(pipeline::run_gt_distances(rc));
        if (command == "report") return to_python(report::to_json(pipeline::run_report(rc)));
        if (command == "audit") return to_python(pipeline::to_json(pipeline::run_audit(rc)));
        throw InputError("unknown command '" + command + "'");
      },
      py::arg("command"), py::arg("config"),
      "Run a CLI command with a config dict (same keys as the --config file).");
}
