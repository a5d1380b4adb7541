#include "doctest.h"

#include "socialdist/errors.hpp"
#include "socialdist/io.hpp"
#include "support.hpp"

using namespace socialdist;
using nlohmann::json;
using geometry::AnchorPart;

TEST_CASE("skeleton documents") {
  json doc = {{"people", json::array({{{"pose_keypoints_2d", std::vector<double>(75, 0.0)}}})}};
  doc["people"][0]["pose_keypoints_2d"][2 * 3] = 100;
  doc["people"][0]["pose_keypoints_2d"][2 * 3 + 2] = 0.9;
  auto f = io::skeleton_from_json(doc, "fallback.jpg");
  CHECK(f.image_id == "fallback.jpg");
  REQUIRE(f.people.size() == 1);
  CHECK(f.people[0].keypoints[2].u == 100);
  CHECK(f.people[0].keypoints[2].confidence == doctest::Approx(0.9));
  auto back = io::skeleton_from_json(io::to_json(f), "other.jpg");
  CHECK(back.image_id == "fallback.jpg");
  CHECK(back.people[0] == f.people[0]);

  doc["people"][0]["pose_keypoints_2d"] = std::vector<double>(74, 0.0);
  CHECK_THROWS_AS(io::skeleton_from_json(doc, "x.jpg"), InputError);
  CHECK_THROWS_AS(io::skeleton_from_json(json::array(), "x.jpg"), InputError);
}

TEST_CASE("detection documents in both forms") {
  auto loc = io::detection_from_json(json::parse(R"({
    "image": "a.jpg",
    "persons": [{"anchors": {"Torso": [10, 20]}, "location_mm": [0, 0, -3000]},
                {"anchors": {"Eyes": [30, 40], "Shoulder": [31, 60]}, "location_mm": [1500, 0, -3000]}]})"));
  CHECK(loc.image_id == "a.jpg");
  CHECK(loc.persons[1].anchors.at(AnchorPart::Shoulder).v == 60);
  CHECK(loc.estimated_distance(0, 1) == doctest::Approx(1500));
  CHECK(io::detection_from_json(io::to_json(loc)).estimated_distance(0, 1) == doctest::Approx(1500));

  auto dist = io::detection_from_json(json::parse(R"({
    "image": "b.jpg",
    "persons": [{"anchors": {"Torso": [10, 20]}}, {"anchors": {"Torso": [90, 20]}}],
    "distances_mm": {"0-1": 2350.0}})"));
  CHECK(dist.estimated_distance(0, 1) == 2350.0);
  CHECK(dist.estimated_distance(1, 0) == 2350.0);

  CHECK_THROWS_AS(io::detection_from_json(json::parse(R"({"image": "c.jpg", "persons": [{"anchors": {}}]})")),
                  MalformedDetection);
  CHECK_THROWS_AS(io::detection_from_json(json::parse(
                      R"({"image": "c.jpg", "persons": [{"anchors": {"Nose": [1, 2]}, "location_mm": [0, 0, -1]}]})")),
                  InputError);
}

TEST_CASE("estimator output reads back as a detection") {
  geometry::CameraIntrinsics cam = testing::benchmark_camera(50);
  geometry::SkeletonObservation s;
  s.keypoints[1] = {2090, 1000, 0.9};
  s.keypoints[8] = {2090, 1000 + 444.0 / 3000.0 * 50 / 24 * 2768, 0.9};
  auto est = geometry::estimate_person(s, cam);
  auto doc = io::estimate_to_json("e.jpg", {est, est});
  CHECK(doc["persons"][0]["chosen_part"] == "Torso");
  CHECK(doc["persons"][0]["depth_mm"].get<double>() == doctest::Approx(3000));
  CHECK(doc["pair_distances_mm"].size() == 1);
  auto det = io::detection_from_json(doc);
  CHECK(det.persons.size() == 2);
  CHECK(det.estimated_distance(0, 1) == doctest::Approx(0).scale(1));
}

TEST_CASE("files and directories") {
  testing::TempDir dir;
  io::write_json_file(dir / "b.json", {{"image", "b.jpg"}, {"persons", json::array()}});
  io::write_json_file(dir / "a.json", {{"image", "a.jpg"}, {"persons", json::array()}});
  testing::write_file(dir / "notes.txt", "x");
  auto files = io::list_json_files(dir.path());
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.json");
  auto dets = io::read_detection_dir(dir.path());
  CHECK(dets.size() == 2);
  CHECK(io::json_name_for("ps0_C0_050mm_01.jpg") == "ps0_C0_050mm_01.json");
  testing::write_file(dir / "bad.json", "{");
  CHECK_THROWS_AS(io::read_json_file(dir / "bad.json"), InputError);
  CHECK_THROWS_AS(io::read_json_file(dir / "missing.json"), InputError);
}
