#include <algorithm>
#include <random>

#include "doctest.h"

#include "socialdist/errors.hpp"
#include "socialdist/evaluation.hpp"
#include "support.hpp"

using namespace socialdist;
using namespace socialdist::evaluation;
using doctest::Approx;
using geometry::AnchorPart;

namespace {

DetectedPerson at(double u, double v, AnchorPart part = AnchorPart::Torso,
                  std::optional<WorldPoint> loc = std::nullopt) {
  DetectedPerson p;
  p.anchors[part] = {u, v};
  p.location = loc;
  return p;
}

BodyPartAnnotation ann(const std::string& tag, double u, double v, AnchorPart part = AnchorPart::Torso) {
  return {"img.jpg", tag, part, u, v};
}

ImageEvaluation scored(std::optional<double> d_e, std::size_t matched, std::size_t gt, std::size_t fp) {
  ImageEvaluation e;
  e.d_e = d_e;
  e.n_matched = matched;
  e.n_ground_truth = gt;
  e.n_false_positive = fp;
  e.n_detections = matched + fp;
  return e;
}

}  // namespace

TEST_SUITE("match_detections") {
  TEST_CASE("one detection, one person, any distance") {
    DetectionInput d{"img.jpg", {at(4000, 2700)}, {}};
    auto m = match_detections(d, std::vector{ann("P0", 1, 1)});
    CHECK(m.matches.at(0) == "P0");
    CHECK(m.false_positives.empty());
  }
  TEST_CASE("nearest first with a false positive") {
    // det0->P0 5 px, det1->P0 8 px, det2->P1 3 px; det0/det1 are far from P1.
    DetectionInput d{"img.jpg", {at(105, 100), at(108, 100), at(903, 100)}, {}};
    auto m = match_detections(d, std::vector{ann("P0", 100, 100), ann("P1", 900, 100)});
    CHECK(m.matches == std::map<std::size_t, std::string>{{0, "P0"}, {2, "P1"}});
    CHECK(m.false_positives == std::set<std::size_t>{1});
    CHECK(m.match_pixel_distance.at(2) == Approx(3.0));
  }
  TEST_CASE("fewer detections than people: no false positives") {
    DetectionInput d{"img.jpg", {at(0, 0), at(50, 0)}, {}};
    auto m = match_detections(d, std::vector{ann("P0", 1, 0), ann("P1", 49, 0), ann("P2", 500, 0)});
    CHECK(m.matches.size() == 2);
    CHECK(m.false_positives.empty());
  }
  TEST_CASE("minimum over shared parts") {
    DetectedPerson p;
    p.anchors[AnchorPart::Torso] = {0, 0};
    p.anchors[AnchorPart::Head] = {100, 100};
    std::vector<BodyPartAnnotation> person = {ann("P0", 30, 40), ann("P0", 100, 101, AnchorPart::Head),
                                              ann("P0", 0, 0, AnchorPart::Eyes)};
    CHECK(*anchor_distance(p, person) == Approx(1.0));
    CHECK_FALSE(anchor_distance(at(0, 0, AnchorPart::Shoulder), person).has_value());
  }
  TEST_CASE("no shared part leaves a detection unmatched, not false") {
    DetectionInput d{"img.jpg", {at(0, 0, AnchorPart::Eyes), at(5, 5)}, {}};
    auto m = match_detections(d, std::vector{ann("P0", 1, 1), ann("P1", 800, 1, AnchorPart::Head)});
    CHECK(m.matches == std::map<std::size_t, std::string>{{1, "P0"}});
    CHECK(m.unmatched == std::set<std::size_t>{0});
    CHECK(m.false_positives.empty());
  }
  TEST_CASE("ties break by tag then detection index") {
    DetectionInput d{"img.jpg", {at(10, 0), at(-10, 0)}, {}};
    auto m = match_detections(d, std::vector{ann("P10", 0, 0), ann("P2", 0, 0)});
    // Both distances are 10; P2 sorts before P10 and takes detection 0.
    CHECK(m.matches.at(0) == "P2");
    CHECK(m.matches.at(1) == "P10");
  }
  TEST_CASE("detections without anchors are malformed") {
    DetectionInput d{"img.jpg", {DetectedPerson{}}, {}};
    CHECK_THROWS_AS(match_detections(d, std::vector{ann("P0", 1, 1)}), MalformedDetection);
  }
  TEST_CASE("permutation invariance") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<BodyPartAnnotation> people;
      for (int p = 0; p < 4; ++p) people.push_back(ann("P" + std::to_string(p), u(rng), u(rng)));
      std::vector<DetectedPerson> dets;
      for (int i = 0; i < 5; ++i) dets.push_back(at(u(rng), u(rng)));
      std::vector<std::size_t> perm = {0, 1, 2, 3, 4};
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<DetectedPerson> shuffled;
      for (auto i : perm) shuffled.push_back(dets[i]);
      auto a = match_detections({"img.jpg", dets, {}}, people);
      auto b = match_detections({"img.jpg", shuffled, {}}, people);
      for (std::size_t k = 0; k < perm.size(); ++k) {
        CHECK(a.matches.contains(perm[k]) == b.matches.contains(k));
        if (b.matches.contains(k)) CHECK(a.matches.at(perm[k]) == b.matches.at(k));
      }
    }
  }
  TEST_CASE("a far extra detection changes nothing") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0, 1000);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<BodyPartAnnotation> people;
      for (int p = 0; p < 3; ++p) people.push_back(ann("P" + std::to_string(p), u(rng), u(rng)));
      std::vector<DetectedPerson> dets;
      for (int i = 0; i < 3; ++i) dets.push_back(at(u(rng), u(rng)));
      auto before = match_detections({"img.jpg", dets, {}}, people);
      dets.push_back(at(1e6, 1e6));
      auto after = match_detections({"img.jpg", dets, {}}, people);
      CHECK(after.matches == before.matches);
      CHECK(after.matches.size() >= before.matches.size());
    }
  }
}

TEST_SUITE("greedy equals exhaustive") {
  TEST_CASE("random instances up to 6x6") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_int_distribution<int> coarse(0, 20);  // coarse grid forces many distance ties
    std::uniform_int_distribution<int> part_pick(0, 3);
    const AnchorPart parts[] = {AnchorPart::Eyes, AnchorPart::Shoulder, AnchorPart::Torso, AnchorPart::Head};
    int checked = 0;
    for (int trial = 0; trial < 3000; ++trial) {
      const int nd = count(rng);
      const int np = count(rng);
      std::vector<testing::ToyDetection> toy_d(nd);
      std::vector<testing::ToyPerson> toy_p(np);
      DetectionInput det{"img.jpg", {}, {}};
      std::vector<BodyPartAnnotation> annotations;
      for (int p = 0; p < np; ++p) {
        toy_p[p].tag = "P" + std::to_string(p * 5 % 11);  // non-lexicographic tag order
        for (int k = 0; k < 1 + part_pick(rng) % 3; ++k) {
          AnchorPart part = parts[part_pick(rng)];
          geometry::PixelPoint px{coarse(rng) * 10.0, coarse(rng) * 10.0};
          if (toy_p[p].parts.emplace(part, px).second) annotations.push_back({"img.jpg", toy_p[p].tag, part, px.u, px.v});
        }
      }
      for (int i = 0; i < nd; ++i) {
        DetectedPerson dp;
        for (int k = 0; k < 1 + part_pick(rng) % 3; ++k) {
          dp.anchors[parts[part_pick(rng)]] = {coarse(rng) * 10.0, coarse(rng) * 10.0};
        }
        toy_d[i].anchors = dp.anchors;
        det.persons.push_back(dp);
      }
      const auto greedy = match_detections(det, annotations);
      const auto oracle = testing::exhaustive_nearest_first(toy_d, toy_p);
      CHECK(greedy.matches == oracle);
      ++checked;
    }
    CHECK(checked == 3000);
  }
}

TEST_SUITE("image_error") {
  TEST_CASE("single pair") {
    DetectionInput d{"img.jpg", {at(0, 0, AnchorPart::Torso, WorldPoint{0, 0, -3000}),
                                 at(100, 0, AnchorPart::Torso, WorldPoint{1500, 0, -3000})}, {}};
    auto m = match_detections(d, std::vector{ann("P0", 0, 0), ann("P1", 100, 0)});
    GroundTruthPairs gt{{{"P0", "P1"}, 2000.0}};
    auto e = image_error(d, m, gt);
    CHECK(*e.d_e == Approx(25.0));
    REQUIRE(e.pair_errors.size() == 1);
    CHECK(e.pair_errors[0].signed_percent == Approx(-25.0));
  }
  TEST_CASE("binomial denominator") {
    DetectionInput d{"img.jpg", {at(0, 0), at(100, 0), at(200, 0)}, std::map<IndexPair, double>{
                                                                        {{0, 1}, 1100.0},  // +10 %
                                                                        {{0, 2}, 800.0},   // -20 %
                                                                        {{1, 2}, 1300.0},  // +30 %
                                                                    }};
    auto m = match_detections(d, std::vector{ann("P0", 0, 0), ann("P1", 100, 0), ann("P2", 200, 0)});
    GroundTruthPairs gt{{{"P0", "P1"}, 1000.0}, {{"P0", "P2"}, 1000.0}, {{"P1", "P2"}, 1000.0}};
    auto e = image_error(d, m, gt);
    CHECK(*e.d_e == Approx(20.0));
  }
  TEST_CASE("perfect estimates") {
    DetectionInput d{"img.jpg", {at(0, 0), at(100, 0)}, std::map<IndexPair, double>{{{0, 1}, 1234.5}}};
    auto m = match_detections(d, std::vector{ann("P0", 0, 0), ann("P1", 100, 0)});
    CHECK(*image_error(d, m, {{{"P0", "P1"}, 1234.5}}).d_e == 0.0);
  }
  TEST_CASE("fewer than two matches leaves d_e empty") {
    DetectionInput d{"img.jpg", {at(0, 0, AnchorPart::Torso, WorldPoint{0, 0, -1})}, {}};
    auto m = match_detections(d, std::vector{ann("P0", 0, 0), ann("P1", 100, 0)});
    CHECK_FALSE(image_error(d, m, {{{"P0", "P1"}, 1000.0}}).d_e.has_value());
  }
  TEST_CASE("pairs are ordered by tag and carry detection indices") {
    DetectionInput d{"img.jpg", {at(200, 0), at(0, 0)}, std::map<IndexPair, double>{{{0, 1}, 900.0}}};
    auto m = match_detections(d, std::vector{ann("P10", 200, 0), ann("P9", 0, 0)});
    auto e = image_error(d, m, {{{"P9", "P10"}, 1000.0}});
    CHECK(e.pair_errors[0].pair == TagPair{"P9", "P10"});
    CHECK(e.pair_errors[0].detections == IndexPair{1, 0});
  }
  TEST_CASE("missing ground truth pair") {
    DetectionInput d{"img.jpg", {at(0, 0), at(100, 0)}, std::map<IndexPair, double>{{{0, 1}, 1.0}}};
    auto m = match_detections(d, std::vector{ann("P0", 0, 0), ann("P1", 100, 0)});
    CHECK_THROWS_AS(image_error(d, m, {}), DanglingReference);
  }
  TEST_CASE("agrees with the brute-force sum on random images") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-5000, 5000);
    std::uniform_int_distribution<int> count(2, 6);
    for (int trial = 0; trial < 500; ++trial) {
      const int n = count(rng);
      std::map<std::string, std::tuple<double, double, double>> gt_pos;
      std::vector<BodyPartAnnotation> annotations;
      DetectionInput d{"img.jpg", {}, {}};
      std::vector<std::optional<std::tuple<double, double, double>>> est;
      for (int i = 0; i < n; ++i) {
        const std::string tag = "P" + std::to_string(i);
        gt_pos[tag] = {u(rng), u(rng), 0.0};
        annotations.push_back(ann(tag, 100.0 * i, 0));
        const WorldPoint w{u(rng), u(rng), -std::abs(u(rng)) - 1};
        d.persons.push_back(at(100.0 * i + 1, 0, AnchorPart::Torso, w));
        est.push_back(std::tuple{w.x_mm, w.y_mm, w.z_mm});
      }
      GroundTruthPairs gt;
      for (auto& [a, pa] : gt_pos) {
        for (auto& [b, pb] : gt_pos) {
          if (dataset::TagLess{}(a, b)) {
            gt[{a, b}] = std::hypot(std::get<0>(pa) - std::get<0>(pb), std::get<1>(pa) - std::get<1>(pb));
          }
        }
      }
      auto m = match_detections(d, annotations);
      auto e = image_error(d, m, gt);
      auto oracle = testing::brute_force_d_e(est, m.matches, gt_pos);
      REQUIRE(oracle.has_value());
      CHECK(std::abs(*e.d_e - *oracle) <= 1e-12 * std::max(1.0, *oracle));
    }
  }
}

TEST_SUITE("aggregate") {
  TEST_CASE("mean over scored images only") {
    std::vector<ImageEvaluation> v = {scored(10, 2, 2, 0), scored(30, 3, 4, 0), scored(std::nullopt, 1, 2, 0)};
    auto a = aggregate(v);
    CHECK(*a.d_E == Approx(20.0));
    CHECK(a.n_images_scored == 2);
    CHECK(a.detection_rate == Approx((1.0 + 0.75 + 0.5) / 3));
    CHECK(a.false_discovery_rate == 0.0);
  }
  TEST_CASE("false discovery rate") {
    std::vector<ImageEvaluation> v = {scored(0, 2, 2, 2), scored(0, 2, 2, 0), scored(std::nullopt, 0, 3, 0)};
    auto a = aggregate(v);
    CHECK(a.false_discovery_rate == Approx(0.5 / 3));
  }
  TEST_CASE("images without annotated people skip the detection rate") {
    std::vector<ImageEvaluation> v = {scored(std::nullopt, 0, 0, 1), scored(std::nullopt, 1, 2, 0)};
    auto a = aggregate(v);
    CHECK(a.detection_rate == Approx(0.5));
    CHECK_FALSE(a.d_E.has_value());
    CHECK(a.false_discovery_rate == Approx(0.5));
  }
  TEST_CASE("empty input") { CHECK_THROWS_AS(aggregate(std::vector<ImageEvaluation>{}), EmptyEvaluation); }
}

TEST_SUITE("binary classification") {
  ImageEvaluation with_pairs(std::vector<std::pair<double, double>> gt_est) {
    ImageEvaluation e;
    for (auto [gt, est] : gt_est) {
      PairError p;
      p.ground_truth_mm = gt;
      p.estimated_mm = est;
      p.signed_percent = (est - gt) / gt * 100;
      e.pair_errors.push_back(p);
    }
    return e;
  }
  TEST_CASE("large error, right verdict") {
    auto e = with_pairs({{1900, 100}});
    CHECK(e.pair_errors[0].abs_percent() == Approx(94.7368).epsilon(1e-5));
    auto s = binary_classification(std::vector{e}, 2000);
    CHECK(s.tp == 1);
    CHECK(s.f1 == 1.0);
  }
  TEST_CASE("confusion counts") {
    auto e = with_pairs({{1500, 1800}, {2500, 1900}, {1000, 2100}, {3000, 2600}});
    auto s = binary_classification(std::vector{e}, 2000);
    CHECK(s.tp == 1);
    CHECK(s.fp == 1);
    CHECK(s.fn == 1);
    CHECK(s.tn == 1);
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == 0.5);
  }
  TEST_CASE("threshold beyond every distance gives recall 1") {
    auto e = with_pairs({{1500, 1800}, {2500, 9000}});
    CHECK(binary_classification(std::vector{e}, 1e12).recall == 1.0);
  }
  TEST_CASE("no positives at all") {
    auto s = binary_classification(std::vector{with_pairs({{5000, 5000}})}, 1000);
    CHECK(s.tn == 1);
    CHECK(s.f1 == 0.0);
  }
}

TEST_SUITE("breakdown") {
  TEST_CASE("numeric focal ordering and camera keys") {
    std::vector<ImageEvaluation> v;
    for (double f : {105.0, 16.0, 50.0, 16.0}) {
      auto e = scored(f, 2, 2, 0);
      e.meta = {1, "C3", "indoor", f};
      v.push_back(e);
    }
    auto rows = breakdown(v, GroupBy::FocalLength);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].key == "16");
    CHECK(rows[0].summary.n_images == 2);
    CHECK(rows[2].key == "105");
    CHECK(breakdown(v, GroupBy::Camera)[0].key == "1/C3");
    CHECK(breakdown(v, GroupBy::Setting)[0].key == "indoor");
    CHECK(parse_group_by("indoor-outdoor") == GroupBy::Setting);
    CHECK_FALSE(parse_group_by("lens").has_value());
  }
}

TEST_SUITE("evaluate over a dataset") {
  dataset::Dataset small() {
    dataset::AnnotationRows r;
    r.locations = {{2, 0, "P0", {0, 0, 0}}, {3, 0, "P1", {200, 0, 0}}, {4, 0, "C0", {0, -500, 0}}};
    r.images = {{2, "b.jpg", 0, "C0", "outdoor"}, {3, "a.jpg", 0, "C0", "outdoor"}};
    r.bodyparts = {{2, "a.jpg", "P0", "Torso", 100, 100}, {3, "a.jpg", "P1", "Torso", 300, 100},
                   {4, "b.jpg", "P0", "Torso", 100, 100}};
    r.intrinsics = {{2, "a.jpg", 50.0, 36, 24, 4180, 2768}};
    return dataset::build_dataset(r);
  }
  TEST_CASE("missing detections count as zero, results in image order") {
    const auto ds = small();
    DetectionInput d{"a.jpg", {at(100, 100), at(300, 100)}, std::map<IndexPair, double>{{{0, 1}, 2000.0}}};
    auto out = evaluate(ds, std::vector{d}, 4);
    REQUIRE(out.size() == 2);
    CHECK(out[0].image_id == "a.jpg");
    CHECK(*out[0].d_e == 0.0);
    CHECK(out[0].meta.focal_length_mm == 50.0);
    CHECK(out[1].image_id == "b.jpg");
    CHECK(out[1].n_matched == 0);
    CHECK(out[1].n_ground_truth == 1);
    CHECK_FALSE(out[1].meta.focal_length_mm.has_value());
    auto a = aggregate(out);
    CHECK(a.detection_rate == 0.5);
  }
  TEST_CASE("unknown and duplicate images") {
    const auto ds = small();
    DetectionInput ghost{"zzz.jpg", {}, {}};
    CHECK_THROWS_AS(evaluate(ds, std::vector{ghost}), DanglingReference);
    DetectionInput a{"a.jpg", {}, {}};
    CHECK_THROWS_AS(evaluate(ds, std::vector{a, a}), MalformedDetection);
  }
  TEST_CASE("incomplete estimates are malformed") {
    const auto ds = small();
    DetectionInput d{"a.jpg", {at(100, 100, AnchorPart::Torso, WorldPoint{0, 0, -1}), at(300, 100)}, {}};
    CHECK_THROWS_AS(evaluate(ds, std::vector{d}), MalformedDetection);
    DetectionInput partial{"a.jpg", {at(100, 100), at(300, 100), at(5, 5)},
                           std::map<IndexPair, double>{{{0, 1}, 1.0}}};
    CHECK_THROWS_AS(evaluate(ds, std::vector{partial}), MalformedDetection);
  }
}
