import json
import math
import os
from pathlib import Path

import pytest

import socialdist as sd

DATA = Path(os.environ.get("SOCIALDIST_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def camera(focal=50.0):
    return sd.CameraIntrinsics(focal, 4180, 2768)


def skeleton(points):
    flat = [0.0] * 75
    for index, (u, v) in points.items():
        flat[3 * index : 3 * index + 3] = [u, v, 0.9]
    return flat


def test_pixel_to_sensor_centre():
    assert sd.pixel_to_sensor(2090, 1384, camera()) == pytest.approx((0.0, 0.0))


def test_depth_from_torso():
    assert sd.estimate_depth(7.4, camera(), "torso") == pytest.approx(3000.0)
    assert sd.default_proportions()["Torso"] == 444.0


def test_estimate_person_on_axis():
    torso_px = 444.0 / 3000.0 * 50.0 / 24.0 * 2768
    person = sd.estimate_person(skeleton({1: (2090, 1000), 8: (2090, 1000 + torso_px)}), camera())
    assert person["chosen_part"] == "Torso"
    assert person["depth_mm"] == pytest.approx(3000.0)


def test_bad_input_raises():
    with pytest.raises(sd.InputError):
        sd.estimate_person([0.0] * 75, camera())
    with pytest.raises(sd.InputError):
        sd.pixel_to_sensor(-5, 10, camera())


def test_simulate_then_estimate_is_exact_without_noise():
    scene = json.loads((DATA / "examples" / "scene.json").read_text())
    scene["noise_px"] = 0.0
    shots = sd.simulate(scene)
    assert len(shots) == 6
    shot = next(s for s in shots if s["image"] == "ex_c0_50mm.jpg")
    est = sd.estimate_image(shot["skeleton"], camera(50.0))
    persons = est["persons"]
    assert len(persons) == len(shot["tags"])
    gt = {tuple(k): v for k, v in shot["ground_truth_mm"].items()}
    a, b = shot["tags"][0], shot["tags"][1]
    loc_a, loc_b = persons[0]["location_mm"], persons[1]["location_mm"]
    # All four stand level with the camera here, so torso midpoints share a height.
    assert math.dist(loc_a, loc_b) == pytest.approx(gt[(a, b)], rel=1e-9)


def test_match_detections():
    det = {"image": "a.jpg", "persons": [{"anchors": {"Torso": [100, 0]}, "location_mm": [0, 0, -1000]}]}
    result = sd.match_detections(det, [("P0", "Torso", 0, 0), ("P1", "Torso", 90, 0)])
    assert result["matches"] == {0: "P1"}


def test_run_audit(tmp_path):
    audit = sd.run("audit", {"annotations": str(DATA / "benchmark" / "dataset"), "out": str(tmp_path)})
    assert audit["images"] == 96
    assert audit["by_setting"] == {"indoor": 33, "outdoor": 63}
    assert (tmp_path / "audit.json").exists()


def test_run_rejects_unknown_keys(tmp_path):
    with pytest.raises(sd.InputError):
        sd.run("audit", {"annotatons": "x", "out": str(tmp_path)})


def test_proportion_subset_changes_depth():
    torso_px = 444.0 / 3000.0 * 50.0 / 24.0 * 2768
    keypoints = skeleton({1: (2090, 1000), 8: (2090, 1000 + torso_px)})
    person = sd.estimate_person(keypoints, camera(), {"torso": 500.0})
    assert person["depth_mm"] == pytest.approx(3000.0 * 500.0 / 444.0)
    with pytest.raises(sd.InputError):
        sd.estimate_person(keypoints, camera(), {"knees": 400.0})
