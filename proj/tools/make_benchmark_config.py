#!/usr/bin/env python3
"""Writes the scene config that regenerates data/benchmark/dataset.

Two photoshoots: 0 outdoor (standing, cameras C0..C2) and 1 indoor (sitting,
cameras C0..C3). Photo counts per camera and focal length match the published
benchmark table; positions are a plausible layout, not the measured one.
"""

import json
import sys

FULL_FRAME = [4180, 2768]
MARK_II = [4080, 2720]  # the 200 mm and 300 mm lenses were shot on the second body

OUTDOOR_FOCALS = [16, 24, 35, 50, 105, 200, 300]
OUTDOOR_COUNTS = {
    "C0": [2, 3, 4, 4, 4, 2, 3],
    "C1": [3, 3, 4, 4, 4, 3, 4],
    "C2": [2, 2, 3, 3, 3, 2, 1],
}
INDOOR_FOCALS = [16, 24, 35, 50, 105]
INDOOR_COUNTS = {
    "C0": [1, 1, 1, 2, 4],
    "C1": [1, 1, 1, 2, 3],
    "C2": [1, 1, 1, 1, 4],
    "C3": [1, 1, 1, 2, 3],
}


def shots(photoshoot, focals, counts):
    out = []
    for camera, row in counts.items():
        for focal, n in zip(focals, row):
            for k in range(n):
                out.append({
                    "image": f"ps{photoshoot}_{camera}_{focal:03d}mm_{k + 1:02d}.jpg",
                    "camera": camera,
                    "focal_length_mm": focal,
                    "sensor_mm": [36, 24],
                    "resolution_px": MARK_II if focal >= 200 else FULL_FRAME,
                })
    return out


def person(tag, x, y, theta=0.0):
    return {"tag": tag, "position_cm": [x, y], "theta_deg": theta}


config = {
    "seed": 2020,
    "noise_px": 2.0,
    "tripod_height_mm": 1350,
    "rotation_model": "foreshortened",
    "photoshoots": [
        {
            "id": 0,
            "setting": "outdoor",
            "posture": "standing",
            "people": [
                person("P0", 0, 0),
                person("P1", 150, 60, 15),
                person("P2", 330, -30, 30),
                person("P3", 90, 240),
                person("P4", 270, 210, 45),
                person("P5", 480, 150, 20),
            ],
            "cameras": [
                {"tag": "C0", "position_cm": [150, -900, 0]},
                {"tag": "C1", "position_cm": [-500, -700, 0]},
                {"tag": "C2", "position_cm": [800, -1100, 230]},
            ],
            "shots": shots(0, OUTDOOR_FOCALS, OUTDOOR_COUNTS),
        },
        {
            "id": 1,
            "setting": "indoor",
            "posture": "sitting",
            "people": [
                person("P0", 0, 0),
                person("P1", 120, 0, 20),
                person("P2", 240, 60),
                person("P3", 0, 180, 40),
                person("P4", 150, 210),
                person("P6", 300, 240, 10),
            ],
            "cameras": [
                {"tag": "C0", "position_cm": [120, -600, 0]},
                {"tag": "C1", "position_cm": [-350, -400, 0]},
                {"tag": "C2", "position_cm": [500, -450, 0]},
                {"tag": "C3", "position_cm": [150, 800, 0]},
            ],
            "shots": shots(1, INDOOR_FOCALS, INDOOR_COUNTS),
        },
    ],
}

out = sys.argv[1] if len(sys.argv) > 1 else "data/benchmark/scene.json"
with open(out, "w") as f:
    json.dump(config, f, indent=2)
    f.write("\n")
