"""Pair-wise social distance estimation from body keypoints."""

from ._core import (
    CameraIntrinsics,
    Error,
    InputError,
    back_project,
    default_proportions,
    estimate_depth,
    estimate_image,
    estimate_person,
    match_detections,
    pixel_to_sensor,
    run,
    simulate,
)

__all__ = [
    "CameraIntrinsics",
    "Error",
    "InputError",
    "back_project",
    "default_proportions",
    "estimate_depth",
    "estimate_image",
    "estimate_person",
    "match_detections",
    "pixel_to_sensor",
    "run",
    "simulate",
]
