"""Semantic object mapping, head pose and interaction willingness."""

from __future__ import annotations

import json
import os
from typing import Any, Optional

from ._semmap import (
    CameraIntrinsics,
    Detection2D,
    ErrorCode,
    FaceModel3D,
    HeadPose,
    IouTracker,
    MapConfig,
    PersonWillingnessMap,
    RigidPose,
    SemanticMap,
    SemmapError,
    WillingnessConfig,
    WillingnessState,
    backproject,
    chamfer_distance,
    cli_main,
    euler_from_rotation,
    extract_object_cloud,
    iou,
    is_attending,
    overlap_ratio,
    project,
    rotation_from_euler,
    solve_head_pose,
    update_willingness,
    voxel_downsample,
)
from ._semmap import _run_scenario_json

__all__ = [
    "CameraIntrinsics",
    "Detection2D",
    "ErrorCode",
    "FaceModel3D",
    "HeadPose",
    "IouTracker",
    "MapConfig",
    "PersonWillingnessMap",
    "RigidPose",
    "SemanticMap",
    "SemmapError",
    "WillingnessConfig",
    "WillingnessState",
    "backproject",
    "chamfer_distance",
    "cli_main",
    "euler_from_rotation",
    "extract_object_cloud",
    "iou",
    "is_attending",
    "overlap_ratio",
    "project",
    "rotation_from_euler",
    "run_scenario",
    "solve_head_pose",
    "update_willingness",
    "voxel_downsample",
]


def run_scenario(
    scenario: "str | os.PathLike[str]",
    config: "Optional[str | os.PathLike[str]]" = None,
    seed: Optional[int] = None,
) -> dict[str, Any]:
    """Run a scenario file end to end.

    Returns ``{"map": ..., "metrics": ..., "events": [...]}`` with the same
    content the ``semmap run`` command writes to disk.
    """
    map_json, metrics_json, events = _run_scenario_json(
        os.fspath(scenario), None if config is None else os.fspath(config), seed
    )
    return {
        "map": json.loads(map_json),
        "metrics": json.loads(metrics_json),
        "events": [json.loads(e) for e in events],
    }
