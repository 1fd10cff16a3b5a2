"""Frame iteration and grid accumulation shared by the CLI and the baselines."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from semmap.association import build_frame_cloud
from semmap.bevgrid.grid import SemanticGrid, integrate_frame, maybe_shift_local_map, resample_to_anchor
from semmap.core.geometry import Pose
from semmap.core.labels import default_labelset
from semmap.errors import OutOfRangeError

log = logging.getLogger(__name__)


@dataclass
class FrameStats:
    frames: int = 0
    skipped: int = 0
    points: int = 0
    skipped_times: list = field(default_factory=list)


def dense_frame_clouds(pmap, traj, cam, images, clip=None, occlusion=False, nearest=False, stats=None):
    """Yield labelled body-frame clouds, one per ``(timestamp, SemanticImage)``.

    Images outside the trajectory are skipped with a warning and counted.
    """
    stats = stats if stats is not None else FrameStats()
    for t, img in images:
        try:
            cloud = build_frame_cloud(pmap, traj, cam, img, t, clip, occlusion=occlusion, nearest=nearest)
        except OutOfRangeError as exc:
            log.warning("frame at t=%.6f skipped: %s", t, exc)
            stats.skipped += 1
            stats.skipped_times.append(t)
            continue
        stats.frames += 1
        stats.points += len(cloud)
        yield cloud


def map_clouds(
    clouds,
    spec,
    obs_model,
    int_model=None,
    labelset=None,
    one_vote_per_cell=False,
    shift_thresholds=(1.0, 0.1),
    final_anchor=None,
):
    """Fold a stream of body-frame clouds into a new grid.

    A global grid integrates every cloud in world coordinates. A local grid
    is anchored at the first cloud's pose and re-anchored as the vehicle
    moves; ``final_anchor`` forces a last re-anchoring.
    """
    labelset = labelset or default_labelset()
    grid = SemanticGrid(spec) if spec.frame == "global" else None
    for cloud in clouds:
        if spec.frame == "local":
            if grid is None:
                grid = SemanticGrid(spec, cloud.pose)
            else:
                grid = maybe_shift_local_map(grid, cloud.pose, *shift_thresholds)
        integrate_frame(grid, cloud, obs_model, int_model, labelset, one_vote_per_cell)
    if grid is None:
        grid = SemanticGrid(spec, final_anchor or Pose.identity())
    elif final_anchor is not None and spec.frame == "local":
        grid = resample_to_anchor(grid, final_anchor)
    return grid
