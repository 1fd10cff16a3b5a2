"""Comparison methods: mapping from live sparse scans, and flat-ground back-projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semmap.association import ClipWindow, associate_cloud
from semmap.core.geometry import interpolate_pose, relative_points
from semmap.core.labels import UNLABELED
from semmap.core.types import SemanticPointCloud
from semmap.errors import OutOfRangeError, ValidationError
from semmap.pipeline import FrameStats, log, map_clouds


@dataclass(frozen=True)
class GroundPlane:
    height: float = 0.0  # body-frame z of the assumed ground
    valid_range: float = 30.0  # longest accepted ray, meters

    def __post_init__(self):
        if not self.valid_range > 0:
            raise ValidationError("valid_range must be positive")


def map_from_live_scans(scans, traj, cam, images, grid_spec, obs_model, int_model=None, labelset=None, clip=None, **kw):
    """Same pipeline as the dense map, with each frame's live scan in place of the map region.

    ``scans``: list of ``(timestamp, xyz_body, intensity)``.
    ``images``: list of ``(timestamp, SemanticImage)``.
    """
    clouds = live_frame_clouds(scans, traj, cam, images, clip=clip)
    return map_clouds(clouds, grid_spec, obs_model, int_model, labelset, **kw)


def planar_backproject(cam, pose, img, plane=None, stride=2, return_pixels=False):
    """Cast a ray through every ``stride``-th labelled pixel onto the plane z = plane.height.

    Returns a body-frame cloud. Rays that are parallel to the plane, point
    away from it, or meet it beyond ``valid_range`` produce nothing.
    """
    plane = plane or GroundPlane()
    rows, cols = np.mgrid[0 : img.height : stride, 0 : img.width : stride]
    rows, cols = rows.ravel(), cols.ravel()
    lab = img.labels[rows, cols]
    m = lab != UNLABELED
    rows, cols, lab = rows[m], cols[m], lab[m]
    d = cam.pixel_rays(cols.astype(float), rows.astype(float))
    c = cam.center_body
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (plane.height - c[2]) / d[:, 2]
    ok = np.isfinite(s) & (s > 0) & (s <= plane.valid_range)
    pts = c + s[ok, None] * d[ok]
    cloud = SemanticPointCloud(pts, lab[ok], np.zeros(ok.sum()), "body", pose)
    if return_pixels:
        return cloud, rows[ok], cols[ok]
    return cloud


def _nearest_scan(scans, t):
    ts = np.array([s[0] for s in scans])
    return scans[int(np.argmin(np.abs(ts - t)))]


def live_frame_clouds(scans, traj, cam, images, clip=None, occlusion=False, nearest=False, stats=None):
    """Like :func:`dense_frame_clouds` but each frame uses the time-closest live scan.

    ``scans`` is a list of ``(timestamp, xyz_body, intensity)``; the scan is
    motion-compensated into the image pose through the trajectory.
    """
    stats = stats if stats is not None else FrameStats()
    clip = clip or ClipWindow()
    for t, img in images:
        try:
            pose = interpolate_pose(traj, t, nearest=nearest)
            if not scans:
                stats.frames += 1
                yield SemanticPointCloud.empty("body", pose)
                continue
            ts, xyz, inten = _nearest_scan(scans, t)
            xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
            if ts != t and len(xyz):
                xyz = relative_points(interpolate_pose(traj, ts, nearest=nearest), pose, xyz)
        except OutOfRangeError as exc:
            log.warning("frame at t=%.6f skipped: %s", t, exc)
            stats.skipped += 1
            stats.skipped_times.append(t)
            continue
        keep = clip.contains(xyz)
        cloud = SemanticPointCloud.unlabeled(xyz[keep], np.asarray(inten)[keep], "body", pose)
        cloud = associate_cloud(cloud, cam, img, occlusion=occlusion)
        stats.frames += 1
        stats.points += len(cloud)
        yield cloud


def planar_frame_clouds(traj, cam, images, plane, stride=2, clip=None, nearest=False, stats=None):
    stats = stats if stats is not None else FrameStats()
    for t, img in images:
        try:
            pose = interpolate_pose(traj, t, nearest=nearest)
        except OutOfRangeError as exc:
            log.warning("frame at t=%.6f skipped: %s", t, exc)
            stats.skipped += 1
            stats.skipped_times.append(t)
            continue
        cloud = planar_backproject(cam, pose, img, plane, stride=stride)
        if clip is not None:
            cloud = cloud.subset(np.flatnonzero(clip.contains(cloud.xyz)))
        stats.frames += 1
        stats.points += len(cloud)
        yield cloud
