"""Point-to-pixel label transfer: clip the point map, project, look labels up."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semmap.core.geometry import interpolate_pose
from semmap.core.labels import UNLABELED
from semmap.core.types import SemanticPointCloud
from semmap.errors import ValidationError


@dataclass(frozen=True)
class ClipWindow:
    """Body-frame box kept around the vehicle, half-open on the max side."""

    longitudinal_min: float = 0.0
    longitudinal_max: float = 15.0
    lateral_min: float = -10.0
    lateral_max: float = 10.0
    vertical_min: float = -3.0
    vertical_max: float = 3.0

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        if not np.all(lo < hi):
            raise ValidationError(f"clip window min must be below max on every axis: {lo} / {hi}")

    @property
    def lo(self):
        return np.array([self.longitudinal_min, self.lateral_min, self.vertical_min])

    @property
    def hi(self):
        return np.array([self.longitudinal_max, self.lateral_max, self.vertical_max])

    def contains(self, body_xyz):
        p = np.asarray(body_xyz, dtype=float).reshape(-1, 3)
        return np.all((p >= self.lo) & (p < self.hi), axis=1)


@dataclass
class Projection:
    """Struct-of-arrays result of projecting a cloud into an image."""

    index: np.ndarray
    u: np.ndarray
    v: np.ndarray
    depth: np.ndarray

    def __len__(self):
        return len(self.index)


def extract_local_region(pmap, pose, clip=None):
    """Map points inside ``clip`` around ``pose``, as an unlabeled body-frame cloud."""
    clip = clip or ClipWindow()
    if len(pmap) == 0:
        return SemanticPointCloud.empty("body", pose)
    idx, body = pmap.query_box(pose, clip.lo, clip.hi)
    return SemanticPointCloud.unlabeled(body, pmap.intensity[idx], "body", pose)


def project_points(cam, pts_body, pose=None):
    """Pinhole projection of body-frame points.

    ``pts_body`` may be an (N, 3) array or a cloud; a world-frame cloud is
    moved into the body frame of ``pose`` first. Points behind the camera or
    landing outside ``[0, width) x [0, height)`` are left out.
    """
    if isinstance(pts_body, SemanticPointCloud):
        cloud = pts_body
        if cloud.frame == "world":
            if pose is None:
                raise ValidationError("a world-frame cloud needs the image pose")
            cloud = cloud.to_body(pose)
        xyz = cloud.xyz
    else:
        xyz = np.asarray(pts_body, dtype=float).reshape(-1, 3)
    pc = cam.body_to_camera(xyz)
    z = pc[:, 2]
    front = z > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cam.fx * pc[:, 0] / z + cam.cx
        v = cam.fy * pc[:, 1] / z + cam.cy
    ok = front & (u >= 0) & (u < cam.width) & (v >= 0) & (v < cam.height)
    idx = np.flatnonzero(ok)
    return Projection(idx, u[idx], v[idx], z[idx])


def nearest_pixel(u, v, width, height):
    """Round half up; coordinates past the last pixel center clamp to the edge."""
    col = np.floor(np.asarray(u) + 0.5).astype(np.int64)
    row = np.floor(np.asarray(v) + 0.5).astype(np.int64)
    return np.minimum(row, height - 1), np.minimum(col, width - 1)


def associate_labels(img, proj, cloud, occlusion=False):
    """Give each projected point the label of its nearest pixel.

    Points that were not projected, or that land on an unlabeled pixel, are
    dropped. With ``occlusion`` only the nearest point per pixel survives.
    """
    row, col = nearest_pixel(proj.u, proj.v, img.width, img.height)
    lab = img.labels[row, col]
    keep = lab != UNLABELED
    idx, lab, depth = proj.index[keep], lab[keep], proj.depth[keep]
    if occlusion and len(idx):
        pix = row[keep] * img.width + col[keep]
        order = np.lexsort((depth, pix))
        first = np.ones(len(order), dtype=bool)
        first[1:] = pix[order][1:] != pix[order][:-1]
        sel = np.sort(order[first])
        idx, lab = idx[sel], lab[sel]
    out = cloud.subset(idx)
    out.labels = lab.astype(np.uint8)
    return out


def build_frame_cloud(pmap, traj, cam, image, t, clip=None, occlusion=False, nearest=False):
    """Labelled body-frame cloud for the image taken at time ``t``."""
    pose = interpolate_pose(traj, t, nearest=nearest)
    region = extract_local_region(pmap, pose, clip)
    if len(region) == 0:
        return region
    proj = project_points(cam, region.xyz)
    return associate_labels(image, proj, region, occlusion=occlusion)


def associate_cloud(cloud_body, cam, image, occlusion=False):
    """Project and label an already body-frame cloud (used for live scans)."""
    if len(cloud_body) == 0:
        return cloud_body
    proj = project_points(cam, cloud_body.xyz)
    return associate_labels(image, proj, cloud_body, occlusion=occlusion)


def reproject(cam, xyz_body):
    """Plain pinhole map without filtering; used by invariants checks."""
    pc = cam.body_to_camera(xyz_body)
    return cam.fx * pc[:, 0] / pc[:, 2] + cam.cx, cam.fy * pc[:, 1] / pc[:, 2] + cam.cy


__all__ = [
    "ClipWindow",
    "Projection",
    "associate_cloud",
    "associate_labels",
    "build_frame_cloud",
    "extract_local_region",
    "nearest_pixel",
    "project_points",
]
