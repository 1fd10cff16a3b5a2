"""Synthetic road scenes with exact ground truth.

A scene is a height field with painted regions. Everything downstream,
including point maps, trajectories, label images, LiDAR sweeps and
ground-truth rasters, is a deterministic function of the SceneSpec and its seed.
The outputs use the core types, so synthetic and recorded data go through
the same code.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from semmap import _kernels
from semmap.association import ClipWindow
from semmap.bevgrid.export import write_label_raster
from semmap.bevgrid.grid import UNKNOWN, GridSpec
from semmap.bevgrid.models import save_confusion
from semmap.core import io
from semmap.core.camera import CameraModel
from semmap.core.geometry import Pose, Trajectory, interpolate_pose, transform_points
from semmap.core.labels import CHANNEL_NAMES, UNLABELED, default_labelset
from semmap.core.pointmap import PointMap
from semmap.core.types import SemanticImage, SemanticPointCloud
from semmap.errors import ValidationError

MAX_RAY = 200.0

DEFAULT_CAMERA = {
    "fx": 500.0,
    "fy": 500.0,
    "cx": 320.0,
    "cy": 240.0,
    "width": 640,
    "height": 480,
    "position": [1.0, 0.0, 1.5],
    "pitch": 0.1,
}

DEFAULT_LIDAR = {
    "beams": 16,
    "elevation_min_deg": -15.0,
    "elevation_max_deg": 15.0,
    "azimuth_step_deg": 0.2,
    "height": 1.8,
    "max_range": 100.0,
}


def _channel_index(ch):
    if isinstance(ch, str):
        if ch not in CHANNEL_NAMES:
            raise ValidationError(f"unknown channel {ch!r}")
        return CHANNEL_NAMES.index(ch)
    ch = int(ch)
    if not 0 <= ch < len(CHANNEL_NAMES):
        raise ValidationError(f"channel index {ch} out of range")
    return ch


@dataclass
class Region:
    kind: str  # "polygon" | "band"
    channel: int
    intensity_mean: float
    intensity_sd: float
    vertices: np.ndarray | None = None
    axis: str = "x"
    lo: float = 0.0
    hi: float = 0.0
    start: float = -np.inf
    end: float = np.inf
    dash: tuple | None = None

    @classmethod
    def from_json(cls, doc):
        try:
            kind = doc["kind"]
            common = dict(
                channel=_channel_index(doc["channel"]),
                intensity_mean=float(doc.get("intensity_mean", 10.0)),
                intensity_sd=float(doc.get("intensity_sd", 0.0)),
            )
            if kind == "polygon":
                v = np.asarray(doc["vertices"], dtype=float)
                return cls("polygon", vertices=v, **common)
            if kind == "band":
                dash = doc.get("dash")
                return cls(
                    "band",
                    axis=doc.get("axis", "x"),
                    lo=float(doc["lo"]),
                    hi=float(doc["hi"]),
                    start=float(doc.get("start", -np.inf)),
                    end=float(doc.get("end", np.inf)),
                    dash=None if dash is None else (float(dash[0]), float(dash[1])),
                    **common,
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed region: {exc}") from exc
        raise ValidationError(f"unknown region kind {kind!r}")

    def to_json(self):
        doc = {
            "kind": self.kind,
            "channel": CHANNEL_NAMES[self.channel],
            "intensity_mean": self.intensity_mean,
            "intensity_sd": self.intensity_sd,
        }
        if self.kind == "polygon":
            doc["vertices"] = self.vertices.tolist()
        else:
            doc.update(axis=self.axis, lo=self.lo, hi=self.hi)
            if np.isfinite(self.start):
                doc["start"] = self.start
            if np.isfinite(self.end):
                doc["end"] = self.end
            if self.dash is not None:
                doc["dash"] = list(self.dash)
        return doc

    def validate(self, xmin, xmax, ymin, ymax):
        if not 0 <= self.intensity_mean <= 255:
            raise ValidationError("region intensity mean must be in [0, 255]")
        if self.intensity_sd < 0:
            raise ValidationError("region intensity sd must be nonnegative")
        if self.kind == "polygon":
            v = self.vertices
            if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
                raise ValidationError("polygon needs at least 3 (x, y) vertices")
            if not np.all(np.isfinite(v)):
                raise ValidationError("polygon vertices must be finite")
            x, y = v[:, 0], v[:, 1]
            area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
            if area <= 0:
                raise ValidationError("polygon has zero area")
            if x.min() < xmin or x.max() > xmax or y.min() < ymin or y.max() > ymax:
                raise ValidationError("polygon leaves the scene extent")
        else:
            if self.axis not in ("x", "y"):
                raise ValidationError("band axis must be 'x' or 'y'")
            if not self.lo < self.hi:
                raise ValidationError("band lo must be below hi")
            a0, a1 = (ymin, ymax) if self.axis == "x" else (xmin, xmax)
            if self.lo < a0 or self.hi > a1:
                raise ValidationError("band leaves the scene extent")
            if self.dash is not None and (self.dash[0] <= 0 or self.dash[1] < 0):
                raise ValidationError("dash lengths must be positive")

    def contains(self, x, y):
        if self.kind == "polygon":
            return _point_in_polygon(x, y, self.vertices)
        along, across = (x, y) if self.axis == "x" else (y, x)
        m = (across >= self.lo) & (across < self.hi) & (along >= self.start) & (along < self.end)
        if self.dash is not None:
            on, off = self.dash
            origin = self.start if np.isfinite(self.start) else 0.0
            m &= np.mod(along - origin, on + off) < on
        return m


def _point_in_polygon(x, y, verts):
    """Even-odd rule, vectorized over query points."""
    inside = np.zeros(np.shape(x), dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
    return inside


@dataclass
class SceneSpec:
    extent: tuple = (60.0, 20.0)
    surface: dict = field(default_factory=lambda: {"kind": "flat"})
    layout: list = field(default_factory=list)
    background_intensity: tuple = (5.0, 2.0)
    path: list = field(default_factory=lambda: [[2.0, -1.8], [44.0, -1.8]])
    speed: float = 5.0
    image_rate: float = 13.0
    pose_rate: float = 100.0
    camera: dict = field(default_factory=lambda: dict(DEFAULT_CAMERA))
    lidar: dict = field(default_factory=lambda: dict(DEFAULT_LIDAR))
    density: float = 50.0
    corruption: list | None = None
    seed: int = 0

    @property
    def bounds(self):
        """(xmin, xmax, ymin, ymax): x spans [0, length], y is centered on 0."""
        lx, ly = self.extent
        return 0.0, float(lx), -ly / 2.0, ly / 2.0

    def validate(self):
        lx, ly = self.extent
        if not (lx > 0 and ly > 0):
            raise ValidationError(f"scene extent must be positive, got {self.extent}")
        kind = self.surface.get("kind")
        if kind not in ("flat", "incline", "hill"):
            raise ValidationError(f"unknown surface kind {kind!r}")
        if kind == "hill" and not self.surface.get("wavelength", 0) > 0:
            raise ValidationError("hill wavelength must be positive")
        regions = [Region.from_json(r) if isinstance(r, dict) else r for r in self.layout]
        for r in regions:
            r.validate(*self.bounds)
        p = np.asarray(self.path, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or len(p) < 2:
            raise ValidationError("trajectory path needs at least two (x, y) points")
        if not (self.speed > 0 and self.image_rate > 0 and self.pose_rate > 0):
            raise ValidationError("speed and rates must be positive")
        if not self.density > 0:
            raise ValidationError("point density must be positive")
        if self.corruption is not None:
            M = np.asarray(self.corruption, dtype=float)
            if M.shape != (len(CHANNEL_NAMES),) * 2 or np.any(M < 0):
                raise ValidationError("corruption matrix must be 5x5 and nonnegative")
        return regions

    def to_json(self):
        doc = {
            "extent": list(self.extent),
            "surface": dict(self.surface),
            "layout": [r.to_json() if isinstance(r, Region) else r for r in self.layout],
            "background_intensity": list(self.background_intensity),
            "path": [list(map(float, p)) for p in self.path],
            "speed": self.speed,
            "image_rate": self.image_rate,
            "pose_rate": self.pose_rate,
            "camera": dict(self.camera),
            "lidar": dict(self.lidar),
            "density": self.density,
            "corruption": None if self.corruption is None else np.asarray(self.corruption).tolist(),
            "seed": self.seed,
        }
        return doc

    @classmethod
    def from_json(cls, doc):
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown scene keys: {sorted(unknown)}")
        kw = dict(doc)
        if "extent" in kw:
            kw["extent"] = tuple(float(v) for v in kw["extent"])
        if "background_intensity" in kw:
            kw["background_intensity"] = tuple(kw["background_intensity"])
        if "camera" in kw:
            kw["camera"] = {**DEFAULT_CAMERA, **kw["camera"]}
        if "lidar" in kw:
            kw["lidar"] = {**DEFAULT_LIDAR, **kw["lidar"]}
        spec = cls(**kw)
        spec.validate()
        return spec

    @classmethod
    def load(cls, path):
        return cls.from_json(json.loads(Path(path).read_text()))

    def replace(self, **kw):
        new = copy.deepcopy(self)
        for k, v in kw.items():
            setattr(new, k, v)
        return new


def default_layout():
    """Two-lane road along x with dashed center line, edge lines, a crosswalk, sidewalks and verges."""
    return [
        {"kind": "band", "axis": "x", "lo": -10.0, "hi": 10.0, "channel": "vegetation", "intensity_mean": 12.0, "intensity_sd": 4.0},
        {"kind": "band", "axis": "x", "lo": -6.0, "hi": 6.0, "channel": "sidewalk", "intensity_mean": 22.0, "intensity_sd": 4.0},
        {"kind": "band", "axis": "x", "lo": -3.6, "hi": 3.6, "channel": "road", "intensity_mean": 8.0, "intensity_sd": 2.5},
        {"kind": "band", "axis": "x", "lo": -0.15, "hi": 0.15, "dash": [3.0, 3.0], "start": 0.0, "channel": "lane-mark", "intensity_mean": 60.0, "intensity_sd": 10.0},
        {"kind": "band", "axis": "x", "lo": -3.4, "hi": -3.0, "channel": "lane-mark", "intensity_mean": 60.0, "intensity_sd": 10.0},
        {"kind": "band", "axis": "x", "lo": 3.0, "hi": 3.4, "channel": "lane-mark", "intensity_mean": 60.0, "intensity_sd": 10.0},
        {"kind": "polygon", "vertices": [[30.0, -3.6], [34.0, -3.6], [34.0, 3.6], [30.0, 3.6]], "channel": "crosswalk", "intensity_mean": 50.0, "intensity_sd": 10.0},
    ]


def default_scene_spec(seed=0, **kw):
    spec = SceneSpec(layout=default_layout(), corruption=[list(r) for r in DEFAULT_CORRUPTION], seed=seed)
    for k, v in kw.items():
        setattr(spec, k, v)
    spec.validate()
    return spec


def camera_from_spec(doc):
    doc = {**DEFAULT_CAMERA, **doc}
    if "R_cb" in doc:
        return CameraModel.from_json(doc)
    return CameraModel.forward_facing(
        doc["fx"], doc["fy"], doc["cx"], doc["cy"], int(doc["width"]), int(doc["height"]),
        position=doc["position"], pitch=doc["pitch"],
    )


class Scene:
    """Queryable scene: surface height, painted channel and intensity law at any (x, y)."""

    def __init__(self, spec):
        self.spec = spec
        self.regions = spec.validate()
        self.bounds = spec.bounds
        s = spec.surface
        kind = s["kind"]
        if kind == "flat":
            self._surface = (_kernels.SURFACE_FLAT, 0.0, 1.0)
        elif kind == "incline":
            self._surface = (_kernels.SURFACE_INCLINE, float(s.get("grade", 0.0)), 1.0)
        else:
            self._surface = (_kernels.SURFACE_HILL, float(s["amplitude"]), float(s["wavelength"]))
        self.camera = camera_from_spec(spec.camera)

    @property
    def is_planar(self):
        return self._surface[0] != _kernels.SURFACE_HILL

    def z(self, x, y):
        kind, p0, p1 = self._surface
        x = np.asarray(x, dtype=float)
        if kind == _kernels.SURFACE_FLAT:
            return np.zeros_like(x + np.asarray(y, dtype=float))
        if kind == _kernels.SURFACE_INCLINE:
            return p0 * x + 0.0 * np.asarray(y, dtype=float)
        return p0 * np.sin(2 * np.pi * x / p1) + 0.0 * np.asarray(y, dtype=float)

    def dzdx(self, x):
        kind, p0, p1 = self._surface
        x = np.asarray(x, dtype=float)
        if kind == _kernels.SURFACE_FLAT:
            return np.zeros_like(x)
        if kind == _kernels.SURFACE_INCLINE:
            return np.full_like(x, p0)
        return p0 * 2 * np.pi / p1 * np.cos(2 * np.pi * x / p1)

    def inside(self, x, y):
        xmin, xmax, ymin, ymax = self.bounds
        return (x >= xmin) & (x < xmax) & (y >= ymin) & (y < ymax)

    def _paint(self, x, y):
        """Index of the last region covering each point, -1 where unpainted."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        which = np.full(np.broadcast(x, y).shape, -1, dtype=np.int64)
        for i, r in enumerate(self.regions):
            which[r.contains(x, y)] = i
        which[~self.inside(x, y)] = -1
        return which

    def label(self, x, y):
        """Map channel at (x, y); -1 outside the extent or where nothing is painted."""
        which = self._paint(x, y)
        chan = np.array([r.channel for r in self.regions] + [-1], dtype=np.int64)
        return chan[which]

    def intensity_params(self, x, y):
        which = self._paint(x, y)
        bg_m, bg_s = self.spec.background_intensity
        mean = np.array([r.intensity_mean for r in self.regions] + [bg_m], dtype=float)
        sd = np.array([r.intensity_sd for r in self.regions] + [bg_s], dtype=float)
        return mean[which], sd[which]

    def sample_intensity(self, x, y, rng):
        mean, sd = self.intensity_params(x, y)
        return np.clip(rng.normal(mean, sd), 0.0, 255.0)

    def intersect(self, origins, dirs, method="auto"):
        """Ray parameter of the first surface hit (NaN for none, or beyond MAX_RAY).

        Planar surfaces are solved in closed form unless ``method="bisect"``;
        the hill always goes through bracketed bisection.
        """
        origins = np.asarray(origins, dtype=float).reshape(-1, 3)
        dirs = np.asarray(dirs, dtype=float).reshape(-1, 3)
        kind, p0, p1 = self._surface
        if method == "auto" and kind != _kernels.SURFACE_HILL:
            g = p0 if kind == _kernels.SURFACE_INCLINE else 0.0
            denom = dirs[:, 2] - g * dirs[:, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                s = (g * origins[:, 0] - origins[:, 2]) / denom
            above = origins[:, 2] - g * origins[:, 0] > 0
            s = np.where(above & (denom < 0) & (s > 0) & (s <= MAX_RAY), s, np.nan)
            return s
        return _kernels.intersect_surface(origins, dirs, kind, p0, p1, MAX_RAY)


def generate_scene(spec):
    return Scene(spec)


# ---------------------------------------------------------------- point map


def _rngs(seed, n):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def sample_point_map(scene, density=None, seed=None, voxel=2.0):
    """Jittered-grid sample of the surface. Returns ``(PointMap, true_channels)``."""
    density = scene.spec.density if density is None else density
    if not density > 0:
        raise ValidationError("density must be positive")
    seed = scene.spec.seed if seed is None else seed
    rng_xy, rng_i = _rngs([seed, 1], 2)
    xmin, xmax, ymin, ymax = scene.bounds
    step = 1.0 / np.sqrt(density)
    nx = int(np.floor((xmax - xmin) / step))
    ny = int(np.floor((ymax - ymin) / step))
    gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    x = xmin + (gx.ravel() + rng_xy.random(nx * ny)) * step
    y = ymin + (gy.ravel() + rng_xy.random(nx * ny)) * step
    z = scene.z(x, y)
    inten = scene.sample_intensity(x, y, rng_i)
    return PointMap(np.column_stack([x, y, z]), inten, voxel=voxel), scene.label(x, y)


# ---------------------------------------------------------------- trajectory


def make_trajectory(scene):
    """Poses following the path at constant speed, riding the surface (yaw and pitch)."""
    spec = scene.spec
    path = np.asarray(spec.path, dtype=float)
    seg = np.diff(path, axis=0)
    seglen = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    total = cum[-1]
    duration = total / spec.speed
    n = int(np.floor(duration * spec.pose_rate + 1e-9)) + 1
    ts = np.arange(n) / spec.pose_rate
    if ts[-1] < duration - 1e-9:
        ts = np.append(ts, duration)
    poses = []
    for t in ts:
        s = min(t * spec.speed, total)
        i = min(np.searchsorted(cum, s, side="right") - 1, len(seg) - 1)
        a = (s - cum[i]) / seglen[i]
        x, y = path[i] + a * seg[i]
        yaw = np.arctan2(seg[i][1], seg[i][0])
        slope = scene.dzdx(x) * np.cos(yaw)
        pitch = -np.arctan(slope)
        poses.append(Pose.from_xyz_ypr(float(t), [x, y, float(scene.z(x, y))], yaw, pitch))
    return Trajectory(poses)


def image_times(scene, traj):
    n = int(np.floor(traj.end * scene.spec.image_rate + 1e-9)) + 1
    return np.arange(n) / scene.spec.image_rate


# ---------------------------------------------------------------- images


def render_semantic_image(scene, cam, pose, labelset, return_hits=False, method="auto"):
    """Ground-truth label image for ``cam`` at ``pose``; one ray per pixel center.

    With ``return_hits`` also returns the (H, W, 3) world hit points, NaN where
    the ray leaves the scene.
    """
    u, v = np.meshgrid(np.arange(cam.width, dtype=float), np.arange(cam.height, dtype=float))
    d_body = cam.pixel_rays(u.ravel(), v.ravel())
    d_world = d_body @ pose.R.T
    o_world = pose.R @ cam.center_body + pose.translation
    origins = np.broadcast_to(o_world, d_world.shape)
    s = scene.intersect(origins, d_world, method=method)
    hits = origins + s[:, None] * d_world
    ch = scene.label(hits[:, 0], hits[:, 1])
    ch[np.isnan(s)] = -1
    lut = np.append(labelset.channel_to_id, UNLABELED).astype(np.uint8)
    labels = lut[ch].reshape(cam.height, cam.width)
    img = SemanticImage(labels, pose.timestamp)
    if return_hits:
        hits[np.isnan(s) | (ch < 0)] = np.nan
        return img, hits.reshape(cam.height, cam.width, 3)
    return img


def corrupt_labels(img, model, seed, labelset):
    """Resample each map-channel pixel from its true row of the confusion matrix.

    ``model`` is an ObservationModel (its unfloored matrix is used) or a raw
    row-stochastic array. Unlabeled and non-map pixels are left alone.
    """
    P = getattr(model, "P", model)
    P = np.asarray(P, dtype=float)
    P = P / P.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    ch = labelset.id_to_channel[img.labels]
    m = ch >= 0
    true = ch[m]
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    r = rng.random(true.shape[0])
    new = (r[:, None] >= cum[true]).sum(axis=1)
    out = img.labels.copy()
    out[m] = labelset.channel_to_id[np.minimum(new, P.shape[0] - 1)]
    return SemanticImage(out, img.timestamp)


# ---------------------------------------------------------------- ground truth


def ground_truth_raster(scene, spec, anchor=None):
    """Scene channel at each cell center; cells off the painted scene are UNKNOWN."""
    c = spec.cell_centers().reshape(-1, 2)
    if spec.frame == "local":
        if anchor is None:
            raise ValidationError("a local grid needs an anchor pose")
        pts = transform_points(anchor, np.column_stack([c, np.zeros(len(c))]), "body_to_world")
        c = pts[:, :2]
    ch = scene.label(c[:, 0], c[:, 1])
    out = np.where(ch >= 0, ch, UNKNOWN).astype(np.uint8)
    return out.reshape(spec.H, spec.W)


# ---------------------------------------------------------------- LiDAR


def simulate_scan(scene, pose, seed, lidar=None):
    """Spinning multi-beam sweep from ``pose``; returns a body-frame cloud and its true channels."""
    p = {**DEFAULT_LIDAR, **(lidar or scene.spec.lidar)}
    elev = np.deg2rad(np.linspace(p["elevation_min_deg"], p["elevation_max_deg"], int(p["beams"])))
    az = np.deg2rad(np.arange(0.0, 360.0, p["azimuth_step_deg"]))
    E, A = np.meshgrid(elev, az, indexing="ij")
    d_body = np.stack([np.cos(E) * np.cos(A), np.cos(E) * np.sin(A), np.sin(E)], axis=-1).reshape(-1, 3)
    o_body = np.array([0.0, 0.0, p["height"]])
    d_world = d_body @ pose.R.T
    o_world = pose.R @ o_body + pose.translation
    origins = np.broadcast_to(o_world, d_world.shape)
    s = scene.intersect(origins, d_world)
    ok = ~np.isnan(s) & (s <= p["max_range"])
    hits = origins[ok] + s[ok, None] * d_world[ok]
    inside = scene.inside(hits[:, 0], hits[:, 1])
    hits = hits[inside]
    rng = np.random.default_rng(seed)
    inten = scene.sample_intensity(hits[:, 0], hits[:, 1], rng)
    ch = scene.label(hits[:, 0], hits[:, 1])
    body = transform_points(pose, hits, "world_to_body")
    return SemanticPointCloud.unlabeled(body, inten, "body", pose), ch


# ---------------------------------------------------------------- dataset

# Confusion used by the default desk scene: crosswalks and lane marks are
# often read as road, and road is sometimes read as crosswalk.
DEFAULT_CORRUPTION = [
    [0.78, 0.15, 0.05, 0.01, 0.01],
    [0.50, 0.42, 0.04, 0.02, 0.02],
    [0.50, 0.02, 0.44, 0.02, 0.02],
    [0.02, 0.01, 0.01, 0.90, 0.06],
    [0.05, 0.01, 0.01, 0.05, 0.88],
]


def validation_counts(P, n_per_class, seed):
    """Confusion counts as a held-out evaluation of a labeller with row-stochastic ``P`` would report."""
    P = np.asarray(P, dtype=float)
    P = P / P.sum(axis=1, keepdims=True)
    rng = np.random.default_rng(seed)
    return np.stack([rng.multinomial(n_per_class, row) for row in P])


def write_dataset(spec, out_dir, labelset=None, scans=True):
    """Write a complete synthetic dataset plus a ready-to-run ``config.json``.

    Reruns with the same spec and seed produce byte-identical files.
    """
    labelset = labelset or default_labelset()
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    scene = Scene(spec)
    rng_map, rng_corrupt, rng_val, rng_scan = np.random.SeedSequence(spec.seed).spawn(4)
    files = []

    def record(p):
        files.append(str(Path(p).relative_to(out)))

    (out / "scene.json").write_text(json.dumps(spec.to_json(), indent=2) + "\n")
    record(out / "scene.json")
    labelset.save(out / "labels.json")
    record(out / "labels.json")
    (out / "camera.json").write_text(json.dumps(scene.camera.to_json(), indent=2) + "\n")
    record(out / "camera.json")

    pmap, truth = sample_point_map(scene, seed=int(rng_map.generate_state(1)[0]))
    io.write_ply(out / "map.ply", pmap.xyz, pmap.intensity)
    np.where(truth >= 0, truth, UNKNOWN).astype(np.uint8).tofile(out / "map_labels.u8")
    record(out / "map.ply")
    record(out / "map_labels.u8")

    traj = make_trajectory(scene)
    io.write_tum(out / "trajectory.txt", traj)
    record(out / "trajectory.txt")

    corruption = np.asarray(spec.corruption if spec.corruption is not None else np.eye(len(CHANNEL_NAMES)))
    seeds = rng_corrupt.generate_state(len(image_times(scene, traj)))
    gt_entries, noisy_entries = [], []
    for i, t in enumerate(image_times(scene, traj)):
        pose = interpolate_pose(traj, t)
        img = render_semantic_image(scene, scene.camera, pose, labelset)
        noisy = corrupt_labels(img, corruption, int(seeds[i]), labelset)
        g = out / "images" / f"gt_{i:04d}.png"
        n = out / "images" / f"noisy_{i:04d}.png"
        io.write_label_png(g, img.labels)
        io.write_label_png(n, noisy.labels)
        record(g)
        record(n)
        gt_entries.append((t, g.relative_to(out)))
        noisy_entries.append((t, n.relative_to(out)))
    io.write_manifest(out / "images_gt.json", gt_entries)
    io.write_manifest(out / "images_noisy.json", noisy_entries)
    record(out / "images_gt.json")
    record(out / "images_noisy.json")

    counts = validation_counts(corruption, 100_000, rng_val)
    save_confusion(out / "confusion.json", counts, labelset.channel_to_id)
    record(out / "confusion.json")

    clip = ClipWindow()
    gspec = GridSpec.covering_trajectory(traj.positions(), clip, 0.2)
    write_label_raster(out / "gt_raster.png", ground_truth_raster(scene, gspec), gspec, labelset.channel_colors)
    record(out / "gt_raster.png")
    record(out / "gt_raster.json")
    record(out / "gt_raster_render.png")

    if scans:
        (out / "scans").mkdir(exist_ok=True)
        lidar_rate = float(spec.lidar.get("rate_hz", 10.0))
        times = np.arange(int(np.floor(traj.end * lidar_rate + 1e-9)) + 1) / lidar_rate
        scan_seeds = rng_scan.generate_state(len(times))
        entries = []
        for i, t in enumerate(times):
            cloud, _ = simulate_scan(scene, interpolate_pose(traj, t), int(scan_seeds[i]))
            p = out / "scans" / f"scan_{i:04d}.ply"
            io.write_ply(p, cloud.xyz, cloud.intensity)
            record(p)
            entries.append((t, p.relative_to(out)))
        io.write_manifest(out / "scans.json", entries)
        record(out / "scans.json")

    noisy = spec.corruption is not None
    cfg = {
        "point_map": "map.ply",
        "trajectory": "trajectory.txt",
        "images": "images_noisy.json" if noisy else "images_gt.json",
        "labels": "labels.json",
        "camera": "camera.json",
        "confusion": "confusion.json",
        "scans": "scans.json" if scans else None,
        "out_dir": "map_out",
        "model": "cfn",
        "d": 0.2,
        "k": 14.0,
    }
    (out / "config.json").write_text(json.dumps(cfg, indent=2) + "\n")
    record(out / "config.json")

    manifest = {"seed": spec.seed, "frames": len(gt_entries), "files": sorted(files)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
