"""Semantic occupancy grid in log-probability form.

Cells hold unnormalized log-probabilities over the map channels. Each
observation adds a column of the log observation matrix; normalization is
done on demand, since the constant cancels in every argmax.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from semmap import _kernels
from semmap.core.geometry import Pose, transform_points
from semmap.core.labels import CHANNEL_NAMES, NUM_CHANNELS, default_labelset
from semmap.errors import DimensionError, ValidationError

UNKNOWN = 255


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a grid: ``origin`` is the (x, y) of the lower-left corner of cell (0, 0)."""

    frame: str
    origin: tuple
    H: int
    W: int
    d: float
    C: int = NUM_CHANNELS
    channel_names: tuple = CHANNEL_NAMES

    def __post_init__(self):
        if self.frame not in ("local", "global"):
            raise ValidationError(f"grid frame must be 'local' or 'global', got {self.frame!r}")
        if not self.d > 0:
            raise ValidationError("cell size d must be positive")
        if self.H < 0 or self.W < 0:
            raise ValidationError("grid dimensions must be nonnegative")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "channel_names", tuple(self.channel_names))

    @classmethod
    def from_bounds(cls, frame, xmin, xmax, ymin, ymax, d, C=NUM_CHANNELS):
        x0 = np.floor(xmin / d) * d
        y0 = np.floor(ymin / d) * d
        W = int(np.ceil(round((xmax - x0) / d, 9)))
        H = int(np.ceil(round((ymax - y0) / d, 9)))
        return cls(frame, (round(x0, 9), round(y0, 9)), H, W, d, C)

    @classmethod
    def covering_trajectory(cls, positions, clip, d, C=NUM_CHANNELS):
        """Global grid over the trajectory's xy bounding box grown by the clip reach."""
        p = np.asarray(positions, dtype=float).reshape(-1, 3)
        reach_x = max(abs(clip.longitudinal_min), abs(clip.longitudinal_max))
        reach_y = max(abs(clip.lateral_min), abs(clip.lateral_max))
        margin = max(reach_x, reach_y)
        if len(p) == 0:
            return cls.from_bounds("global", -margin, margin, -margin, margin, d, C)
        return cls.from_bounds(
            "global",
            p[:, 0].min() - margin,
            p[:, 0].max() + margin,
            p[:, 1].min() - margin,
            p[:, 1].max() + margin,
            d,
            C,
        )

    def same_geometry(self, other, tol=1e-9):
        return (
            self.frame == other.frame
            and self.H == other.H
            and self.W == other.W
            and self.C == other.C
            and abs(self.d - other.d) <= tol
            and abs(self.origin[0] - other.origin[0]) <= tol
            and abs(self.origin[1] - other.origin[1]) <= tol
        )

    def cell_centers(self):
        """(H, W, 2) array of cell-center coordinates in the grid frame."""
        xs = self.origin[0] + (np.arange(self.W) + 0.5) * self.d
        ys = self.origin[1] + (np.arange(self.H) + 0.5) * self.d
        X, Y = np.meshgrid(xs, ys)
        return np.stack([X, Y], axis=-1)

    def to_json(self):
        return {
            "frame": self.frame,
            "origin": list(self.origin),
            "d": self.d,
            "H": self.H,
            "W": self.W,
            "C": self.C,
            "channel_names": list(self.channel_names),
        }

    @classmethod
    def from_json(cls, doc):
        try:
            return cls(
                doc["frame"],
                tuple(doc["origin"]),
                int(doc["H"]),
                int(doc["W"]),
                float(doc["d"]),
                int(doc["C"]),
                tuple(doc.get("channel_names", CHANNEL_NAMES)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed grid sidecar: {exc}") from exc


@dataclass(eq=False)
class SemanticGrid:
    spec: GridSpec
    anchor: Pose | None = None
    logprob: np.ndarray = field(default=None, repr=False)
    observed: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        s = self.spec
        if s.frame == "local" and self.anchor is None:
            raise ValidationError("a local grid needs an anchor pose")
        if self.logprob is None:
            self.logprob = np.zeros((s.H, s.W, s.C))
        if self.observed is None:
            self.observed = np.zeros((s.H, s.W), dtype=bool)
        if self.logprob.shape != (s.H, s.W, s.C) or self.observed.shape != (s.H, s.W):
            raise DimensionError("grid arrays do not match the grid spec")

    @classmethod
    def empty(cls, spec, anchor=None):
        return cls(spec, anchor)

    @property
    def frame(self):
        return self.spec.frame

    @property
    def H(self):
        return self.spec.H

    @property
    def W(self):
        return self.spec.W

    @property
    def C(self):
        return self.spec.C

    @property
    def d(self):
        return self.spec.d

    def copy(self):
        return SemanticGrid(self.spec, self.anchor, self.logprob.copy(), self.observed.copy())


def cells_of(spec, x, y):
    """Vectorized cell lookup. Returns ``(rows, cols, inside)``."""
    col = np.floor((np.asarray(x, dtype=float) - spec.origin[0]) / spec.d).astype(np.int64)
    row = np.floor((np.asarray(y, dtype=float) - spec.origin[1]) / spec.d).astype(np.int64)
    inside = (col >= 0) & (col < spec.W) & (row >= 0) & (row < spec.H)
    return row, col, inside


def grid_index(grid, x, y):
    """Cell ``(row, col)`` holding grid-frame point (x, y), or None outside the grid."""
    spec = grid.spec if isinstance(grid, SemanticGrid) else grid
    r, c, ok = cells_of(spec, x, y)
    if not ok:
        return None
    return int(r), int(c)


def update_cell(grid, cell, z, model):
    r, c = cell
    grid.logprob[r, c, :] += model.logM[:, z]
    grid.observed[r, c] = True


def apply_intensity_boost(grid, cell, point_label, intensity, model):
    if point_label == model.target_channel and intensity >= model.k:
        r, c = cell
        grid.logprob[r, c, model.target_channel] += model.gamma


def cloud_in_grid_frame(grid, cloud):
    """xy of a cloud expressed in the frame the grid is indexed in."""
    if grid.frame == "global":
        xyz = cloud.to_world().xyz
    elif cloud.frame == "body" and cloud.pose is grid.anchor:
        xyz = cloud.xyz
    else:
        xyz = cloud.to_body(grid.anchor).xyz
    return xyz[:, 0], xyz[:, 1]


def integrate_frame(grid, cloud, obs_model, int_model=None, labelset=None, one_vote_per_cell=False):
    """Fold one labelled cloud into ``grid`` in place.

    Points whose label has no map channel (cars, people, ...) or which fall
    outside the grid are skipped. ``one_vote_per_cell`` collapses each
    cell's points in this frame into a single observation of their mode.
    """
    if len(cloud) == 0:
        return grid
    if obs_model.C != grid.C:
        raise DimensionError(f"model has {obs_model.C} channels, grid has {grid.C}")
    if labelset is None:
        labelset = default_labelset()
    ch = labelset.id_to_channel[cloud.labels].astype(np.int64)
    x, y = cloud_in_grid_frame(grid, cloud)
    rows, cols, inside = cells_of(grid.spec, x, y)
    keep = inside & (ch >= 0)
    rows, cols, ch, inten = rows[keep], cols[keep], ch[keep], cloud.intensity[keep]
    if int_model is not None:
        boost = int_model.mask(ch, inten)
        gamma, target = int_model.gamma, int_model.target_channel
    else:
        boost = np.zeros(len(ch), dtype=bool)
        gamma, target = 0.0, 0
    if one_vote_per_cell and len(ch):
        rows, cols, ch, boost = _collapse_votes(grid, rows, cols, ch, boost)
    _kernels.accumulate(grid.logprob, grid.observed, rows, cols, ch, obs_model.logM, boost, gamma, target)
    return grid


def _collapse_votes(grid, rows, cols, ch, boost):
    flat = rows * grid.W + cols
    cells, inv = np.unique(flat, return_inverse=True)
    counts = np.zeros((len(cells), grid.C), dtype=np.int64)
    np.add.at(counts, (inv, ch), 1)
    mode = np.argmax(counts, axis=1)
    any_boost = np.zeros(len(cells), dtype=bool)
    np.logical_or.at(any_boost, inv, boost & (ch == mode[inv]))
    return cells // grid.W, cells % grid.W, mode, any_boost


def normalize(grid):
    """Per-cell softmax of the log-probabilities, as a new (H, W, C) array."""
    lp = grid.logprob
    m = lp.max(axis=-1, keepdims=True)
    e = np.exp(lp - m)
    return e / e.sum(axis=-1, keepdims=True)


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def maybe_shift_local_map(grid, new_pose, threshold_trans=1.0, threshold_rot=0.1):
    """Re-anchor a local grid at ``new_pose`` once the vehicle has moved far enough.

    Below both thresholds the same grid object is returned. Otherwise every
    cell of the new grid copies the old cell containing its center.
    """
    if grid.frame != "local":
        raise ValidationError("only local grids can be shifted")
    old = grid.anchor
    dt = float(np.linalg.norm(new_pose.translation - old.translation))
    dyaw = abs(_wrap(new_pose.yaw - old.yaw))
    if dt < threshold_trans and dyaw < threshold_rot:
        return grid
    return resample_to_anchor(grid, new_pose)


def resample_to_anchor(grid, new_pose):
    spec = grid.spec
    centers = spec.cell_centers().reshape(-1, 2)
    pts = np.column_stack([centers, np.zeros(len(centers))])
    world = transform_points(new_pose, pts, "body_to_world")
    in_old = transform_points(grid.anchor, world, "world_to_body")
    r, c, ok = cells_of(spec, in_old[:, 0], in_old[:, 1])
    out = SemanticGrid(spec, new_pose)
    lp = out.logprob.reshape(-1, spec.C)
    ob = out.observed.reshape(-1)
    lp[ok] = grid.logprob[r[ok], c[ok]]
    ob[ok] = grid.observed[r[ok], c[ok]]
    return out


def extract_label_map(grid):
    """Argmax channel per observed cell (ties to the lowest index); UNKNOWN elsewhere."""
    lab = np.argmax(grid.logprob, axis=-1).astype(np.uint8)
    lab[~grid.observed] = UNKNOWN
    return lab


def fill_holes(raster, window=3, min_votes=3, n_channels=NUM_CHANNELS):
    """One pass of neighbourhood-mode filling for UNKNOWN cells; known cells never change."""
    if window < 3 or window % 2 == 0:
        raise ValidationError("fill window must be odd and at least 3")
    return _kernels.fill_holes(raster, window, min_votes, n_channels, UNKNOWN)
