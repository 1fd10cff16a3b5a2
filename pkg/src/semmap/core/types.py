from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from semmap.core.geometry import transform_points
from semmap.core.labels import UNLABELED
from semmap.errors import ValidationError


@dataclass(eq=False)
class SemanticImage:
    """Per-pixel label ids, shape (height, width), uint8. 255 marks unlabeled pixels."""

    labels: np.ndarray
    timestamp: float | None = None

    def __post_init__(self):
        a = np.asarray(self.labels)
        if a.ndim != 2:
            raise ValidationError(f"label raster must be 2-D, got shape {a.shape}")
        self.labels = a.astype(np.uint8, copy=False)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    def check(self, labelset):
        if not labelset.valid_ids[self.labels].all():
            bad = np.unique(self.labels[~labelset.valid_ids[self.labels]])
            raise ValidationError(f"image contains ids not in the label set: {bad.tolist()}")


@dataclass(eq=False)
class SemanticPointCloud:
    """Points with label ids and intensity, in the world frame or a body frame.

    ``pose`` is the body pose the points are expressed in when ``frame == "body"``.
    """

    xyz: np.ndarray
    labels: np.ndarray
    intensity: np.ndarray
    frame: str = "world"
    pose: object = None

    def __post_init__(self):
        self.xyz = np.asarray(self.xyz, dtype=float).reshape(-1, 3)
        n = len(self.xyz)
        self.labels = np.asarray(self.labels, dtype=np.uint8).reshape(n)
        self.intensity = np.asarray(self.intensity, dtype=float).reshape(n)
        if self.frame not in ("world", "body"):
            raise ValidationError(f"unknown frame {self.frame!r}")
        if self.frame == "body" and self.pose is None:
            raise ValidationError("body-frame cloud needs its pose")

    def __len__(self):
        return len(self.xyz)

    @classmethod
    def empty(cls, frame="world", pose=None):
        return cls(np.zeros((0, 3)), np.zeros(0, np.uint8), np.zeros(0), frame, pose)

    @classmethod
    def unlabeled(cls, xyz, intensity, frame="world", pose=None):
        return cls(xyz, np.full(len(xyz), UNLABELED, np.uint8), intensity, frame, pose)

    def subset(self, idx):
        return SemanticPointCloud(self.xyz[idx], self.labels[idx], self.intensity[idx], self.frame, self.pose)

    def to_world(self):
        if self.frame == "world":
            return self
        xyz = transform_points(self.pose, self.xyz, "body_to_world")
        return SemanticPointCloud(xyz, self.labels, self.intensity, "world", None)

    def to_body(self, pose):
        world = self.to_world()
        xyz = transform_points(pose, world.xyz, "world_to_body")
        return SemanticPointCloud(xyz, self.labels, self.intensity, "body", pose)

    def check(self, labelset):
        if not labelset.valid_ids[self.labels].all():
            raise ValidationError("cloud carries label ids not in the label set")
