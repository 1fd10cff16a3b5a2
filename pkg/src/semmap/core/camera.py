"""Rectified pinhole camera with a body-to-camera extrinsic.

Camera frame follows the optical convention: x right, y down, z forward.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from semmap.errors import ValidationError


@dataclass(frozen=True, eq=False)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    # p_cam = R_cb @ p_body + t_cb
    R_cb: np.ndarray = field(default_factory=lambda: np.eye(3))
    t_cb: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValidationError("principal point must lie inside the image")
        R = np.asarray(self.R_cb, dtype=float).reshape(3, 3)
        if not np.allclose(R @ R.T, np.eye(3), atol=1e-9) or np.linalg.det(R) < 0:
            raise ValidationError("extrinsic rotation is not a proper rotation")
        object.__setattr__(self, "R_cb", R)
        object.__setattr__(self, "t_cb", np.asarray(self.t_cb, dtype=float).reshape(3))

    @classmethod
    def forward_facing(cls, fx, fy, cx, cy, width, height, position=(0.0, 0.0, 1.5), pitch=0.0):
        """Camera at ``position`` in the body frame looking along +x, tilted down by ``pitch`` rad."""
        c, s = np.cos(pitch), np.sin(pitch)
        z_cam = np.array([c, 0.0, -s])
        x_cam = np.array([0.0, -1.0, 0.0])
        y_cam = np.cross(z_cam, x_cam)
        R_bc = np.column_stack([x_cam, y_cam, z_cam])  # camera axes in body
        R_cb = R_bc.T
        t_cb = -R_cb @ np.asarray(position, dtype=float)
        return cls(fx, fy, cx, cy, width, height, R_cb, t_cb)

    @property
    def K(self):
        return np.array([[self.fx, 0, self.cx], [0, self.fy, self.cy], [0, 0, 1.0]])

    @property
    def center_body(self):
        """Optical center in body coordinates."""
        return -self.R_cb.T @ self.t_cb

    def body_to_camera(self, pts):
        return np.asarray(pts, dtype=float)[:, :3] @ self.R_cb.T + self.t_cb

    def pixel_rays(self, u, v):
        """Unit ray directions in the body frame through pixel coordinates (u, v)."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        d_cam = np.stack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)], axis=-1)
        d_body = d_cam @ self.R_cb
        return d_body / np.linalg.norm(d_body, axis=-1, keepdims=True)

    def to_json(self):
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "width": self.width,
            "height": self.height,
            "R_cb": self.R_cb.tolist(),
            "t_cb": self.t_cb.tolist(),
        }

    @classmethod
    def from_json(cls, doc):
        try:
            return cls(
                float(doc["fx"]),
                float(doc["fy"]),
                float(doc["cx"]),
                float(doc["cy"]),
                int(doc["width"]),
                int(doc["height"]),
                np.array(doc.get("R_cb", np.eye(3)), dtype=float),
                np.array(doc.get("t_cb", np.zeros(3)), dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed camera description: {exc}") from exc
