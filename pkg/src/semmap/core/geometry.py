"""Rigid-body poses, trajectories, interpolation and frame changes.

Quaternions are stored scalar-last ``(qx, qy, qz, qw)`` to match the TUM
trajectory layout. The body frame is x forward, y left, z up.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from semmap.errors import EmptyInputError, OutOfRangeError, ValidationError

_QUAT_TOL = 1e-6


def quat_to_matrix(q):
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R):
    """Rotation matrix to unit quaternion (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = [(R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s, 0.25 * s]
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s, (R[2, 1] - R[1, 2]) / s]
    elif R[1, 1] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s, (R[0, 2] - R[2, 0]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s, (R[1, 0] - R[0, 1]) / s]
    q = np.array(q)
    return q / np.linalg.norm(q)


def quat_from_ypr(yaw, pitch=0.0, roll=0.0):
    """Quaternion for intrinsic z-y-x rotation (yaw, then pitch, then roll)."""
    cy, sy = np.cos(yaw / 2), np.sin(yaw / 2)
    cp, sp = np.cos(pitch / 2), np.sin(pitch / 2)
    cr, sr = np.cos(roll / 2), np.sin(roll / 2)
    return np.array(
        [
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
            cr * cp * cy + sr * sp * sy,
        ]
    )


def slerp(q0, q1, alpha):
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        # shortest path
        q1 = -q1
        dot = -dot
    if dot > 0.9995:
        q = q0 + alpha * (q1 - q0)
        return q / np.linalg.norm(q)
    theta = np.arccos(min(dot, 1.0))
    s = np.sin(theta)
    return (np.sin((1 - alpha) * theta) * q0 + np.sin(alpha * theta) * q1) / s


def rotation_angle_between(q0, q1):
    """Angle in radians of the relative rotation between two unit quaternions."""
    d = abs(float(np.dot(q0, q1)))
    return 2.0 * np.arccos(min(d, 1.0))


@dataclass(frozen=True, eq=False)
class Pose:
    timestamp: float
    translation: np.ndarray
    rotation: np.ndarray  # (qx, qy, qz, qw)
    _R: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3)
        q = np.asarray(self.rotation, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > _QUAT_TOL:
            raise ValidationError(f"quaternion norm {n:.9f} is not within {_QUAT_TOL} of 1")
        t.setflags(write=False)
        q.setflags(write=False)
        R = quat_to_matrix(q)
        R.setflags(write=False)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "_R", R)

    @classmethod
    def identity(cls, timestamp=0.0):
        return cls(timestamp, np.zeros(3), np.array([0.0, 0.0, 0.0, 1.0]))

    @classmethod
    def from_xyz_ypr(cls, timestamp, xyz, yaw, pitch=0.0, roll=0.0):
        return cls(timestamp, np.asarray(xyz, dtype=float), quat_from_ypr(yaw, pitch, roll))

    @property
    def R(self):
        """Body-to-world rotation matrix."""
        return self._R

    @property
    def yaw(self):
        return float(np.arctan2(self._R[1, 0], self._R[0, 0]))

    def matrix(self):
        T = np.eye(4)
        T[:3, :3] = self._R
        T[:3, 3] = self.translation
        return T

    def with_timestamp(self, t):
        return Pose(t, self.translation, self.rotation)

    def __repr__(self):
        t = ", ".join(f"{v:.4f}" for v in self.translation)
        q = ", ".join(f"{v:.4f}" for v in self.rotation)
        return f"Pose(t={self.timestamp:.6f}, xyz=({t}), q=({q}))"


class Trajectory:
    """Time-ordered pose sequence."""

    def __init__(self, poses):
        self.poses = tuple(poses)
        ts = np.array([p.timestamp for p in self.poses], dtype=float)
        if len(ts) > 1 and not np.all(np.diff(ts) > 0):
            bad = int(np.argmin(np.diff(ts) > 0)) + 1
            raise ValidationError(f"timestamps not strictly increasing at index {bad}")
        self.timestamps = ts

    def __len__(self):
        return len(self.poses)

    def __iter__(self):
        return iter(self.poses)

    def __getitem__(self, i):
        return self.poses[i]

    @property
    def start(self):
        return float(self.timestamps[0])

    @property
    def end(self):
        return float(self.timestamps[-1])

    def positions(self):
        return np.array([p.translation for p in self.poses]).reshape(-1, 3)


def interpolate_pose(traj, t, nearest=False):
    """Pose at time ``t``: lerp on translation, slerp on rotation.

    With ``nearest=True`` the closest stored sample is returned instead,
    retimed to ``t``.
    """
    if len(traj) == 0:
        raise EmptyInputError("trajectory has no poses")
    ts = traj.timestamps
    if not ts[0] <= t <= ts[-1]:
        raise OutOfRangeError(f"t={t} outside trajectory range [{ts[0]}, {ts[-1]}]")
    i = bisect.bisect_left(ts, t)
    if i < len(ts) and ts[i] == t:
        return traj[i]
    p0, p1 = traj[i - 1], traj[i]
    alpha = (t - p0.timestamp) / (p1.timestamp - p0.timestamp)
    if nearest:
        return (p0 if alpha <= 0.5 else p1).with_timestamp(t)
    trans = (1 - alpha) * p0.translation + alpha * p1.translation
    return Pose(t, trans, slerp(p0.rotation, p1.rotation, alpha))


def transform_points(pose, pts, direction="body_to_world"):
    """Apply ``pose`` to the xyz columns of ``pts``; any extra columns pass through.

    ``direction`` is ``"body_to_world"`` or ``"world_to_body"``.
    """
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    out = pts.copy()
    if direction == "body_to_world":
        out[:, :3] = pts[:, :3] @ pose.R.T + pose.translation
    elif direction == "world_to_body":
        out[:, :3] = (pts[:, :3] - pose.translation) @ pose.R
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return out


def relative_points(src, dst, pts):
    """Re-express body-frame points of pose ``src`` in the body frame of ``dst``."""
    return transform_points(dst, transform_points(src, pts, "body_to_world"), "world_to_body")
