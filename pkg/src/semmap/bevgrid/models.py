"""Observation model P(z | S) and the lane-mark intensity prior."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from semmap.core.labels import LANE_MARK
from semmap.errors import DegenerateModelError, DimensionError, FormatError, ValidationError

EPS_FLOOR = 1e-6


def _floor_rows(M, eps):
    M = np.maximum(M, eps)
    return M / M.sum(axis=1, keepdims=True)


class ObservationModel:
    """Row-stochastic C x C matrix; row = true channel, column = predicted channel."""

    def __init__(self, M, eps_floor=EPS_FLOOR, name="custom"):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionError(f"observation matrix must be square, got {M.shape}")
        if np.any(M < 0) or not np.all(np.isfinite(M)):
            raise ValidationError("observation matrix entries must be finite and nonnegative")
        rs = M.sum(axis=1, keepdims=True)
        if np.any(rs <= 0):
            raise DegenerateModelError("observation matrix has an all-zero row")
        self.eps_floor = eps_floor
        # unfloored rows, kept for sampling
        self.P = M / rs
        self.M = _floor_rows(self.P, eps_floor)
        self.logM = np.log(self.M)
        self.name = name
        self.M.setflags(write=False)
        self.logM.setflags(write=False)

    @property
    def C(self):
        return self.M.shape[0]

    def __repr__(self):
        return f"ObservationModel({self.name}, C={self.C})"


def vanilla_model(lam, C=5, eps_floor=EPS_FLOOR):
    """Identity plus a uniform confusion ``lam``, row-normalized."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    return ObservationModel(np.eye(C) + lam * np.ones((C, C)), eps_floor, name=f"vanilla(lambda={lam})")


def confusion_model(counts, eps_floor=EPS_FLOOR):
    """Observation model from a segmentation confusion matrix (rows = ground truth)."""
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise DimensionError(f"confusion counts must be square, got {counts.shape}")
    if np.any(counts < 0):
        raise ValidationError("confusion counts must be nonnegative")
    zero = np.flatnonzero(counts.sum(axis=1) <= 0)
    if len(zero):
        raise DegenerateModelError(f"confusion rows {zero.tolist()} are empty; those classes were never evaluated")
    return ObservationModel(counts, eps_floor, name="cfn")


def restrict_confusion(counts, label_ids, labelset):
    """Cut a network-level confusion matrix down to the map channels.

    ``label_ids[i]`` is the label id of row/column ``i`` of ``counts``.
    """
    counts = np.asarray(counts, dtype=float)
    pos = {int(l): i for i, l in enumerate(label_ids)}
    try:
        sel = [pos[int(i)] for i in labelset.channel_to_id]
    except KeyError as exc:
        raise ValidationError(f"confusion matrix lacks map label id {exc}") from exc
    return counts[np.ix_(sel, sel)]


def load_confusion(path, labelset):
    """Read ``{"labels": [...ids...], "counts": [[...]]}`` and restrict to map channels."""
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.msg, line=exc.lineno) from exc
    try:
        counts = np.asarray(doc["counts"], dtype=float)
        ids = doc.get("labels")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(path, f"malformed confusion document: {exc}") from exc
    if ids is None:
        if counts.shape != (labelset.num_channels,) * 2:
            raise FormatError(path, "counts without 'labels' must be indexed by map channel")
        return counts
    return restrict_confusion(counts, ids, labelset)


def save_confusion(path, counts, label_ids):
    doc = {"labels": [int(i) for i in label_ids], "counts": np.asarray(counts).astype(int).tolist()}
    Path(path).write_text(json.dumps(doc) + "\n")


@dataclass(frozen=True)
class IntensityModel:
    """Additive log-probability boost for bright returns labelled as lane marks.

    ``rule="and"`` boosts only points that are both predicted lane-mark and at
    least ``k`` bright; ``rule="intensity"`` boosts every bright point.
    """

    k: float = 14.0
    gamma: float = 0.5
    target_channel: int = LANE_MARK
    rule: str = "and"

    def __post_init__(self):
        if self.gamma < 0:
            raise ValidationError("gamma must be nonnegative")
        if self.rule not in ("and", "intensity"):
            raise ValidationError(f"unknown boost rule {self.rule!r}")

    def mask(self, channels, intensity):
        bright = np.asarray(intensity) >= self.k
        if self.rule == "and":
            return bright & (np.asarray(channels) == self.target_channel)
        return bright
