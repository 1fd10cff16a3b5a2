"""Per-class IoU, recall-style pixel accuracy and mIoU over label rasters."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from semmap.bevgrid.grid import UNKNOWN
from semmap.core.labels import CHANNEL_NAMES
from semmap.errors import DimensionError


@dataclass
class ClassMetrics:
    channel: int
    name: str
    iou: float | None
    accuracy: float | None
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass
class EvalReport:
    per_class: list = field(default_factory=list)
    miou: float | None = None
    evaluated_classes: list = field(default_factory=list)
    cells_compared: int = 0

    def to_json(self):
        return {
            "per_class": [asdict(m) for m in self.per_class],
            "miou": self.miou,
            "evaluated_classes": list(self.evaluated_classes),
            "cells_compared": self.cells_compared,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2) + "\n"

    def table(self):
        """Plain-text table laid out like the usual IoU | mIoU | Accuracy comparison."""
        names = [m.name for m in self.per_class]

        def fmt(v):
            return "  n/a" if v is None else f"{v:.3f}"

        w = max(8, *(len(n) for n in names)) if names else 8
        head = ["IoU".center((w + 1) * len(names)), "mIoU", "Accuracy".center((w + 1) * len(names))]
        sub = " ".join(n.rjust(w) for n in names)
        lines = [
            " | ".join(head),
            " | ".join([sub, " " * 4, sub]),
            "-" * (2 * len(sub) + 12),
            " | ".join(
                [
                    " ".join(fmt(m.iou).rjust(w) for m in self.per_class),
                    fmt(self.miou).rjust(4),
                    " ".join(fmt(m.accuracy).rjust(w) for m in self.per_class),
                ]
            ),
            f"cells compared: {self.cells_compared}",
        ]
        return "\n".join(lines) + "\n"


def _check(pred, gt):
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise DimensionError(f"prediction {pred.shape} and ground truth {gt.shape} differ in shape")
    return pred, gt


def confusion_counts(pred, gt, channel):
    """TP, FP, FN, TN for one class over ground-truth-known cells."""
    pred, gt = _check(pred, gt)
    known = gt != UNKNOWN
    p = (pred == channel) & known
    g = gt == channel
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(g & ~p))
    tn = int(np.count_nonzero(known)) - tp - fp - fn
    return tp, fp, fn, tn


def compute_iou(pred, gt, channel):
    """TP / (TP + FP + FN); None when the class is absent from both rasters."""
    tp, fp, fn, _ = confusion_counts(pred, gt, channel)
    denom = tp + fp + fn
    return None if denom == 0 else tp / denom


def compute_accuracy(pred, gt, channel):
    """Per-class recall TP / (TP + FN); None when the class is absent from ground truth."""
    tp, _, fn, _ = confusion_counts(pred, gt, channel)
    denom = tp + fn
    return None if denom == 0 else tp / denom


def evaluate(pred, gt, classes=(0, 1, 2), names=CHANNEL_NAMES):
    pred, gt = _check(pred, gt)
    per = []
    for c in classes:
        tp, fp, fn, tn = confusion_counts(pred, gt, c)
        iou = None if tp + fp + fn == 0 else tp / (tp + fp + fn)
        acc = None if tp + fn == 0 else tp / (tp + fn)
        per.append(ClassMetrics(int(c), names[c], iou, acc, tp, fp, fn, tn))
    defined = [m.iou for m in per if m.iou is not None]
    miou = float(np.mean(defined)) if defined else None
    return EvalReport(per, miou, [int(c) for c in classes], int(np.count_nonzero(gt != UNKNOWN)))
