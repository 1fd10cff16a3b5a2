"""On-disk grid artifacts.

A grid directory holds a JSON sidecar plus raw little-endian rasters::

    grid.json        geometry, frame, anchor and the file names below
    logprob.f32      C x H x W float32, channel-major, row-major
    prob.f32         same layout, normalized probabilities
    observed.u8      H x W uint8 (0/1)
    labels_raw.png   argmax channel per cell, 255 = unknown
    labels.png       labels_raw after hole filling
    render.png       labels.png in label-set colors, unknown black

A bare label raster (e.g. ground truth) is a PNG with a sidecar of the same
stem carrying only the geometry.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from semmap.bevgrid.grid import UNKNOWN, GridSpec, SemanticGrid, extract_label_map, normalize
from semmap.core.geometry import Pose
from semmap.core.io import write_label_png, write_rgb_png
from semmap.errors import DimensionError, FormatError, ValidationError

SIDECAR = "grid.json"


def render_raster(raster, colors):
    """RGB image of a channel raster; UNKNOWN and out-of-range values are black."""
    colors = np.asarray(colors, dtype=np.uint8)
    lut = np.zeros((256, 3), dtype=np.uint8)
    lut[: len(colors)] = colors
    lut[UNKNOWN] = 0
    return lut[np.asarray(raster, dtype=np.uint8)]


def _pose_json(p):
    return None if p is None else {"timestamp": p.timestamp, "translation": p.translation.tolist(), "rotation": p.rotation.tolist()}


def _pose_from_json(doc):
    return None if doc is None else Pose(doc["timestamp"], doc["translation"], doc["rotation"])


def write_grid(out_dir, grid, colors, filled=None, extra=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw = extract_label_map(grid)
    filled = raw if filled is None else filled
    np.ascontiguousarray(np.moveaxis(grid.logprob, -1, 0), dtype="<f4").tofile(out / "logprob.f32")
    np.ascontiguousarray(np.moveaxis(normalize(grid), -1, 0), dtype="<f4").tofile(out / "prob.f32")
    grid.observed.astype(np.uint8).tofile(out / "observed.u8")
    write_label_png(out / "labels_raw.png", raw)
    write_label_png(out / "labels.png", filled)
    write_rgb_png(out / "render.png", render_raster(filled, colors))
    doc = grid.spec.to_json()
    doc.update(
        anchor=_pose_json(grid.anchor),
        logprob="logprob.f32",
        prob="prob.f32",
        observed="observed.u8",
        raster="labels.png",
        raw_raster="labels_raw.png",
        render="render.png",
        dtype="<f4",
        layout="CHW",
    )
    if extra:
        doc.update(extra)
    (out / SIDECAR).write_text(json.dumps(doc, indent=2) + "\n")
    return out / SIDECAR


def _load_sidecar(path):
    path = Path(path)
    if path.is_dir():
        path = path / SIDECAR
    if not path.exists():
        raise FormatError(path, "file not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.msg, line=exc.lineno) from exc
    try:
        spec = GridSpec.from_json(doc)
    except ValidationError as exc:
        raise FormatError(path, str(exc)) from exc
    return path, doc, spec


def _read_raw(path, dtype, count):
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    data = np.fromfile(path, dtype=dtype)
    if data.size != count:
        raise DimensionError(f"{path}: expected {count} values, found {data.size}")
    return data


def read_grid(path):
    """Reload a grid written by :func:`write_grid`; log-probabilities come back at float32 precision."""
    path, doc, spec = _load_sidecar(path)
    base = path.parent
    n = spec.H * spec.W
    lp = _read_raw(base / doc["logprob"], "<f4", n * spec.C).reshape(spec.C, spec.H, spec.W)
    obs = _read_raw(base / doc["observed"], np.uint8, n).reshape(spec.H, spec.W)
    return SemanticGrid(spec, _pose_from_json(doc.get("anchor")), np.moveaxis(lp, 0, -1).astype(float), obs.astype(bool))


def write_label_raster(png_path, raster, spec, colors=None):
    png_path = Path(png_path)
    raster = np.asarray(raster, dtype=np.uint8)
    if raster.shape != (spec.H, spec.W):
        raise DimensionError(f"raster shape {raster.shape} does not match grid {spec.H}x{spec.W}")
    write_label_png(png_path, raster)
    doc = spec.to_json()
    doc["raster"] = png_path.name
    if colors is not None:
        render = png_path.with_name(png_path.stem + "_render.png")
        write_rgb_png(render, render_raster(raster, colors))
        doc["render"] = render.name
    png_path.with_suffix(".json").write_text(json.dumps(doc, indent=2) + "\n")
    return png_path.with_suffix(".json")


def read_label_raster(path, raw=False):
    """Load ``(raster, spec)`` from a grid directory, a grid sidecar, or a raster sidecar/PNG."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        path = path.with_suffix(".json")
    path, doc, spec = _load_sidecar(path)
    key = "raw_raster" if raw and "raw_raster" in doc else "raster"
    png = path.parent / doc[key]
    if not png.exists():
        raise FormatError(png, "file not found")
    with Image.open(png) as im:
        arr = np.array(im, dtype=np.uint8)
    if arr.shape != (spec.H, spec.W):
        raise DimensionError(f"{png}: raster {arr.shape} does not match sidecar {spec.H}x{spec.W}")
    return arr, spec
