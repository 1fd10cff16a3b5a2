"""Readers and writers for trajectories, point maps, label images and manifests."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from semmap.core.geometry import Pose, Trajectory
from semmap.core.pointmap import PointMap
from semmap.core.types import SemanticImage
from semmap.errors import FormatError, ValidationError

# ---------------------------------------------------------------- trajectory


def read_tum(path):
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    poses = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 8:
            raise FormatError(path, f"expected 8 fields, got {len(parts)}", line=lineno)
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(path, str(exc), line=lineno) from exc
        try:
            poses.append(Pose(vals[0], vals[1:4], vals[4:8]))
        except ValidationError as exc:
            raise FormatError(path, str(exc), line=lineno) from exc
    try:
        return Trajectory(poses)
    except ValidationError as exc:
        raise FormatError(path, str(exc)) from exc


def write_tum(path, traj):
    lines = ["# timestamp tx ty tz qx qy qz qw"]
    for p in traj:
        vals = [p.timestamp, *p.translation, *p.rotation]
        lines.append(" ".join(repr(float(v)) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- PLY / CSV

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _parse_ply_header(path, fh):
    magic = fh.readline()
    if magic.strip() != b"ply":
        raise FormatError(path, "missing 'ply' magic", line=1)
    fmt = None
    vertex_count = None
    props = []
    in_vertex = False
    lineno = 1
    while True:
        raw = fh.readline()
        lineno += 1
        if not raw:
            raise FormatError(path, "unterminated header", line=lineno)
        tok = raw.decode("ascii", errors="replace").split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "element":
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                vertex_count = int(tok[2])
            elif vertex_count is None:
                raise FormatError(path, "elements before vertex are not supported", line=lineno)
        elif tok[0] == "property" and in_vertex:
            if tok[1] == "list":
                raise FormatError(path, "list properties on vertices are not supported", line=lineno)
            if tok[1] not in _PLY_TYPES:
                raise FormatError(path, f"unknown property type {tok[1]!r}", line=lineno)
            props.append((tok[2], _PLY_TYPES[tok[1]]))
        elif tok[0] == "end_header":
            break
    if fmt not in ("ascii", "binary_little_endian"):
        raise FormatError(path, f"unsupported PLY format {fmt!r}")
    if vertex_count is None:
        raise FormatError(path, "no vertex element")
    names = [p[0] for p in props]
    for req in ("x", "y", "z", "intensity"):
        if req not in names:
            raise FormatError(path, f"vertex property {req!r} missing")
    return fmt, vertex_count, props, lineno


def read_ply(path):
    """Return ``(xyz, intensity)`` from an ASCII or binary little-endian PLY."""
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    with path.open("rb") as fh:
        fmt, n, props, header_lines = _parse_ply_header(path, fh)
        dtype = np.dtype([(name, "<" + t) for name, t in props])
        if fmt == "binary_little_endian":
            offset = fh.tell()
            buf = fh.read(n * dtype.itemsize)
            if len(buf) < n * dtype.itemsize:
                raise FormatError(path, f"truncated vertex data: need {n * dtype.itemsize} bytes", offset=offset)
            data = np.frombuffer(buf, dtype=dtype, count=n)
        else:
            rows = []
            for i in range(n):
                line = fh.readline()
                parts = line.split()
                if len(parts) != len(props):
                    raise FormatError(path, f"expected {len(props)} values", line=header_lines + i + 1)
                rows.append(tuple(float(v) for v in parts))
            data = np.array(rows, dtype=[(name, "f8") for name, _ in props]) if rows else np.zeros(0, dtype)
    xyz = np.column_stack([data["x"], data["y"], data["z"]]).astype(float)
    return xyz, np.asarray(data["intensity"], dtype=float)


def write_ply(path, xyz, intensity, binary=True):
    xyz = np.asarray(xyz, dtype=np.float32).reshape(-1, 3)
    inten = np.asarray(intensity, dtype=np.float32).reshape(len(xyz))
    fmt = "binary_little_endian" if binary else "ascii"
    header = (
        f"ply\nformat {fmt} 1.0\nelement vertex {len(xyz)}\n"
        "property float x\nproperty float y\nproperty float z\nproperty float intensity\nend_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            rec = np.empty(len(xyz), dtype=[("x", "<f4"), ("y", "<f4"), ("z", "<f4"), ("intensity", "<f4")])
            rec["x"], rec["y"], rec["z"] = xyz.T
            rec["intensity"] = inten
            fh.write(rec.tobytes())
        else:
            for row in np.column_stack([xyz, inten]).tolist():
                fh.write((" ".join(map(repr, row)) + "\n").encode("ascii"))


def read_csv_points(path):
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    lines = path.read_text().splitlines()
    if not lines:
        raise FormatError(path, "empty file", line=1)
    header = [h.strip() for h in lines[0].split(",")]
    if header != ["x", "y", "z", "intensity"]:
        raise FormatError(path, "header must be x,y,z,intensity", line=1)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(path, str(exc), line=lineno) from exc
        if len(parts) != 4:
            raise FormatError(path, f"expected 4 values, got {len(parts)}", line=lineno)
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    return arr[:, :3], arr[:, 3]


def write_csv_points(path, xyz, intensity):
    with open(path, "w") as fh:
        fh.write("x,y,z,intensity\n")
        rows = np.column_stack([np.asarray(xyz, dtype=float).reshape(-1, 3), np.asarray(intensity, dtype=float)])
        for row in rows.tolist():
            fh.write(",".join(map(repr, row)) + "\n")


def read_points(path):
    path = Path(path)
    if path.suffix.lower() == ".csv":
        xyz, inten = read_csv_points(path)
    else:
        xyz, inten = read_ply(path)
    if len(inten) and (np.nanmin(inten) < 0 or np.nanmax(inten) > 255):
        raise FormatError(path, "intensity outside [0, 255]")
    return xyz, inten


def read_point_map(path, voxel=2.0):
    xyz, inten = read_points(path)
    return PointMap(xyz, inten, voxel=voxel)


# ---------------------------------------------------------------- images


def read_label_png(path, timestamp=None):
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    try:
        with Image.open(path) as im:
            if im.mode not in ("L", "P"):
                raise FormatError(path, f"expected 8-bit single-channel PNG, got mode {im.mode}")
            arr = np.array(im, dtype=np.uint8)
    except OSError as exc:
        raise FormatError(path, str(exc)) from exc
    return SemanticImage(arr, timestamp)


def write_label_png(path, labels):
    Image.fromarray(np.asarray(labels, dtype=np.uint8), mode="L").save(path, optimize=False)


def write_rgb_png(path, rgb):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path, optimize=False)


# ---------------------------------------------------------------- manifests


def read_manifest(path):
    """JSON array of ``{"timestamp", "path"}``; relative paths resolve against the manifest."""
    path = Path(path)
    if not path.exists():
        raise FormatError(path, "file not found")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, list):
        raise FormatError(path, "manifest must be a JSON array")
    out = []
    for i, item in enumerate(doc):
        try:
            out.append((float(item["timestamp"]), path.parent / item["path"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(path, f"entry {i}: {exc}") from exc
    out.sort(key=lambda e: e[0])
    return out


def write_manifest(path, entries):
    doc = [{"timestamp": float(t), "path": str(p)} for t, p in entries]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")
