"""Command-line entry point: ``semmap build-map | eval | synth | render``.

Exit codes: 0 success, 1 usage or config error, 2 input parse error,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from semmap.baselines import live_frame_clouds, planar_frame_clouds
from semmap.bevgrid import export
from semmap.bevgrid.grid import GridSpec, extract_label_map, fill_holes, normalize
from semmap.bevgrid.models import IntensityModel, confusion_model, load_confusion, vanilla_model
from semmap.config import RunConfig
from semmap.core import io
from semmap.core.camera import CameraModel
from semmap.core.labels import CHANNEL_NAMES, LabelSet, default_labelset
from semmap.errors import DimensionError, FormatError, SemmapError, ValidationError
from semmap.evaluation import evaluate
from semmap.pipeline import FrameStats, dense_frame_clouds, map_clouds
from semmap.synthscene import SceneSpec, default_scene_spec, write_dataset

log = logging.getLogger("semmap")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


class InvariantError(SemmapError):
    pass


# ---------------------------------------------------------------- build-map


def _load_camera(path):
    path = Path(path)
    try:
        return CameraModel.from_json(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise FormatError(path, exc.msg, line=exc.lineno) from exc
    except ValidationError as exc:
        raise FormatError(path, str(exc)) from exc


def _iter_images(entries, labelset):
    for t, p in entries:
        img = io.read_label_png(p, t)
        try:
            img.check(labelset)
        except ValidationError as exc:
            raise FormatError(p, str(exc)) from exc
        yield t, img


def _load_scans(path):
    return [(t, *io.read_points(p)) for t, p in io.read_manifest(path)]


def build_models(cfg, labelset):
    if cfg.model == "cfn":
        obs = confusion_model(load_confusion(cfg.confusion, labelset), cfg.eps_floor)
    else:
        obs = vanilla_model(cfg.lam, labelset.num_channels, cfg.eps_floor)
    inten = IntensityModel(cfg.k, cfg.gamma, CHANNEL_NAMES.index("lane-mark"), cfg.boost_rule) if cfg.intensity else None
    return obs, inten


def grid_spec_for(cfg, traj):
    if cfg.extent:
        e = cfg.extent
        return GridSpec.from_bounds(cfg.frame, e["xmin"], e["xmax"], e["ymin"], e["ymax"], cfg.d)
    if cfg.frame == "local":
        c = cfg.clip_window()
        return GridSpec.from_bounds("local", c.longitudinal_min, c.longitudinal_max, c.lateral_min, c.lateral_max, cfg.d)
    return GridSpec.covering_trajectory(traj.positions(), cfg.clip_window(), cfg.d)


def run_build_map(cfg):
    """Run the configured mapping; returns ``(grid, filled_raster, stats, labelset)``."""
    labelset = LabelSet.load(cfg.labels)
    traj = io.read_tum(cfg.trajectory)
    cam = _load_camera(cfg.camera)
    entries = io.read_manifest(cfg.images)
    obs, inten = build_models(cfg, labelset)
    spec = grid_spec_for(cfg, traj)
    clip = cfg.clip_window()
    nearest = cfg.sync == "nearest"
    images = _iter_images(entries, labelset)
    stats = FrameStats()
    if cfg.mode == "dense":
        pmap = io.read_point_map(cfg.point_map, voxel=cfg.voxel)
        clouds = dense_frame_clouds(pmap, traj, cam, images, clip, cfg.occlusion, nearest, stats)
    elif cfg.mode == "live":
        clouds = live_frame_clouds(_load_scans(cfg.scans), traj, cam, images, clip, cfg.occlusion, nearest, stats)
    else:
        clouds = planar_frame_clouds(traj, cam, images, cfg.ground_plane(), cfg.plane_stride, clip, nearest, stats)
    grid = map_clouds(
        clouds,
        spec,
        obs,
        inten,
        labelset,
        one_vote_per_cell=cfg.one_vote_per_cell,
        shift_thresholds=(cfg.shift_trans, cfg.shift_rot),
    )
    if not entries:
        log.warning("image manifest %s lists no frames; writing an empty grid", cfg.images)
    p = normalize(grid)[grid.observed]
    if p.size and np.max(np.abs(p.sum(axis=-1) - 1.0)) > 1e-9:
        raise InvariantError("normalized cell probabilities do not sum to one")
    raw = extract_label_map(grid)
    filled = fill_holes(raw, cfg.fill_window, cfg.fill_min_votes, grid.C) if cfg.fill else raw
    return grid, filled, stats, labelset


def cmd_build_map(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for key in ("point_map", "trajectory", "images", "labels", "camera", "confusion", "scans", "mode", "model",
                "d", "k", "gamma", "lam", "frame", "sync", "boost_rule"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if args.intensity is not None:
        cfg.intensity = args.intensity == "on"
    if args.no_fill:
        cfg.fill = False
    if args.occlusion:
        cfg.occlusion = True
    if args.out:
        cfg.out_dir = args.out
    cfg.validate()
    grid, filled, stats, labelset = run_build_map(cfg)
    extra = {"variant": cfg.variant, "mode": cfg.mode, "frames": stats.frames, "skipped_frames": stats.skipped}
    sidecar = export.write_grid(cfg.out_dir, grid, labelset.channel_colors, filled, extra=extra)
    print(
        f"{cfg.variant} [{cfg.mode}] frames={stats.frames} skipped={stats.skipped} "
        f"points={stats.points} observed_cells={int(grid.observed.sum())} -> {sidecar}"
    )
    return EXIT_OK


# ---------------------------------------------------------------- eval


def _parse_classes(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.isdigit():
            out.append(int(tok))
        elif tok in CHANNEL_NAMES:
            out.append(CHANNEL_NAMES.index(tok))
        else:
            raise ValidationError(f"unknown class {tok!r}; choose from {', '.join(CHANNEL_NAMES)}")
    return out


def cmd_eval(args):
    pred, pspec = export.read_label_raster(args.pred, raw=args.no_fill)
    gt, gspec = export.read_label_raster(args.gt)
    if not pspec.same_geometry(gspec):
        raise DimensionError(f"grid geometry differs: prediction {pspec.to_json()} vs ground truth {gspec.to_json()}")
    report = evaluate(pred, gt, _parse_classes(args.classes), pspec.channel_names)
    table = report.table()
    print(table, end="")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report.dumps())
        out.with_suffix(".txt").write_text(table)
    return EXIT_OK


# ---------------------------------------------------------------- synth


def cmd_synth(args):
    if args.spec:
        path = Path(args.spec)
        if not path.exists():
            raise FormatError(path, "scene spec not found")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(path, exc.msg, line=exc.lineno) from exc
        spec = SceneSpec.from_json(doc)
    else:
        spec = default_scene_spec()
    if args.seed is not None:
        spec.seed = args.seed
    manifest = write_dataset(spec, args.out, scans=not args.no_scans)
    print(f"wrote {len(manifest['files'])} files to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------- render


def cmd_render(args):
    raster, spec = export.read_label_raster(args.grid, raw=args.raw)
    labelset = LabelSet.load(args.labels) if args.labels else default_labelset()
    colors = labelset.channel_colors
    if len(colors) != spec.C:
        raise DimensionError(f"label set has {len(colors)} map channels, grid has {spec.C}")
    io.write_rgb_png(args.out, export.render_raster(raster, colors))
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------- main


def build_parser():
    p = argparse.ArgumentParser(prog="semmap", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build-map", help="fuse label images and a point map into a BEV grid")
    b.add_argument("--config")
    b.add_argument("--out")
    b.add_argument("--point-map", dest="point_map")
    b.add_argument("--trajectory")
    b.add_argument("--images")
    b.add_argument("--labels")
    b.add_argument("--camera")
    b.add_argument("--confusion")
    b.add_argument("--scans")
    b.add_argument("--mode", choices=["dense", "live", "planar"])
    b.add_argument("--model", choices=["vanilla", "cfn"])
    b.add_argument("--intensity", choices=["on", "off"])
    b.add_argument("--boost-rule", dest="boost_rule", choices=["and", "intensity"])
    b.add_argument("--lambda", dest="lam", type=float)
    b.add_argument("--gamma", type=float)
    b.add_argument("--k", type=float)
    b.add_argument("--d", type=float)
    b.add_argument("--frame", choices=["global", "local"])
    b.add_argument("--sync", choices=["interpolate", "nearest"])
    b.add_argument("--no-fill", action="store_true")
    b.add_argument("--occlusion", action="store_true")
    b.set_defaults(func=cmd_build_map)

    e = sub.add_parser("eval", help="score a label raster against ground truth")
    e.add_argument("pred", help="grid directory, grid.json, or raster sidecar")
    e.add_argument("gt")
    e.add_argument("--classes", default="road,crosswalk,lane-mark")
    e.add_argument("--no-fill", action="store_true", help="score the raster before hole filling")
    e.add_argument("--out", help="report JSON path; a .txt table is written beside it")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("out")
    s.add_argument("--spec", help="scene spec JSON (default scene when omitted)")
    s.add_argument("--seed", type=int)
    s.add_argument("--no-scans", action="store_true", help="skip simulated live LiDAR scans")
    s.set_defaults(func=cmd_synth)

    r = sub.add_parser("render", help="color a label raster")
    r.add_argument("grid")
    r.add_argument("--out", required=True)
    r.add_argument("--labels")
    r.add_argument("--raw", action="store_true")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FormatError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValidationError, SemmapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
