import json

import numpy as np
import pytest

from semmap.bevgrid import export
from semmap.cli import main, run_build_map
from semmap.config import RunConfig
from semmap.synthscene import default_scene_spec, write_dataset


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    write_dataset(default_scene_spec(seed=2, path=[[2.0, -1.8], [10.0, -1.8]]), root)
    return root


def build(data, out, *extra):
    return main(["build-map", "--config", str(data / "config.json"), "--out", str(out), *extra])


def test_full_round(data, tmp_path, capsys):
    assert build(data, tmp_path / "m") == 0
    side = json.loads((tmp_path / "m" / "grid.json").read_text())
    assert side["variant"] == "CFN"
    assert main(["eval", str(tmp_path / "m"), str(data / "gt_raster.json"), "--out", str(tmp_path / "r.json")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["miou"] is not None and 0.0 < rep["miou"] <= 1.0
    assert (tmp_path / "r.txt").read_text() in capsys.readouterr().out
    assert main(["render", str(tmp_path / "m"), "--out", str(tmp_path / "c.png")]) == 0
    assert (tmp_path / "c.png").stat().st_size > 0


def test_runs_are_bitwise_reproducible(data, tmp_path):
    assert build(data, tmp_path / "a") == 0
    assert build(data, tmp_path / "b") == 0
    for name in ("logprob.f32", "labels.png", "labels_raw.png", "observed.u8"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_variants_share_association(data):
    base = RunConfig.load(data / "config.json")
    seen = []
    for model, intensity in [("vanilla", False), ("vanilla", True), ("cfn", False), ("cfn", True)]:
        cfg = RunConfig.from_json({**base.to_json(), "model": model, "intensity": intensity})
        grid, _, stats, _ = run_build_map(cfg)
        seen.append((stats.frames, stats.points, grid.observed.copy()))
    for frames, points, observed in seen[1:]:
        assert (frames, points) == seen[0][:2]
        assert np.array_equal(observed, seen[0][2])


def test_flag_overrides(data, tmp_path):
    assert build(data, tmp_path / "m", "--model", "vanilla", "--intensity", "on", "--d", "0.4", "--no-fill") == 0
    raster, spec = export.read_label_raster(tmp_path / "m")
    assert spec.d == 0.4
    side = json.loads((tmp_path / "m" / "grid.json").read_text())
    assert side["variant"] == "Vanilla+I"
    assert np.array_equal(raster, export.read_label_raster(tmp_path / "m", raw=True)[0])


def test_zero_frame_manifest(data, tmp_path, caplog):
    (tmp_path / "empty.json").write_text("[]")
    assert build(data, tmp_path / "m", "--images", str(tmp_path / "empty.json")) == 0
    grid = export.read_grid(tmp_path / "m")
    assert not grid.observed.any()
    assert "no frames" in caplog.text


def test_missing_point_map_names_path(data, tmp_path, capsys):
    code = build(data, tmp_path / "m", "--point-map", str(tmp_path / "gone.ply"))
    assert code != 0
    assert "gone.ply" in capsys.readouterr().err


def test_eval_geometry_mismatch(data, tmp_path, capsys):
    assert build(data, tmp_path / "m", "--d", "0.4") == 0
    assert main(["eval", str(tmp_path / "m"), str(data / "gt_raster.json")]) == 2
    assert "geometry" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["build-map", "--mode", "sideways"],
        ["eval", "only-one"],
        ["render", "g"],
    ],
)
def test_bad_arguments(argv):
    assert main(argv) == 1


def test_unknown_eval_class(data, tmp_path):
    assert main(["eval", str(data / "gt_raster.json"), str(data / "gt_raster.json"), "--classes", "sky"]) == 1


def test_synth_command(tmp_path, capsys):
    spec = default_scene_spec(seed=9, path=[[2.0, -1.8], [5.0, -1.8]]).to_json()
    (tmp_path / "s.json").write_text(json.dumps(spec))
    assert main(["synth", str(tmp_path / "ds"), "--spec", str(tmp_path / "s.json"), "--no-scans"]) == 0
    assert "wrote" in capsys.readouterr().out
    assert not (tmp_path / "ds" / "scans").exists()
    assert main(["synth", str(tmp_path / "x"), "--spec", str(tmp_path / "nope.json")]) == 2
