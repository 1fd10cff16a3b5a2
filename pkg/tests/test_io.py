import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semmap.core import Pose, Trajectory, io
from semmap.errors import FormatError


def test_tum_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    traj = Trajectory([Pose.from_xyz_ypr(i * 0.01 + 1e9, rng.normal(size=3) * 1e3, *rng.uniform(-3, 3, 3)) for i in range(20)])
    io.write_tum(tmp_path / "t.txt", traj)
    back = io.read_tum(tmp_path / "t.txt")
    assert np.array_equal(back.timestamps, traj.timestamps)
    for a, b in zip(back.poses, traj.poses):
        assert np.array_equal(a.translation, b.translation)
        assert np.array_equal(a.rotation, b.rotation)


def test_tum_comments_and_blank_lines(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("# header\n\n0 1 2 3 0 0 0 1\n# mid\n1 1 2 3 0 0 0 1\n")
    assert len(io.read_tum(p)) == 2


@pytest.mark.parametrize(
    "body, line",
    [
        ("0 0 0 0 0 0 0 1\n1 0 0 0 0 0 1\n", 2),
        ("0 0 0 0 0 0 0 1\n1 0 0 x 0 0 0 1\n", 2),
        ("# c\n0 0 0 0 0 0 0 2\n", 2),
    ],
)
def test_tum_errors_name_the_line(tmp_path, body, line):
    p = tmp_path / "t.txt"
    p.write_text(body)
    with pytest.raises(FormatError) as exc:
        io.read_tum(p)
    assert exc.value.line == line
    assert f"t.txt:{line}" in str(exc.value)


def test_tum_non_increasing(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("1 0 0 0 0 0 0 1\n0 0 0 0 0 0 0 1\n")
    with pytest.raises(FormatError):
        io.read_tum(p)


def test_missing_files_name_the_path(tmp_path):
    for reader in (io.read_tum, io.read_ply, io.read_points, io.read_label_png, io.read_manifest):
        with pytest.raises(FormatError) as exc:
            reader(tmp_path / "nope.bin")
        assert "nope.bin" in str(exc.value)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 300), st.booleans(), st.integers(0, 2**31 - 1))
def test_ply_round_trip(n, binary, seed):
    rng = np.random.default_rng(seed)
    xyz = rng.normal(0, 1e3, (n, 3))
    inten = rng.uniform(0, 255, n)
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "m.ply"
        io.write_ply(p, xyz, inten, binary=binary)
        xyz2, inten2 = io.read_ply(p)
    assert np.array_equal(xyz2, xyz.astype(np.float32).astype(float))
    assert np.array_equal(inten2, inten.astype(np.float32).astype(float))


def test_ply_extra_properties_and_types(tmp_path):
    rec = np.zeros(3, dtype=[("x", "<f8"), ("y", "<f8"), ("z", "<f8"), ("ring", "u1"), ("intensity", "<u2")])
    rec["x"] = [1, 2, 3]
    rec["intensity"] = [10, 20, 30]
    header = (
        "ply\nformat binary_little_endian 1.0\ncomment made elsewhere\nelement vertex 3\n"
        "property double x\nproperty double y\nproperty double z\nproperty uchar ring\nproperty ushort intensity\nend_header\n"
    )
    p = tmp_path / "m.ply"
    p.write_bytes(header.encode() + rec.tobytes())
    xyz, inten = io.read_ply(p)
    assert np.array_equal(xyz[:, 0], [1, 2, 3])
    assert np.array_equal(inten, [10, 20, 30])


def test_ply_truncated_reports_offset(tmp_path):
    p = tmp_path / "m.ply"
    io.write_ply(p, np.zeros((10, 3)), np.zeros(10))
    data = p.read_bytes()
    p.write_bytes(data[:-5])
    with pytest.raises(FormatError) as exc:
        io.read_ply(p)
    assert exc.value.offset is not None


def test_ply_missing_property(tmp_path):
    p = tmp_path / "m.ply"
    p.write_text("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n")
    with pytest.raises(FormatError, match="intensity"):
        io.read_ply(p)


def test_ply_ascii_bad_row_names_line(tmp_path):
    p = tmp_path / "m.ply"
    io.write_ply(p, np.zeros((3, 3)), np.zeros(3), binary=False)
    lines = p.read_text().splitlines()
    lines[-2] = "1 2"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError) as exc:
        io.read_ply(p)
    assert exc.value.line == len(lines) - 1


def test_csv_points(tmp_path):
    p = tmp_path / "m.csv"
    xyz = np.array([[0.1, 0.2, 0.3], [1e-7, -5.0, 3.25]])
    io.write_csv_points(p, xyz, [1.5, 200.0])
    xyz2, inten = io.read_points(p)
    assert np.array_equal(xyz2, xyz)
    assert np.array_equal(inten, [1.5, 200.0])
    p.write_text("x,y,z,intensity\n1,2,3,4\n1,2,oops,4\n")
    with pytest.raises(FormatError) as exc:
        io.read_points(p)
    assert exc.value.line == 3
    p.write_text("a,b\n")
    with pytest.raises(FormatError):
        io.read_points(p)


def test_intensity_range_checked(tmp_path):
    p = tmp_path / "m.csv"
    io.write_csv_points(p, np.zeros((1, 3)), [300.0])
    with pytest.raises(FormatError, match="intensity"):
        io.read_points(p)


def test_label_png_round_trip(tmp_path):
    labels = np.random.default_rng(1).integers(0, 256, (48, 64)).astype(np.uint8)
    io.write_label_png(tmp_path / "l.png", labels)
    img = io.read_label_png(tmp_path / "l.png", 3.5)
    assert np.array_equal(img.labels, labels) and img.timestamp == 3.5


def test_label_png_rejects_rgb(tmp_path):
    io.write_rgb_png(tmp_path / "c.png", np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(FormatError, match="mode"):
        io.read_label_png(tmp_path / "c.png")


def test_manifest_round_trip_sorted_and_relative(tmp_path):
    (tmp_path / "imgs").mkdir()
    io.write_manifest(tmp_path / "m.json", [(2.0, "imgs/b.png"), (1.0, "imgs/a.png")])
    entries = io.read_manifest(tmp_path / "m.json")
    assert [t for t, _ in entries] == [1.0, 2.0]
    assert entries[0][1] == tmp_path / "imgs" / "a.png"


def test_manifest_errors(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"a": 1}')
    with pytest.raises(FormatError, match="array"):
        io.read_manifest(p)
    p.write_text('[{"timestamp": 1}]')
    with pytest.raises(FormatError, match="entry 0"):
        io.read_manifest(p)
    p.write_text("[\n{")
    with pytest.raises(FormatError) as exc:
        io.read_manifest(p)
    assert exc.value.line == 2
