import numpy as np
import pytest
from scenes import default_scenario

from semmap.association import ClipWindow, extract_local_region
from semmap.baselines import GroundPlane, live_frame_clouds, map_from_live_scans, planar_backproject, planar_frame_clouds
from semmap.bevgrid import UNKNOWN, confusion_model, extract_label_map
from semmap.core import CameraModel, Pose, SemanticImage, Trajectory, transform_points
from semmap.core.labels import default_labelset
from semmap.errors import ValidationError
from semmap.pipeline import dense_frame_clouds, map_clouds
from semmap.synthscene import Scene, default_scene_spec, make_trajectory, render_semantic_image

LS = default_labelset()
MODEL = confusion_model(np.eye(5) * 100 + 1)


def down_camera(h=2.0):
    # camera z along body -z, camera x along body -y
    R_cb = np.array([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    return CameraModel(400.0, 400.0, 200.0, 150.0, 400, 300, R_cb, -R_cb @ [0.0, 0.0, h])


def test_ground_plane_validation():
    with pytest.raises(ValidationError):
        GroundPlane(valid_range=0)


def test_nadir_pixel_lands_below_camera():
    cam = down_camera(2.0)
    img = SemanticImage(np.full((300, 400), 2, dtype=np.uint8))
    cloud, rows, cols = planar_backproject(cam, Pose.identity(), img, stride=1, return_pixels=True)
    hit = cloud.xyz[(rows == 150) & (cols == 200)]
    assert np.allclose(hit, [[0, 0, 0]], atol=1e-12)


def test_rays_at_or_above_horizon_produce_nothing():
    cam = CameraModel.forward_facing(500, 500, 320, 240, 640, 480, position=(0, 0, 1.5), pitch=0.0)
    labels = np.full((480, 640), 255, dtype=np.uint8)
    labels[:241] = 2  # rows 0..240: above or on the horizon
    out = planar_backproject(cam, Pose.identity(), SemanticImage(labels), stride=1, plane=GroundPlane(valid_range=1e9))
    assert len(out) == 0


def test_pitched_camera_matches_ray_plane_oracle():
    cam = CameraModel.forward_facing(500, 500, 320, 240, 640, 480, position=(1, 0.3, 1.5), pitch=0.12)
    img = SemanticImage(np.full((480, 640), 2, dtype=np.uint8))
    cloud, rows, cols = planar_backproject(cam, Pose.identity(), img, stride=7, return_pixels=True)
    # independent oracle: invert the pinhole into a camera-frame ray, rotate to body, intersect z = 0
    K_inv = np.linalg.inv(cam.K)
    d_cam = (K_inv @ np.vstack([cols, rows, np.ones(len(rows))])).T
    d_body = d_cam @ cam.R_cb  # R_cb^T applied row-wise
    c = -cam.R_cb.T @ cam.t_cb
    s = -c[2] / d_body[:, 2]
    assert np.allclose(cloud.xyz, c + s[:, None] * d_body, atol=1e-9)
    assert np.all(s > 0) and np.all(np.linalg.norm(cloud.xyz - c, axis=1) <= 30.0 + 1e-9)


def test_valid_range_cuts_far_rays():
    cam = CameraModel.forward_facing(500, 500, 320, 240, 640, 480, position=(0, 0, 1.5), pitch=0.05)
    img = SemanticImage(np.full((480, 640), 2, dtype=np.uint8))
    near = planar_backproject(cam, Pose.identity(), img, GroundPlane(valid_range=10.0))
    far = planar_backproject(cam, Pose.identity(), img, GroundPlane(valid_range=100.0))
    assert 0 < len(near) < len(far)
    assert np.max(np.linalg.norm(near.xyz - cam.center_body, axis=1)) <= 10.0


@pytest.mark.slow
def test_live_scans_equal_to_dense_regions_reproduce_dense_map():
    sc = default_scenario()
    images = sc.images[::4]
    scans = []
    for t, _ in images:
        region = extract_local_region(sc.pmap, sc.pose(t), sc.clip)
        scans.append((t, region.xyz, region.intensity))
    live = map_from_live_scans(scans, sc.traj, sc.cam, images, sc.grid_spec, MODEL, clip=sc.clip)
    dense = map_clouds(dense_frame_clouds(sc.pmap, sc.traj, sc.cam, images, sc.clip), sc.grid_spec, MODEL)
    assert np.array_equal(live.observed, dense.observed)
    assert np.allclose(live.logprob, dense.logprob, atol=1e-9)


@pytest.mark.slow
def test_sparse_subset_scans_observe_subset_of_cells():
    sc = default_scenario()
    images = sc.images[::6]
    rng = np.random.default_rng(0)
    scans = []
    for t, _ in images:
        region = extract_local_region(sc.pmap, sc.pose(t), sc.clip)
        keep = rng.random(len(region)) < 0.1
        scans.append((t, region.xyz[keep], region.intensity[keep]))
    live = map_from_live_scans(scans, sc.traj, sc.cam, images, sc.grid_spec, MODEL, clip=sc.clip)
    dense = map_clouds(dense_frame_clouds(sc.pmap, sc.traj, sc.cam, images, sc.clip), sc.grid_spec, MODEL)
    assert live.observed.sum() < dense.observed.sum()
    assert not np.any(live.observed & ~dense.observed)


def test_empty_scans_give_unknown_grid():
    sc = default_scenario()
    images = sc.images[:3]
    g = map_from_live_scans([], sc.traj, sc.cam, images, sc.grid_spec, MODEL)
    assert np.all(extract_label_map(g) == UNKNOWN)
    scans = [(t, np.zeros((0, 3)), np.zeros(0)) for t, _ in images]
    g = map_from_live_scans(scans, sc.traj, sc.cam, images, sc.grid_spec, MODEL)
    assert not g.observed.any()


def test_scan_motion_compensation():
    traj = Trajectory([Pose.from_xyz_ypr(0.0, [0, 0, 0], 0), Pose.from_xyz_ypr(1.0, [1, 0, 0], 0)])
    cam = CameraModel.forward_facing(500, 500, 320, 240, 640, 480, position=(0, 0, 1.5), pitch=0.2)
    img = SemanticImage(np.full((480, 640), 2, dtype=np.uint8))
    scan = (0.0, np.array([[8.0, 0.0, 0.0]]), np.array([5.0]))
    (cloud,) = live_frame_clouds([scan], traj, cam, [(0.5, img)])
    assert np.allclose(cloud.xyz, [[7.5, 0.0, 0.0]])


@pytest.mark.slow
def test_flat_scene_planar_agrees_with_dense():
    sc = default_scenario()
    images = sc.images[::2]
    dense = extract_label_map(map_clouds(dense_frame_clouds(sc.pmap, sc.traj, sc.cam, images, sc.clip), sc.grid_spec, MODEL))
    planar = extract_label_map(
        map_clouds(planar_frame_clouds(sc.traj, sc.cam, images, GroundPlane(), 2, sc.clip), sc.grid_spec, MODEL)
    )
    both = (dense != UNKNOWN) & (planar != UNKNOWN)
    assert both.sum() > 10_000
    assert np.mean(dense[both] == planar[both]) >= 0.95


def test_planar_error_grows_with_range_on_a_slope():
    scene = Scene(default_scene_spec(surface={"kind": "incline", "grade": 0.08}, path=[[5.0, -1.8], [15.0, -1.8]]))
    pose = Pose.from_xyz_ypr(0.0, [5.0, -1.8, 0.4], 0.0)  # on the slope but held level
    img, hits = render_semantic_image(scene, scene.camera, pose, LS, return_hits=True)
    cloud, rows, cols = planar_backproject(scene.camera, pose, img, stride=2, return_pixels=True)
    truth = hits[rows, cols]
    ok = ~np.isnan(truth[:, 0])
    err = np.linalg.norm(cloud.to_world().xyz[ok, :2] - truth[ok, :2], axis=1)
    rng_true = transform_points(pose, truth[ok], "world_to_body")[:, 0]
    bins = np.arange(2.0, 14.0, 2.0)  # farther hits meet the flat plane beyond valid_range
    means = [err[(rng_true >= a) & (rng_true < a + 2)].mean() for a in bins[:-1]]
    assert all(b > a for a, b in zip(means, means[1:]))
