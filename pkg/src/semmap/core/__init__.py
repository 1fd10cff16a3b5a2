from semmap.core.camera import CameraModel
from semmap.core.geometry import (
    Pose,
    Trajectory,
    interpolate_pose,
    transform_points,
)
from semmap.core.labels import UNLABELED, LabelEntry, LabelSet, default_labelset
from semmap.core.pointmap import PointMap
from semmap.core.types import SemanticImage, SemanticPointCloud

__all__ = [
    "CameraModel",
    "LabelEntry",
    "LabelSet",
    "PointMap",
    "Pose",
    "SemanticImage",
    "SemanticPointCloud",
    "Trajectory",
    "UNLABELED",
    "default_labelset",
    "interpolate_pose",
    "transform_points",
]
