"""Run configuration: one JSON document, every key overridable from the command line."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from semmap.association import ClipWindow
from semmap.baselines import GroundPlane
from semmap.bevgrid.models import EPS_FLOOR
from semmap.errors import FormatError, ValidationError

_PATH_KEYS = ("point_map", "trajectory", "images", "labels", "camera", "confusion", "scans", "out_dir")


@dataclass
class RunConfig:
    point_map: str | None = None
    trajectory: str | None = None
    images: str | None = None
    labels: str | None = None
    camera: str | None = None
    confusion: str | None = None
    scans: str | None = None
    out_dir: str = "out"

    mode: str = "dense"  # dense | live | planar
    model: str = "cfn"  # vanilla | cfn
    intensity: bool = False
    boost_rule: str = "and"
    lam: float = 0.1
    gamma: float = 0.5
    k: float = 14.0
    d: float = 0.2
    eps_floor: float = EPS_FLOOR
    clip: dict = field(default_factory=lambda: asdict(ClipWindow()))
    frame: str = "global"
    extent: dict | None = None  # {"xmin", "xmax", "ymin", "ymax"}; auto when None
    shift_trans: float = 1.0
    shift_rot: float = 0.1
    fill: bool = True
    fill_window: int = 3
    fill_min_votes: int = 3
    occlusion: bool = False
    one_vote_per_cell: bool = False
    sync: str = "interpolate"  # interpolate | nearest
    plane_height: float = 0.0
    plane_range: float = 30.0
    plane_stride: int = 2
    voxel: float = 2.0

    def validate(self):
        if not self.d > 0:
            raise ValidationError("d must be positive")
        if self.mode not in ("dense", "live", "planar"):
            raise ValidationError(f"mode must be dense, live or planar, got {self.mode!r}")
        if self.model not in ("vanilla", "cfn"):
            raise ValidationError(f"model must be vanilla or cfn, got {self.model!r}")
        if self.frame not in ("global", "local"):
            raise ValidationError(f"frame must be global or local, got {self.frame!r}")
        if self.sync not in ("interpolate", "nearest"):
            raise ValidationError(f"sync must be interpolate or nearest, got {self.sync!r}")
        if self.lam < 0 or self.gamma < 0:
            raise ValidationError("lambda and gamma must be nonnegative")
        if self.fill_window < 3 or self.fill_window % 2 == 0:
            raise ValidationError("fill_window must be odd and >= 3")
        self.clip_window()
        self.ground_plane()
        required = ["trajectory", "images", "labels", "camera"]
        if self.mode == "dense":
            required.append("point_map")
        if self.mode == "live":
            required.append("scans")
        if self.model == "cfn":
            required.append("confusion")
        missing = [k for k in required if not getattr(self, k)]
        if missing:
            raise ValidationError(f"config is missing required paths: {', '.join(missing)}")
        for k in required:
            if not Path(getattr(self, k)).exists():
                raise FormatError(getattr(self, k), f"{k} file not found")
        return self

    def clip_window(self):
        try:
            return ClipWindow(**self.clip)
        except TypeError as exc:
            raise ValidationError(f"bad clip window: {exc}") from exc

    def ground_plane(self):
        return GroundPlane(self.plane_height, self.plane_range)

    @property
    def variant(self):
        name = "CFN" if self.model == "cfn" else "Vanilla"
        return name + ("+I" if self.intensity else "")

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, doc, base=None):
        names = {f.name for f in fields(cls)}
        doc = dict(doc)
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        unknown = set(doc) - names
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**doc)
        if base is not None:
            for k in _PATH_KEYS:
                v = getattr(cfg, k)
                if v and not Path(v).is_absolute():
                    setattr(cfg, k, str(Path(base) / v))
        return cfg

    @classmethod
    def load(cls, path):
        path = Path(path)
        if not path.exists():
            raise FormatError(path, "config file not found")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(path, exc.msg, line=exc.lineno) from exc
        return cls.from_json(doc, base=path.parent)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")
