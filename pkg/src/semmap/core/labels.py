"""Label taxonomy: segmentation label ids, display colors and map channels."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from semmap.errors import FormatError, ValidationError

UNLABELED = 255

# Map channel order used by every grid in the package.
CHANNEL_NAMES = ("road", "crosswalk", "lane-mark", "vegetation", "sidewalk")
ROAD, CROSSWALK, LANE_MARK, VEGETATION, SIDEWALK = range(5)
NUM_CHANNELS = len(CHANNEL_NAMES)


@dataclass(frozen=True)
class LabelEntry:
    id: int
    name: str
    color: tuple[int, int, int]
    channel: int | None = None


class LabelSet:
    """Ordered label table with a map-channel assignment for five of the labels."""

    def __init__(self, entries):
        self.entries = tuple(entries)
        self._validate()
        self._by_id = {e.id: e for e in self.entries}
        chan = {e.channel: e for e in self.entries if e.channel is not None}
        self.num_channels = len(chan)
        self.channel_names = tuple(chan[c].name for c in range(self.num_channels))
        self.channel_to_id = np.array([chan[c].id for c in range(self.num_channels)], dtype=np.uint8)
        self.channel_colors = np.array([chan[c].color for c in range(self.num_channels)], dtype=np.uint8)

        lut = np.full(256, -1, dtype=np.int16)
        for e in self.entries:
            if e.channel is not None:
                lut[e.id] = e.channel
        self.id_to_channel = lut

        valid = np.zeros(256, dtype=bool)
        for e in self.entries:
            valid[e.id] = True
        valid[UNLABELED] = True
        self.valid_ids = valid

    def _validate(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValidationError("label ids must be unique")
        for e in self.entries:
            if not 0 <= e.id < UNLABELED:
                raise ValidationError(f"label id {e.id} outside [0, 255)")
            if len(e.color) != 3 or not all(0 <= c <= 255 for c in e.color):
                raise ValidationError(f"label {e.name!r} has invalid rgb {e.color}")
        channels = sorted(e.channel for e in self.entries if e.channel is not None)
        if channels != list(range(NUM_CHANNELS)):
            raise ValidationError(
                f"map channels must cover 0..{NUM_CHANNELS - 1} exactly once, got {channels}"
            )

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, label_id):
        return self._by_id[label_id]

    def id_of(self, name):
        for e in self.entries:
            if e.name == name:
                return e.id
        raise KeyError(name)

    def channel_of(self, name):
        return self.channel_names.index(name)

    def to_json(self):
        return [
            {"id": e.id, "name": e.name, "rgb": list(e.color), "channel": e.channel}
            for e in self.entries
        ]

    @classmethod
    def from_json(cls, doc):
        try:
            entries = [
                LabelEntry(int(d["id"]), str(d["name"]), tuple(int(c) for c in d["rgb"]), d.get("channel"))
                for d in doc
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed label entry: {exc}") from exc
        return cls(entries)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path):
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(path, exc.msg, line=exc.lineno) from exc
        return cls.from_json(doc)


# Segmentation classes after merging; colors follow Mapillary Vistas where one exists.
_DEFAULT = [
    ("curb", (196, 196, 196), None),
    ("crosswalk", (200, 128, 128), CROSSWALK),
    ("road", (128, 64, 128), ROAD),
    ("sidewalk", (244, 35, 232), SIDEWALK),
    ("building", (70, 70, 70), None),
    ("person", (220, 20, 60), None),
    ("bicyclist", (255, 0, 0), None),
    ("motorcyclist", (255, 0, 100), None),
    ("lane-marking", (255, 255, 255), LANE_MARK),
    ("sky", (70, 130, 180), None),
    ("vegetation", (107, 142, 35), VEGETATION),
    ("manhole", (100, 128, 160), None),
    ("pole", (153, 153, 153), None),
    ("traffic-sign", (220, 220, 0), None),
    ("bicycle", (119, 11, 32), None),
    ("bus", (0, 60, 100), None),
    ("car", (0, 0, 142), None),
    ("motorcycle", (0, 0, 230), None),
    ("truck", (0, 0, 70), None),
]


def default_labelset():
    return LabelSet(LabelEntry(i, n, c, ch) for i, (n, c, ch) in enumerate(_DEFAULT))
