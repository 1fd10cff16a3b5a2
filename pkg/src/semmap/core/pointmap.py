"""Dense world-frame point map with a uniform xy voxel hash for box queries."""
from __future__ import annotations

import numpy as np

from semmap.core.geometry import transform_points


class PointMap:
    """Points ``(x, y, z)`` with intensity in [0, 255].

    The index buckets points into vertical columns of ``voxel`` meters and
    answers box queries by scanning the buckets the box touches, then
    filtering exactly. Results are sorted point indices, so they compare
    equal to a brute-force scan.
    """

    def __init__(self, xyz, intensity, voxel=2.0):
        self.xyz = np.ascontiguousarray(np.asarray(xyz, dtype=float).reshape(-1, 3))
        self.intensity = np.asarray(intensity, dtype=float).reshape(len(self.xyz))
        self.voxel = float(voxel)
        self._build()

    def __len__(self):
        return len(self.xyz)

    def _build(self):
        keys = np.floor(self.xyz[:, :2] / self.voxel).astype(np.int64)
        order = np.lexsort((keys[:, 1], keys[:, 0]))
        sk = keys[order]
        if len(sk):
            brk = np.flatnonzero(np.any(np.diff(sk, axis=0) != 0, axis=1)) + 1
            starts = np.concatenate([[0], brk])
        else:
            starts = np.zeros(0, dtype=np.int64)
        self._order = order
        self._cell_keys = sk[starts] if len(sk) else np.zeros((0, 2), np.int64)
        self._cell_start = starts
        self._cell_end = np.concatenate([starts[1:], [len(sk)]]) if len(sk) else starts

    def _candidates(self, lo, hi):
        k0 = np.floor(np.asarray(lo[:2]) / self.voxel).astype(np.int64)
        k1 = np.floor(np.asarray(hi[:2]) / self.voxel).astype(np.int64)
        ck = self._cell_keys
        hit = (ck[:, 0] >= k0[0]) & (ck[:, 0] <= k1[0]) & (ck[:, 1] >= k0[1]) & (ck[:, 1] <= k1[1])
        s = self._cell_start[hit]
        e = self._cell_end[hit]
        if not len(s):
            return np.zeros(0, dtype=np.int64)
        lens = e - s
        offs = np.repeat(s - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
        return self._order[np.arange(lens.sum()) + offs]

    def query_aabb(self, lo, hi):
        """Indices of points with lo <= p < hi on every axis (half-open)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        idx = self._candidates(lo, hi)
        p = self.xyz[idx]
        keep = np.all((p >= lo) & (p < hi), axis=1)
        return np.sort(idx[keep])

    def query_box(self, pose, lo, hi):
        """Indices of points whose body-frame coordinates under ``pose`` lie in [lo, hi).

        Also returns those body-frame coordinates, aligned with the indices.
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        corners = np.array([[a, b, c] for a in (lo[0], hi[0]) for b in (lo[1], hi[1]) for c in (lo[2], hi[2])])
        wc = transform_points(pose, corners, "body_to_world")
        idx = self._candidates(wc.min(axis=0), wc.max(axis=0))
        body = transform_points(pose, self.xyz[idx], "world_to_body")
        keep = np.all((body >= lo) & (body < hi), axis=1)
        idx, body = idx[keep], body[keep]
        order = np.argsort(idx, kind="stable")
        return idx[order], body[order]
