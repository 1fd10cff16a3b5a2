"""Hot inner loops, each in a numba and a pure-numpy flavour.

Set ``SEMMAP_DISABLE_NUMBA=1`` to force the numpy path. Both paths are
kept importable as ``<name>_numba`` / ``<name>_numpy`` so tests and the
benchmark can compare them directly.
"""
import os

import numpy as np
from scipy import ndimage

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SEMMAP_DISABLE_NUMBA", "0") not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"

SURFACE_FLAT, SURFACE_INCLINE, SURFACE_HILL = 0, 1, 2


# ------------------------------------------------------------ accumulate


def accumulate_numpy(logprob, observed, rows, cols, z, logM, boost, gamma, target):
    if len(rows) == 0:
        return
    np.add.at(logprob, (rows, cols), logM[:, z].T)
    observed[rows, cols] = True
    if gamma != 0.0 and boost.any():
        np.add.at(logprob[:, :, target], (rows[boost], cols[boost]), gamma)


# ------------------------------------------------------------ hole filling


def fill_holes_numpy(raster, window, min_votes, n_channels, unknown):
    known = raster != unknown
    counts = np.empty(raster.shape + (n_channels,), dtype=np.int32)
    kernel = np.ones((window, window), dtype=np.int32)
    for c in range(n_channels):
        counts[..., c] = ndimage.correlate((raster == c).astype(np.int32), kernel, mode="constant", cval=0)
    votes = counts.sum(axis=-1)
    mode = np.argmax(counts, axis=-1)  # first max wins ties
    out = raster.copy()
    fill = (~known) & (votes >= min_votes) & (votes > 0)
    out[fill] = mode[fill]
    return out


# ------------------------------------------------------------ ray / surface


def _height_numpy(kind, p0, p1, x, y):
    if kind == SURFACE_FLAT:
        return np.zeros_like(x)
    if kind == SURFACE_INCLINE:
        return p0 * x
    return p0 * np.sin(2.0 * np.pi * x / p1)


def intersect_surface_numpy(origins, dirs, kind, p0, p1, s_max, step, tol, max_iter):
    """First crossing of each ray with the height field; NaN where there is none."""
    n = len(dirs)
    s_hit = np.full(n, np.nan)
    f_prev = origins[:, 2] - _height_numpy(kind, p0, p1, origins[:, 0], origins[:, 1])
    s_prev = np.zeros(n)
    active = f_prev > 0
    lo = np.full(n, np.nan)
    hi = np.full(n, np.nan)
    s = 0.0
    while s < s_max and active.any():
        s = min(s + step, s_max)
        a = np.flatnonzero(active)
        p = origins[a] + s * dirs[a]
        f = p[:, 2] - _height_numpy(kind, p0, p1, p[:, 0], p[:, 1])
        crossed = f <= 0
        ca = a[crossed]
        lo[ca] = s_prev[ca]
        hi[ca] = s
        active[ca] = False
        s_prev[a] = s
    b = np.flatnonzero(~np.isnan(lo))
    if len(b):
        o, d, l, h = origins[b], dirs[b], lo[b], hi[b]
        for _ in range(max_iter):
            m = 0.5 * (l + h)
            p = o + m[:, None] * d
            f = p[:, 2] - _height_numpy(kind, p0, p1, p[:, 0], p[:, 1])
            above = f > 0
            l = np.where(above, m, l)
            h = np.where(above, h, m)
            if np.max(h - l) < tol:
                break
        s_hit[b] = 0.5 * (l + h)
    return s_hit


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def accumulate_numba(logprob, observed, rows, cols, z, logM, boost, gamma, target):
        C = logprob.shape[2]
        for n in range(rows.shape[0]):
            r = rows[n]
            c = cols[n]
            zz = z[n]
            for i in range(C):
                logprob[r, c, i] += logM[i, zz]
            if boost[n]:
                logprob[r, c, target] += gamma
            observed[r, c] = True

    @numba.njit(cache=True)
    def fill_holes_numba(raster, window, min_votes, n_channels, unknown):
        H, W = raster.shape
        half = window // 2
        out = raster.copy()
        counts = np.zeros(n_channels, dtype=np.int64)
        for r in range(H):
            for c in range(W):
                if raster[r, c] != unknown:
                    continue
                counts[:] = 0
                total = 0
                for rr in range(max(0, r - half), min(H, r + half + 1)):
                    for cc in range(max(0, c - half), min(W, c + half + 1)):
                        v = raster[rr, cc]
                        if v < n_channels:
                            counts[v] += 1
                            total += 1
                if total > 0 and total >= min_votes:
                    best = 0
                    for k in range(1, n_channels):
                        if counts[k] > counts[best]:
                            best = k
                    out[r, c] = best
        return out

    @numba.njit(cache=True)
    def _height_numba(kind, p0, p1, x, y):
        if kind == 0:
            return 0.0
        if kind == 1:
            return p0 * x
        return p0 * np.sin(2.0 * np.pi * x / p1)

    @numba.njit(cache=True)
    def intersect_surface_numba(origins, dirs, kind, p0, p1, s_max, step, tol, max_iter):
        n = dirs.shape[0]
        out = np.full(n, np.nan)
        for i in range(n):
            ox, oy, oz = origins[i, 0], origins[i, 1], origins[i, 2]
            dx, dy, dz = dirs[i, 0], dirs[i, 1], dirs[i, 2]
            f_prev = oz - _height_numba(kind, p0, p1, ox, oy)
            if f_prev <= 0:
                continue
            s_prev = 0.0
            s = 0.0
            lo = -1.0
            hi = -1.0
            while s < s_max:
                s = min(s + step, s_max)
                f = (oz + s * dz) - _height_numba(kind, p0, p1, ox + s * dx, oy + s * dy)
                if f <= 0:
                    lo = s_prev
                    hi = s
                    break
                s_prev = s
            if hi < 0:
                continue
            for _ in range(max_iter):
                m = 0.5 * (lo + hi)
                f = (oz + m * dz) - _height_numba(kind, p0, p1, ox + m * dx, oy + m * dy)
                if f > 0:
                    lo = m
                else:
                    hi = m
                if hi - lo < tol:
                    break
            out[i] = 0.5 * (lo + hi)
        return out


def accumulate(logprob, observed, rows, cols, z, logM, boost, gamma, target):
    """In place: ``logprob[r, c, :] += logM[:, z]`` per point, plus ``gamma`` on ``target`` where boosted."""
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    z = np.ascontiguousarray(z, dtype=np.int64)
    boost = np.ascontiguousarray(boost, dtype=np.bool_)
    logM = np.ascontiguousarray(logM, dtype=np.float64)
    if USE_NUMBA:
        accumulate_numba(logprob, observed, rows, cols, z, logM, boost, float(gamma), int(target))
    else:
        accumulate_numpy(logprob, observed, rows, cols, z, logM, boost, float(gamma), int(target))


def fill_holes(raster, window, min_votes, n_channels, unknown):
    raster = np.ascontiguousarray(raster, dtype=np.uint8)
    if USE_NUMBA:
        return fill_holes_numba(raster, int(window), int(min_votes), int(n_channels), np.uint8(unknown))
    return fill_holes_numpy(raster, int(window), int(min_votes), int(n_channels), unknown)


def intersect_surface(origins, dirs, kind, p0, p1, s_max, step=0.25, tol=1e-5, max_iter=64):
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    args = (origins, dirs, int(kind), float(p0), float(p1), float(s_max), float(step), float(tol), int(max_iter))
    if USE_NUMBA:
        return intersect_surface_numba(*args)
    return intersect_surface_numpy(*args)
