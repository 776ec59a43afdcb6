"""Crossings between the planar fronts of two components."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ANGLE_TOL = 1e-3
MERGE_TOL = 1e-8
_CHUNK = 512


@dataclass(frozen=True)
class Crossing:
    q: float
    z: float
    angle: float
    degenerate: bool


@dataclass(frozen=True)
class EventReport:
    """Intersections of fronts i and j in one frame.

    ``reliable`` is False at t = 0, where the family sits exactly on the
    bifurcation and crossings are tangencies.
    """

    pair: tuple[int, int]
    t: float
    crossings: tuple[Crossing, ...]
    overlap: bool
    reliable: bool

    @property
    def count(self) -> int:
        return len(self.crossings)

    @property
    def degenerate(self) -> bool:
        return self.overlap or any(c.degenerate for c in self.crossings)

    @property
    def locations(self) -> list[tuple[float, float]]:
        return [(c.q, c.z) for c in self.crossings]

    def describe(self) -> str:
        if not self.reliable:
            note = " (at bifurcation, unreliable)"
        elif self.degenerate:
            note = " (degenerate)"
        else:
            note = ""
        return f"F{self.pair[0] + 1}/F{self.pair[1] + 1}: {self.count} crossing(s){note}"

    def as_dict(self) -> dict:
        return {
            "pair": [self.pair[0] + 1, self.pair[1] + 1],
            "t": self.t,
            "count": self.count,
            "degenerate": self.degenerate,
            "reliable": self.reliable,
            "locations": [[round(q, 12), round(z, 12)] for q, z in self.locations],
        }


def _segments(polylines) -> np.ndarray:
    segs = [np.column_stack([pl[:-1, :2], pl[1:, :2]]) for pl in polylines if len(pl) > 1]
    return np.vstack(segs) if segs else np.zeros((0, 4))


def segment_crossings(A: np.ndarray, B: np.ndarray, angle_tol: float = ANGLE_TOL):
    """Pairwise intersections of segment sets A, B (rows x0, y0, x1, y1).

    Returns (points, angles, overlap) where overlap reports collinear
    segments sharing more than a point.
    """
    pts, angles = [], []
    overlap = False
    if not len(A) or not len(B):
        return np.zeros((0, 2)), np.zeros(0), False
    q0, d2 = B[:, :2], B[:, 2:] - B[:, :2]
    len2 = np.hypot(d2[:, 0], d2[:, 1])
    blo, bhi = np.minimum(B[:, :2], B[:, 2:]), np.maximum(B[:, :2], B[:, 2:])
    for s in range(0, len(A), _CHUNK):
        a = A[s:s + _CHUNK]
        p0, d1 = a[:, None, :2], (a[:, 2:] - a[:, :2])[:, None, :]
        alo = np.minimum(a[:, :2], a[:, 2:])[:, None, :]
        ahi = np.maximum(a[:, :2], a[:, 2:])[:, None, :]
        near = np.all((alo <= bhi[None] + MERGE_TOL) & (blo[None] <= ahi + MERGE_TOL), axis=2)
        if not near.any():
            continue
        ia, ib = np.nonzero(near)
        P0, D1 = p0[ia, 0], d1[ia, 0]
        Q0, D2 = q0[ib], d2[ib]
        w = Q0 - P0
        den = D1[:, 0] * D2[:, 1] - D1[:, 1] * D2[:, 0]
        len1 = np.hypot(D1[:, 0], D1[:, 1])
        scale = len1 * len2[ib]
        par = np.abs(den) <= 1e-12 * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (w[:, 0] * D2[:, 1] - w[:, 1] * D2[:, 0]) / den
            v = (w[:, 0] * D1[:, 1] - w[:, 1] * D1[:, 0]) / den
        hit = ~par & (u >= 0) & (u <= 1) & (v >= 0) & (v <= 1)
        pts.append(P0[hit] + u[hit, None] * D1[hit])
        angles.append(np.arcsin(np.clip(np.abs(den[hit]) / scale[hit], 0, 1)))
        if par.any():
            cross = np.abs(w[par, 0] * D1[par, 1] - w[par, 1] * D1[par, 0])
            coll = cross <= 1e-12 * np.maximum(len1[par], 1e-300) * np.maximum(np.hypot(w[par, 0], w[par, 1]), 1)
            if coll.any():
                # projections of B's endpoints onto A's direction must overlap A with positive length
                d = D1[par][coll]
                l2 = np.einsum("ij,ij->i", d, d)
                t0 = np.einsum("ij,ij->i", w[par][coll], d) / l2
                t1 = t0 + np.einsum("ij,ij->i", D2[par][coll], d) / l2
                lo, hi = np.minimum(t0, t1), np.maximum(t0, t1)
                overlap |= bool(np.any(np.minimum(hi, 1) - np.maximum(lo, 0) > 1e-9))
    if not pts:
        return np.zeros((0, 2)), np.zeros(0), overlap
    return np.vstack(pts), np.concatenate(angles), overlap


def _merge(points: np.ndarray, angles: np.ndarray):
    order = np.lexsort((points[:, 1], points[:, 0]))
    kept_p, kept_a = [], []
    for i in order:
        p = points[i]
        for j, k in enumerate(kept_p):
            if abs(k[0] - p[0]) <= MERGE_TOL and abs(k[1] - p[1]) <= MERGE_TOL:
                kept_a[j] = min(kept_a[j], angles[i])
                break
        else:
            kept_p.append(p)
            kept_a.append(angles[i])
    return kept_p, kept_a


def intersection_events(frame, pair: tuple[int, int], angle_tol: float = ANGLE_TOL) -> EventReport:
    """Crossings between the polylines of components ``pair`` over all strata.

    Needs a planar frame (n = 1); slice an n = 2 family first.
    """
    if frame.n != 1:
        raise ValueError("intersection events need curves: slice the family to n = 1 first")
    i, j = pair
    A = _segments(frame.polylines(i))
    B = _segments(frame.polylines(j))
    points, angles, overlap = segment_crossings(A, B, angle_tol)
    kept_p, kept_a = _merge(points, angles) if len(points) else ([], [])
    crossings = tuple(
        Crossing(float(p[0]), float(p[1]), float(a), bool(a < angle_tol)) for p, a in zip(kept_p, kept_a)
    )
    return EventReport((i, j), frame.t, crossings, overlap, frame.t != 0.0)
