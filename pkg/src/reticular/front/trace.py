"""Numerical tracing of the stratified fronts of a generating family.

A component F = g - z contributes, for every stratum sigma (the corner
variables pinned to 0), the points (q, g) where all remaining partials of
g in x and y vanish and the free x stay non-negative.  Each stratum is
solved by a triangular plan: one equation per free state variable, each
solved for one unknown in closed form or by bisection, with the leftover
unknowns sampled on a regular grid.  Everything here is float64.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ..jetalg import Poly
from ..tangent import Family

DEFAULT_BOX = 1.5
DEFAULT_GRID = {1: 801, 2: 161}
TOL_CLOSED = 1e-9
TOL_BISECT = 1e-6
TOL_BOX = 1e-12
COST = {"affine": 0, "linear": 2, "quadratic": 2, "bisect": 3}


class FrontError(ValueError):
    """A family the tracer cannot handle (non-affine z, unsolvable stratum)."""


def default_grid(n: int) -> int:
    return DEFAULT_GRID.get(n, DEFAULT_GRID[2])


# ------------------------------------------------------------ numerics

class NumPoly:
    """A Poly compiled for vectorised float evaluation."""

    def __init__(self, p: Poly):
        names = p.spec.names
        self.names = p.variables()
        self.terms = [
            (float(c), tuple((names[i], e) for i, e in enumerate(exps) if e))
            for exps, c in p.items()
        ]

    def __call__(self, env) -> np.ndarray | float:
        out = 0.0
        for c, mono in self.terms:
            v = c
            for name, e in mono:
                v = v * (env[name] if e == 1 else env[name] ** e)
            out = out + v
        return out


def _coeffs_in(p: Poly, v: str) -> list[Poly]:
    """Coefficients of p as a polynomial in ``v``: p = sum c_k v^k."""
    i = p.spec.index(v)
    out: dict[int, dict] = {}
    for exps, c in p.items():
        e = list(exps)
        k, e[i] = e[i], 0
        out.setdefault(k, {})[tuple(e)] = c
    deg = max(out, default=0)
    return [Poly(p.spec, out.get(k, {})) for k in range(deg + 1)]


# ------------------------------------------------------------ planning

@dataclass(frozen=True)
class Step:
    equation: int
    var: str
    method: str

    @property
    def cost(self) -> int:
        return COST[self.method] + (1 if self.method == "affine" and self.var[0] in "qu" else 0)


@dataclass(frozen=True)
class Plan:
    pinned: tuple[str, ...]
    equations: tuple[Poly, ...]
    steps: tuple[Step, ...]
    drivers: tuple[str, ...]

    @property
    def cost(self) -> int:
        return sum(s.cost for s in self.steps)

    @property
    def closed_form(self) -> bool:
        return all(s.method != "bisect" for s in self.steps)


def _method(eq: Poly, v: str, frozen: set[str]) -> str | None:
    cs = _coeffs_in(eq, v)
    deg = len(cs) - 1
    if deg < 1 or not cs[-1]:
        return None
    if deg == 1:
        return "affine" if set(cs[1].variables()) <= frozen else "linear"
    return "quadratic" if deg == 2 else "bisect"


def plan_stratum(g: Poly, pinned: Sequence[str], q: Sequence[str], t: str | None) -> Plan:
    """Cheapest triangular solving order for one stratum of z = g."""
    spec = g.spec
    if pinned:
        g = g.subs({x: 0 for x in pinned})
    free = [v for v in spec.state if v not in pinned]
    eqs = tuple(g.diff(v) for v in free)
    unknowns = free + list(q)
    frozen = {t} if t else set()
    best = None
    for order in itertools.permutations(range(len(eqs))):
        for chosen in itertools.permutations(unknowns, len(eqs)):
            steps = []
            for pos, (ei, v) in enumerate(zip(order, chosen)):
                later = chosen[pos + 1:]
                if any(eqs[ei].depends_on(w) for w in later):
                    break
                m = _method(eqs[ei], v, frozen)
                if m is None:
                    break
                steps.append(Step(ei, v, m))
            else:
                cost = sum(s.cost for s in steps)
                if best is None or cost < best[0]:
                    best = (cost, tuple(steps))
    if best is None:
        raise FrontError(f"no triangular solving order for stratum {tuple(pinned) or '-'} of {g}")
    solved = {s.var for s in best[1]}
    drivers = tuple(v for v in unknowns if v not in solved)
    return Plan(tuple(pinned), eqs, best[1], drivers)


# ------------------------------------------------------------ data types

@dataclass(frozen=True)
class FrontPoint:
    component: int
    stratum: tuple[str, ...]
    q: tuple[float, ...]
    z: float
    x: tuple[float, ...]
    y: tuple[float, ...]
    s: float
    p: tuple[float, ...]


@dataclass
class FrontBranch:
    """One sheet of one stratum of one component, sampled on the driver grid.

    Arrays have a leading axis of size ``shape`` flattened; entries that are
    not on the front are NaN.  ``x``, ``y``, ``q`` and ``p`` are 2-d.
    """

    component: int
    stratum: tuple[str, ...]
    sheet: tuple[int, ...]
    plan: Plan
    shape: tuple[int, ...]
    xs: tuple[str, ...]
    ys: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    q: np.ndarray
    z: np.ndarray
    s: np.ndarray
    p: np.ndarray
    truncated: bool = False
    dropped: int = 0

    @property
    def valid(self) -> np.ndarray:
        return ~np.isnan(self.z)

    @property
    def size(self) -> int:
        return int(self.valid.sum())

    @property
    def closed_form(self) -> bool:
        return self.plan.closed_form

    @property
    def tolerance(self) -> float:
        return TOL_CLOSED if self.closed_form else TOL_BISECT

    def points(self) -> Iterator[FrontPoint]:
        for i in np.flatnonzero(self.valid):
            yield FrontPoint(
                self.component, self.stratum, tuple(self.q[i]), float(self.z[i]),
                tuple(self.x[i]), tuple(self.y[i]), float(self.s[i]), tuple(self.p[i]),
            )

    def polylines(self, axis: int = 0) -> list[np.ndarray]:
        """Runs of consecutive valid samples as (q..., z) arrays.

        For n = 1 this is the curve in the (q, z) plane.  For n = 2 the
        runs follow grid lines of the driver grid along ``axis``.
        """
        pts = np.column_stack([self.q, self.z])
        ok = self.valid
        if len(self.shape) == 1:
            return _runs(pts, ok)
        grid = pts.reshape(self.shape + (pts.shape[1],))
        okg = ok.reshape(self.shape)
        if axis == 1:
            grid = grid.transpose(1, 0, 2)
            okg = okg.T
        out = []
        for row, okr in zip(grid, okg):
            out.extend(_runs(row, okr))
        return out


def _runs(pts: np.ndarray, ok: np.ndarray) -> list[np.ndarray]:
    out = []
    idx = np.flatnonzero(ok)
    if not len(idx):
        return out
    breaks = np.flatnonzero(np.diff(idx) > 1)
    for chunk in np.split(idx, breaks + 1):
        out.append(pts[chunk])
    return out


@dataclass
class FrontFrame:
    t: float
    n: int
    m: int
    branches: list[FrontBranch]
    events: dict = field(default_factory=dict)

    def component(self, i: int) -> list[FrontBranch]:
        return [b for b in self.branches if b.component == i]

    def polylines(self, i: int) -> list[np.ndarray]:
        return [pl for b in self.component(i) for pl in b.polylines()]

    def points(self) -> Iterator[FrontPoint]:
        for b in self.branches:
            yield from b.points()

    @property
    def truncated(self) -> bool:
        return any(b.truncated for b in self.branches)


# ------------------------------------------------------------ solving

def _front_parts(Fi: Poly, zname: str | None):
    spec = Fi.spec
    if zname is None or zname not in spec:
        raise FrontError("component has no front variable z")
    if Fi.diff(zname) != Poly.const(spec, -1):
        raise FrontError(f"component {Fi} is not affine in z with coefficient -1")
    g = Fi + Poly.var(spec, zname)
    return g.restrict(spec.drop([zname]))


def _ranges(names, box):
    return {v: (0.0, box) if v[0] == "x" else (-box, box) for v in names}


def _quadratic_roots(a, b, c):
    disc = b * b - 4 * a * c
    disc = np.where((disc < 0) & (disc > -1e-14 * (b * b + np.abs(4 * a * c))), 0.0, disc)
    root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = b >= 0
        big = np.where(pos, -b - root, -b + root)
        plus = np.where(pos, 2 * c / big, big / (2 * a))
        minus = np.where(pos, big / (2 * a), 2 * c / big)
    return [plus, minus]


def _bisect_roots(coeffs, lo, hi, samples, size):
    """Real roots in [lo, hi] of sum c_k v^k, pointwise over the driver grid, ranked."""
    deg = len(coeffs) - 1
    grid = np.linspace(lo, hi, samples)
    cs = [np.broadcast_to(np.asarray(c, dtype=float), (size,)) for c in coeffs]
    roots = [np.full(size, np.nan) for _ in range(deg)]

    def ev(v, rows):
        acc = np.zeros_like(v)
        for c in reversed(cs):
            acc = acc * v + c[rows].reshape((-1,) + (1,) * (v.ndim - 1))
        return acc

    chunk = max(1, 2_000_000 // samples)
    for start in range(0, size, chunk):
        rows = np.arange(start, min(size, start + chunk))
        sign = np.sign(ev(np.tile(grid, (len(rows), 1)), rows))
        hit = sign[:, :-1] * sign[:, 1:] < 0
        # roots landing exactly on a sample are bracketed from the left
        hit |= (sign[:, :-1] == 0) & (sign[:, 1:] != 0)
        hit[:, -1] |= sign[:, -1] == 0
        r_idx, k_idx = np.nonzero(hit)
        if not len(r_idx):
            continue
        a, b = grid[k_idx], grid[k_idx + 1]
        ra = rows[r_idx]
        fa = np.sign(ev(a, ra))
        for _ in range(60):
            mid = 0.5 * (a + b)
            fm = np.sign(ev(mid, ra))
            left = (fa == 0) | (fa * fm <= 0)
            b = np.where(left, mid, b)
            a = np.where(left, a, mid)
            fa = np.where(left, fa, fm)
        found = 0.5 * (a + b)
        first = np.r_[True, ra[1:] != ra[:-1]]
        starts = np.maximum.accumulate(np.where(first, np.arange(len(ra)), 0))
        rank = np.arange(len(ra)) - starts
        for k in range(deg):
            sel = rank == k
            roots[k][ra[sel]] = found[sel]
    return roots


def trace_stratum(g: Poly, plan: Plan, t: float, q: Sequence[str], tname: str | None,
                  grid: int, box: float, component: int = 0) -> list[FrontBranch]:
    spec = g.spec
    rng = _ranges(spec.state + tuple(q), box)
    axes = [np.linspace(*rng[v], grid) for v in plan.drivers]
    shape = tuple(grid for _ in plan.drivers) or (1,)
    mesh = np.meshgrid(*axes, indexing="ij") if axes else []
    size = int(np.prod(shape))
    base = {v: m.ravel() for v, m in zip(plan.drivers, mesh)}
    if tname:
        base[tname] = float(t)
    for x in plan.pinned:
        base[x] = np.zeros(size)

    sheets = [((), base, np.ones(size, dtype=bool), False)]
    for step in plan.steps:
        eq = plan.equations[step.equation]
        coeffs = [NumPoly(c) for c in _coeffs_in(eq, step.var)]
        lo, hi = rng[step.var]
        nxt = []
        for label, env, mask, trunc in sheets:
            cs = [np.broadcast_to(np.asarray(c(env), dtype=float), (size,)) for c in coeffs]
            if step.method in ("affine", "linear"):
                with np.errstate(divide="ignore", invalid="ignore"):
                    cand = [np.where(cs[1] != 0, -cs[0] / cs[1], np.nan)]
            elif step.method == "quadratic":
                cand = _quadratic_roots(cs[2], cs[1], cs[0])
            else:
                cand = _bisect_roots(cs, lo - TOL_BOX, hi + TOL_BOX, max(grid, 201), size)
            for j, v in enumerate(cand):
                finite = mask & np.isfinite(v)
                inside = finite & (v >= lo - TOL_BOX) & (v <= hi + TOL_BOX)
                env2 = dict(env)
                env2[step.var] = np.where(inside, v, np.nan)
                cut = trunc or bool((finite & ~inside).any())
                nxt.append((label + (j,), env2, inside, cut))
        sheets = nxt

    zfun = NumPoly(g)
    sfun = NumPoly(g.diff(tname)) if tname else None
    pfun = [NumPoly(g.diff(v)) for v in q]
    eqfun = [NumPoly(e) for e in plan.equations]
    tol = TOL_CLOSED if plan.closed_form else TOL_BISECT
    free_x = [x for x in spec.xs if x not in plan.pinned]
    out = []
    for label, env, mask, trunc in sheets:
        env = {k: (np.where(mask, v, 0.0) if isinstance(v, np.ndarray) else v) for k, v in env.items()}
        for v in spec.state + tuple(q):
            env.setdefault(v, np.zeros(size))
        ok = mask.copy()
        for f in eqfun:
            ok &= np.abs(np.broadcast_to(f(env), (size,))) <= tol
        for x in free_x:
            ok &= env[x] >= -TOL_BOX
        dropped = int((mask & ~ok).sum())

        def col(vals):
            arr = np.broadcast_to(np.asarray(vals, dtype=float), (size,)).copy()
            arr[~ok] = np.nan
            return arr

        def cols(names):
            if not names:
                return np.zeros((size, 0))
            return np.column_stack([col(env[v]) for v in names])

        out.append(FrontBranch(
            component=component,
            stratum=plan.pinned,
            sheet=label,
            plan=plan,
            shape=shape,
            xs=spec.xs,
            ys=spec.ys,
            x=cols(spec.xs),
            y=cols(spec.ys),
            q=cols(tuple(q)),
            z=col(zfun(env)),
            s=col(sfun(env) if sfun else 0.0),
            p=np.column_stack([col(f(env)) for f in pfun]) if pfun else np.zeros((size, 0)),
            truncated=trunc,
            dropped=dropped,
        ))
    return out


def _strata(xs: Sequence[str]):
    for k in range(len(xs) + 1):
        yield from itertools.combinations(xs, k)


def trace_component(Fi: Poly, t: float, grid: int, box: float = DEFAULT_BOX, *,
                    q: Sequence[str] | None = None, tname: str | None = "t", zname: str | None = "z",
                    component: int = 0) -> list[FrontBranch]:
    """All strata of the front of one component at time ``t``."""
    g = _front_parts(Fi, zname)
    if tname and tname not in g.spec:
        tname = None
    if q is None:
        q = tuple(v for v in g.spec.params if v != tname)
    out = []
    for pinned in _strata(g.spec.xs):
        plan = plan_stratum(g, pinned, q, tname)
        out.extend(trace_stratum(g, plan, t, q, tname, grid, box, component))
    return out


def trace_frame(F: Family, t: float, grid: int | None = None, box: float = DEFAULT_BOX,
                angle_tol: float | None = None) -> FrontFrame:
    from .events import ANGLE_TOL, intersection_events

    grid = default_grid(F.n) if grid is None else grid
    branches = []
    for i, c in enumerate(F.comps):
        branches.extend(trace_component(c, t, grid, box, q=F.q, tname=F.t, zname=F.z, component=i))
    frame = FrontFrame(float(t), F.n, F.m, branches)
    if F.n == 1:
        for i, j in itertools.combinations(range(F.m), 2):
            frame.events[(i, j)] = intersection_events(frame, (i, j), ANGLE_TOL if angle_tol is None else angle_tol)
    return frame


def _frame_job(args):
    return trace_frame(*args)


def sweep(F: Family, ts: Sequence[float], grid: int | None = None, box: float = DEFAULT_BOX,
          workers: int = 1) -> list[FrontFrame]:
    """One independently traced frame per t, returned in the order of ``ts``."""
    if F.z is None:
        raise FrontError("family has no front variable z")
    for i, c in enumerate(F.comps):
        _front_parts(c, F.z)
    jobs = [(F, float(t), grid, box) for t in ts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_frame_job, jobs))
    return [_frame_job(j) for j in jobs]


def t_values(t_min: float, t_max: float, frames: int) -> list[float]:
    if frames < 1:
        raise ValueError("need at least one frame")
    if frames == 1:
        return [float(t_min)]
    return [float(v) for v in np.linspace(t_min, t_max, frames)]
