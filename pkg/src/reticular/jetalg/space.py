"""Truncated jet spaces and exact subspaces of them.

Columns of a jet space are monomials sorted by the local degree order
(degree first, x-heavy first inside a degree).  A subspace is kept as
a sparse echelon form whose pivot is the lowest column of each row, so
the non-pivot columns are the standard monomials of the quotient.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .poly import Poly, VarSpec, local_key

Vector = dict  # column index -> Fraction


@lru_cache(maxsize=None)
def _exps_of_degree(nvars: int, d: int) -> tuple[tuple[int, ...], ...]:
    if nvars == 0:
        return ((),) if d == 0 else ()
    out = []
    for first in range(d, -1, -1):
        for rest in _exps_of_degree(nvars - 1, d - first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def _exps_upto(nvars: int, dmin: int, dmax: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for d in range(dmin, dmax + 1):
        out.extend(_exps_of_degree(nvars, d))
    return tuple(out)


@dataclass(frozen=True)
class JetSpace:
    """J^l over ``spec``: polynomials modulo terms of degree above ``l``."""

    spec: VarSpec
    l: int

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("jet order must be non-negative")
        mons = _exps_upto(self.spec.nvars, 0, self.l)
        object.__setattr__(self, "_monomials", mons)
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(mons)})

    @property
    def monomials(self) -> tuple[tuple[int, ...], ...]:
        return self._monomials

    @property
    def dim(self) -> int:
        return len(self._monomials)

    def product(self) -> "ProductSpace":
        return ProductSpace((self,))


def monomials(space: JetSpace, dmin: int, dmax: int, restrict: Iterable[str] | None = None):
    """Monomials of ``space`` with degree in [dmin, dmax], optionally only in ``restrict``."""
    spec = space.spec
    dmax = min(dmax, space.l)
    if restrict is None:
        return [e for e in space.monomials if dmin <= sum(e) <= dmax]
    pos = [spec.index(n) for n in restrict]
    out = []
    for small in _exps_upto(len(pos), max(dmin, 0), max(dmax, -1)) if dmax >= max(dmin, 0) else ():
        e = [0] * spec.nvars
        for i, p in zip(pos, small):
            e[i] = p
        out.append(tuple(e))
    return sorted(out, key=local_key)


class ProductSpace:
    """Direct sum of jet spaces of a common order, one per component.

    Column order is (degree, component, local order inside the component).
    """

    def __init__(self, comps: Sequence[JetSpace]):
        comps = tuple(comps)
        if not comps:
            raise ValueError("empty product")
        if len({c.l for c in comps}) != 1:
            raise ValueError("components must share the jet order")
        self.comps = comps
        self.l = comps[0].l
        cols = []
        for i, c in enumerate(comps):
            for e in c.monomials:
                cols.append((sum(e), i, local_key(e)[1], e))
        cols.sort()
        self.columns: tuple[tuple[int, tuple[int, ...]], ...] = tuple((i, e) for _, i, _, e in cols)
        self.index = {col: j for j, col in enumerate(self.columns)}

    @classmethod
    def of(cls, specs: Sequence[VarSpec], l: int) -> "ProductSpace":
        return cls([JetSpace(s, l) for s in specs])

    @property
    def m(self) -> int:
        return len(self.comps)

    @property
    def dim(self) -> int:
        return len(self.columns)

    def __eq__(self, other):
        return isinstance(other, ProductSpace) and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def vector(self, polys: Sequence[Poly | None]) -> Vector:
        """Truncated coordinate vector of a tuple of polynomials (``None`` = 0)."""
        if isinstance(polys, Poly):
            polys = (polys,)
        if len(polys) != self.m:
            raise ValueError(f"expected {self.m} components, got {len(polys)}")
        out = {}
        for i, p in enumerate(polys):
            if p is None:
                continue
            if p.spec != self.comps[i].spec:
                p = p.embed(self.comps[i].spec)
            for e, c in p.items():
                if sum(e) <= self.l:
                    out[self.index[(i, e)]] = c
        return out

    def unit(self, comp: int, exps: tuple[int, ...]) -> Vector:
        return {self.index[(comp, tuple(exps))]: Fraction(1)}

    def polys(self, vec: Vector) -> tuple[Poly, ...]:
        parts: list[dict] = [{} for _ in self.comps]
        for j, c in vec.items():
            i, e = self.columns[j]
            parts[i][e] = c
        return tuple(Poly(s.spec, d) for s, d in zip(self.comps, parts))

    def describe(self, col: int) -> str:
        i, e = self.columns[col]
        mono = str(Poly.monomial(self.comps[i].spec, e))
        return mono if self.m == 1 else f"e{i + 1}*{mono}" if mono != "1" else f"e{i + 1}"


class LinSubspace:
    """Exact subspace of a :class:`ProductSpace` in sparse echelon form."""

    def __init__(self, ambient: ProductSpace):
        if isinstance(ambient, JetSpace):
            ambient = ambient.product()
        self.ambient = ambient
        self._rows: dict[int, Vector] = {}
        self._rref = None

    @classmethod
    def span(cls, ambient, vectors: Iterable[Vector]) -> "LinSubspace":
        sub = cls(ambient)
        for v in vectors:
            sub._insert(v)
        return sub

    def copy(self) -> "LinSubspace":
        out = LinSubspace(self.ambient)
        out._rows = dict(self._rows)
        return out

    def _reduce(self, vec: Vector) -> Vector:
        v = {c: a for c, a in vec.items() if a}
        rows = self._rows
        heap = [c for c in v if c in rows]
        heapq.heapify(heap)
        last = -1
        while heap:
            c = heapq.heappop(heap)
            if c == last:
                continue
            last = c
            a = v.get(c)
            if not a:
                continue
            for col, b in rows[c].items():
                nv = v.get(col, 0) - a * b
                if nv:
                    if col not in v and col in rows:
                        heapq.heappush(heap, col)
                    v[col] = nv
                else:
                    v.pop(col, None)
        return v

    def _insert(self, vec: Vector) -> bool:
        v = self._reduce(vec)
        if not v:
            return False
        p = min(v)
        inv = 1 / v[p]
        if inv != 1:
            v = {c: a * inv for c, a in v.items()}
        self._rows[p] = v
        self._rref = None
        return True

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def codim(self) -> int:
        return self.ambient.dim - self.dim

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(sorted(self._rows))

    def contains(self, vec: Vector) -> bool:
        return not self._reduce(vec)

    __contains__ = contains

    def residue(self, vec: Vector) -> Vector:
        """Remainder of ``vec`` after reduction; zero exactly when it lies in the subspace."""
        return self._reduce(vec)

    def issubspace(self, other: "LinSubspace") -> bool:
        return all(other.contains(r) for r in self._rows.values())

    def __le__(self, other):
        return self.issubspace(other)

    def __eq__(self, other):
        if not isinstance(other, LinSubspace):
            return NotImplemented
        return self.ambient == other.ambient and self.dim == other.dim and self <= other

    __hash__ = None

    def __add__(self, other: "LinSubspace") -> "LinSubspace":
        if other.ambient != self.ambient:
            raise ValueError("subspaces of different ambient spaces")
        big, small = (self, other) if self.dim >= other.dim else (other, self)
        out = big.copy()
        for r in small._rows.values():
            out._insert(r)
        return out

    def extend(self, vectors: Iterable[Vector]) -> "LinSubspace":
        out = self.copy()
        for v in vectors:
            out._insert(v)
        return out

    @property
    def basis(self) -> list[Vector]:
        """Reduced row echelon basis, ordered by pivot."""
        if self._rref is None:
            rows = {p: dict(r) for p, r in self._rows.items()}
            for p in sorted(rows, reverse=True):
                r = rows[p]
                for c in sorted(k for k in r if k != p and k in rows):
                    a = r.get(c)
                    if a:
                        for col, b in rows[c].items():
                            nv = r.get(col, 0) - a * b
                            if nv:
                                r[col] = nv
                            else:
                                r.pop(col, None)
            self._rref = [rows[p] for p in sorted(rows)]
        return self._rref

    def quotient_basis(self) -> list[tuple[int, tuple[int, ...]]]:
        """Standard monomials: the non-pivot columns, in column order."""
        return [col for j, col in enumerate(self.ambient.columns) if j not in self._rows]

    def __repr__(self):
        return f"LinSubspace(dim={self.dim}, ambient_dim={self.ambient.dim})"


@dataclass(frozen=True)
class Coeff:
    """Coefficient ring for :func:`module_span`.

    ``variables=None`` means every variable of the component holding the
    generator.  ``min_degree`` 0 is the full ring, 1 the maximal ideal,
    d its d-th power.  ``Coeff.reals()`` gives constant coefficients.
    """

    variables: tuple[str, ...] | None = None
    min_degree: int = 0

    @classmethod
    def ring(cls, variables: Iterable[str] | None = None) -> "Coeff":
        return cls(None if variables is None else tuple(variables), 0)

    @classmethod
    def ideal(cls, variables: Iterable[str] | None = None, power: int = 1) -> "Coeff":
        return cls(None if variables is None else tuple(variables), power)

    @classmethod
    def reals(cls) -> "Coeff":
        return cls((), 0)


def _span_vectors(gens, coeff: Coeff, space: ProductSpace):
    l = space.l
    for g in gens:
        if isinstance(g, Poly):
            g = (g,)
        g = tuple(g)
        if len(g) != space.m:
            raise ValueError(f"generator has {len(g)} slots, space has {space.m}")
        slots = []
        for i, p in enumerate(g):
            if p is None or not p:
                continue
            spec = space.comps[i].spec
            if p.spec != spec:
                p = p.embed(spec)
            slots.append((i, spec, [(e, sum(e), c) for e, c in p.items()]))
        if not slots:
            continue
        low = min(d for _, _, terms in slots for _, d, _ in terms)
        if low > l:
            continue
        if coeff.variables is None:
            specs = {spec for _, spec, _ in slots}
            if len(specs) != 1:
                raise ValueError("coupled generator needs an explicit coefficient variable list")
            cvars = next(iter(specs)).names
        else:
            cvars = coeff.variables
        maps = {i: [spec.index(n) for n in cvars] for i, spec, _ in slots}
        for small in _exps_upto(len(cvars), coeff.min_degree, l - low) if l - low >= coeff.min_degree else ():
            dm = sum(small)
            vec = {}
            for i, spec, terms in slots:
                pos = maps[i]
                for e, d, c in terms:
                    if d + dm > l:
                        continue
                    ne = list(e)
                    for j, p in zip(pos, small):
                        if p:
                            ne[j] += p
                    col = space.index[(i, tuple(ne))]
                    vec[col] = vec.get(col, 0) + c
            if vec:
                yield vec


def module_span(gens: Sequence, coeff: Coeff, space) -> LinSubspace:
    """Span of ``coeff``-multiples of ``gens`` inside ``space`` (truncated)."""
    if isinstance(space, JetSpace):
        space = space.product()
    return LinSubspace.span(space, _span_vectors(gens, coeff, space))


def extend_span(sub: LinSubspace, gens: Sequence, coeff: Coeff) -> LinSubspace:
    return sub.extend(_span_vectors(gens, coeff, sub.ambient))
