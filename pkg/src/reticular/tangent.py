"""Tangent spaces, codimensions, determinacy, versality and stability.

Everything here is exact: subspaces of truncated jet spaces are built
with :mod:`reticular.jetalg` and compared by rational elimination.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .jetalg import (Coeff, JetSpace, LinSubspace, Poly, ProductSpace, VarSpec, extend_span, group_names,
                     infer_spec, module_span, names_in, parse_poly)

START_ORDER = 3
CAP_ENV = "RETIC_JET_CAP"


def jet_cap(n: int = 2) -> int:
    """Highest jet order tried by the automatic order policy."""
    env = os.environ.get(CAP_ENV)
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"{CAP_ENV} must be an integer, got {env!r}") from None
        if cap < START_ORDER:
            raise ValueError(f"{CAP_ENV} must be at least {START_ORDER}")
        return cap
    return n + 5


class Verdict(Enum):
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------- germ types

def _split(text: str) -> list[str]:
    parts = [p.strip() for p in text.replace("\n", ";").split(";")]
    return [p for p in parts if p]


@dataclass(frozen=True)
class MultiGerm:
    """A tuple of function germs, each in its own corner coordinates.

    Components may share parameter variables; each component's spec is
    its own x- and y-block followed by the shared parameters.
    """

    comps: tuple[Poly, ...]

    def __post_init__(self):
        comps = tuple(self.comps)
        object.__setattr__(self, "comps", comps)
        if not comps:
            raise ValueError("a multi-germ needs at least one component")
        for i, c in enumerate(comps):
            if c.constant:
                raise ValueError(f"component {i + 1} does not vanish at 0: {c}")

    @classmethod
    def parse(cls, text: str, params: Iterable[str] = (), r: int | None = None,
              k: int | None = None) -> "MultiGerm":
        """Parse ``;``-separated components; variables are inferred per component."""
        params = tuple(params)
        comps = []
        for part in _split(text):
            if r is None and k is None:
                spec = infer_spec(part, params)
            else:
                used = infer_spec(part)
                spec = VarSpec.build(used.r if r is None else r, used.k if k is None else k, params)
            comps.append(parse_poly(part, spec))
        return cls(tuple(comps))

    @property
    def m(self) -> int:
        return len(self.comps)

    @property
    def params(self) -> tuple[str, ...]:
        seen = []
        for c in self.comps:
            for p in c.spec.params:
                if p not in seen:
                    seen.append(p)
        return tuple(VarSpec.of(seen).names)

    def __str__(self):
        return "; ".join(str(c) for c in self.comps)


@dataclass(frozen=True)
class Family:
    """Unfolding F(x, y, t, q, z) = (F_1, ..., F_m).

    ``q`` holds the unfolding parameters (q- or u-named).  With ``z`` set,
    every F_i must be of the form g_i - z; ``t`` and ``z`` may be None for
    plain parameter unfoldings.
    """

    comps: tuple[Poly, ...]
    q: tuple[str, ...]
    t: str | None = "t"
    z: str | None = "z"

    def __post_init__(self):
        q = tuple(VarSpec.of(self.q).names)
        object.__setattr__(self, "q", q)
        params = VarSpec.of(((self.t,) if self.t else ()) + q + ((self.z,) if self.z else ())).names
        comps = []
        for i, c in enumerate(self.comps):
            target = VarSpec(c.spec.state + params)
            stray = [v for v in c.variables() if target.resolve(v) is None]
            if stray:
                raise ValueError(f"component {i + 1} uses variables outside the family: {stray}")
            comps.append(c.embed(target))
        object.__setattr__(self, "comps", tuple(comps))
        if not comps:
            raise ValueError("a family needs at least one component")
        if self.z:
            for i, c in enumerate(self.comps):
                dz = c.diff(self.z)
                if dz != Poly.const(c.spec, -1):
                    raise ValueError(f"component {i + 1} is not of the form g - z: dF/dz = {dz}")

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Family":
        """Parse ``;``-separated components.  q-parameters are completed to q1..qn."""
        parts = _split(text)
        used = {v for part in parts for v in names_in(part)}
        qs = sorted(v for v in used if v[0] == "q")
        us = sorted(v for v in used if v[0] == "u")
        if qs or n is not None:
            if n is None:
                n = 1 if set(qs) <= {"q", "q1"} else max(int(v[1:]) for v in qs if v != "q")
            q = group_names("q", n)
            bad = [v for v in qs if v not in q and not (n == 1 and v == "q1")]
            if bad:
                raise ValueError(f"parameters {bad} do not fit n = {n}")
        else:
            q = ()
        t = "t" if "t" in used or "z" in used else None
        z = "z" if "z" in used else None
        params = VarSpec.of(((t,) if t else ()) + tuple(q) + tuple(us) + ((z,) if z else ())).names
        comps = []
        for part in parts:
            state = [v for v in names_in(part) if v[0] in "xy"]
            spec = infer_spec(" ".join(state))
            comps.append(parse_poly(part, VarSpec(spec.state + params)))
        return cls(tuple(comps), tuple(q) + tuple(us), t, z)

    @property
    def m(self) -> int:
        return len(self.comps)

    @property
    def n(self) -> int:
        return len(self.q)

    @property
    def params(self) -> tuple[str, ...]:
        return self.comps[0].spec.params

    @property
    def unfolding_params(self) -> tuple[str, ...]:
        """Parameters of F at t = 0: q followed by z."""
        return self.q + ((self.z,) if self.z else ())

    def base(self) -> MultiGerm:
        """The organising multi-germ F|_{t=q=z=0}."""
        out = []
        for c in self.comps:
            zero = {p: 0 for p in c.spec.params}
            out.append(c.subs(zero).restrict(VarSpec(c.spec.state)))
        return MultiGerm(tuple(out))

    def at_t0(self) -> MultiGerm:
        """F|_{t=0} as a multi-germ with parameters (q, z)."""
        if self.t is None:
            return MultiGerm(self.comps)
        out = []
        for c in self.comps:
            spec = c.spec.drop([self.t])
            out.append(c.subs({self.t: 0}).restrict(spec))
        return MultiGerm(tuple(out))

    def drop_parameter(self, name: str) -> "Family":
        """Same family with ``name`` set to 0 (the variable stays, unused)."""
        return Family(tuple(c.subs({name: 0}) for c in self.comps), self.q, self.t, self.z)

    def slice(self, name: str, value) -> "Family":
        """Fix parameter ``name`` at an exact rational value and drop it."""
        rest = tuple(p for p in self.q if p != name)
        if len(rest) == len(self.q):
            raise KeyError(f"{name} is not a parameter of this family")
        renamed = dict(zip(rest, group_names("q", len(rest)))) if all(p[0] == "q" for p in rest) else {}
        comps = []
        for c in self.comps:
            d = c.subs({name: value})
            d = d.restrict(d.spec.drop([name]))
            comps.append(d.rename(renamed) if renamed else d)
        return Family(tuple(comps), tuple(renamed.get(p, p) for p in rest), self.t, self.z)

    def __str__(self):
        return "; ".join(str(c) for c in self.comps)


def nondegeneracy_issues(F: Family) -> list[str]:
    """Syntactic non-degeneracy checks on a family; an empty list means it passes."""
    issues = []
    if not F.z:
        issues.append("family has no front variable z")
    for i, c in enumerate(F.comps):
        tag = f"component {i + 1}"
        if c.constant:
            issues.append(f"{tag}: F(0) != 0")
        for v in c.spec.state:
            if c.diff(v).constant:
                issues.append(f"{tag}: dF/d{v}(0) != 0")
        funcs = [Poly.var(c.spec, v) for v in c.spec.xs]
        if F.t:
            funcs.append(Poly.var(c.spec, F.t))
        funcs.append(c)
        funcs.extend(c.diff(v) for v in c.spec.state)
        rows = []
        for f in funcs:
            row = []
            for v in c.spec.names:
                e = [0] * c.spec.nvars
                e[c.spec.index(v)] = 1
                row.append(f.coefficient(tuple(e)))
            rows.append({j: a for j, a in enumerate(row) if a})
        if _rank(rows) < len(rows):
            issues.append(f"{tag}: differentials of (x, t, F, dF/dx, dF/dy) are dependent at 0")
    if F.m > 1:
        seen = {}
        for i, c in enumerate(F.comps):
            key = tuple(c.diff(p).constant for p in ((F.t,) if F.t else ()) + F.q)
            if key in seen:
                issues.append(f"components {seen[key] + 1} and {i + 1} have equal (dF/dt, dF/dq) at 0")
            seen.setdefault(key, i)
    return issues


def _rank(rows: list[dict]) -> int:
    pivots: dict[int, dict] = {}
    for r in rows:
        v = dict(r)
        while v:
            p = min(v)
            if p not in pivots:
                pivots[p] = v
                break
            a = v[p] / pivots[p][p]
            for c, b in pivots[p].items():
                nv = v.get(c, 0) - a * b
                if nv:
                    v[c] = nv
                else:
                    v.pop(c, None)
    return len(pivots)


# ---------------------------------------------------------- single germs

def _x_partials(f: Poly) -> list[Poly]:
    return [Poly.var(f.spec, x) * f.diff(x) for x in f.spec.xs]


def _y_partials(f: Poly) -> list[Poly]:
    return [f.diff(y) for y in f.spec.ys]


def orbit_tangent_rK(f: Poly, l: int) -> LinSubspace:
    """<f, x df/dx> over the full ring plus the maximal ideal times <df/dy>, in J^l."""
    J = JetSpace(f.spec, l)
    sub = module_span([f] + _x_partials(f), Coeff.ring(), J)
    return extend_span(sub, _y_partials(f), Coeff.ideal())


def ext_tangent_Q(f: Poly, l: int) -> LinSubspace:
    """The ideal <f, x df/dx, df/dy> truncated to J^l."""
    return module_span([f] + _x_partials(f) + _y_partials(f), Coeff.ring(), JetSpace(f.spec, l))


def quotient_dim(f: Poly, l: int) -> int:
    return ext_tangent_Q(f, l).codim


@dataclass(frozen=True)
class GermCodim:
    mu: int | float
    order: int
    phi: tuple[Poly, ...]

    @property
    def isolated(self) -> bool:
        return self.mu != math.inf


def germ_codim(f: Poly, l: int | None = None, cap: int | None = None) -> GermCodim:
    """Codimension of Q(f) with the automatic order policy.

    Stops at the first order l >= 3 whose quotient dimension equals the
    one at l - 1; that equality forces M^l into Q(f), so the value is final.
    With an explicit ``l`` only orders l - 1 and l are compared.
    """
    if l is not None:
        orders = [max(l - 1, 0), l]
    else:
        cap = jet_cap() if cap is None else cap
        orders = list(range(START_ORDER - 1, max(cap, START_ORDER) + 1))
    prev = None
    for order in orders:
        Q = ext_tangent_Q(f, order)
        if prev is not None and Q.codim == prev:
            basis = sorted(Q.quotient_basis(), key=lambda col: Q.ambient.index[col], reverse=True)
            phi = tuple(Poly.monomial(f.spec, e) for _, e in basis)
            return GermCodim(Q.codim, order, phi)
        prev = Q.codim
    return GermCodim(math.inf, orders[-1], ())


@dataclass(frozen=True)
class CodimReport:
    """Per-component quotient dimensions and bases of Q(f_i).

    ``phi[i]`` runs from the highest-degree standard monomial down to 1.
    """

    germ: MultiGerm
    mu: tuple
    phi: tuple[tuple[Poly, ...], ...]
    orders: tuple[int, ...]

    @property
    def isolated(self) -> bool:
        return all(m != math.inf for m in self.mu)

    @property
    def total(self):
        return sum(self.mu)

    def as_dict(self) -> dict:
        return {
            "germ": [str(c) for c in self.germ.comps],
            "mu": [m if m != math.inf else "inf" for m in self.mu],
            "phi": [[str(p) for p in ph] for ph in self.phi],
            "orders": list(self.orders),
        }


def codim_report(f0: MultiGerm, l: int | None = None, cap: int | None = None) -> CodimReport:
    parts = [germ_codim(c, l, cap) for c in f0.comps]
    return CodimReport(f0, tuple(p.mu for p in parts), tuple(p.phi for p in parts), tuple(p.order for p in parts))


# ----------------------------------------------------------- determinacy

def _degree_units(space: ProductSpace, d: int):
    for j, (i, e) in enumerate(space.columns):
        if sum(e) == d:
            yield j, {j: 1}


def sufficient_test(f: Poly, l: int) -> bool:
    """M^{l+1} inside M*(<f, x df/dx> + M<df/dy>) + M^{l+2}."""
    J = JetSpace(f.spec, l + 1)
    S = module_span([f] + _x_partials(f), Coeff.ideal(), J)
    S = extend_span(S, _y_partials(f), Coeff.ideal(power=2))
    return all(S.contains(v) for _, v in _degree_units(S.ambient, l + 1))


def inclusion_test(f: Poly, l: int) -> bool:
    """M^{l+1} inside <f, x df/dx> + M<df/dy> (checked modulo M^{l+2}, exact by Nakayama)."""
    T = orbit_tangent_rK(f, l + 1)
    return all(T.contains(v) for _, v in _degree_units(T.ambient, l + 1))


def truncation_witness(f: Poly, l: int, cap: int | None = None) -> bool:
    """True when the l-jet of f has a different Q-codimension than f itself.

    Q-codimension is a reticular K-invariant, so a difference proves that
    f is not l-determined.
    """
    cap = max(jet_cap() if cap is None else cap, l + 2)
    return germ_codim(f, cap=cap).mu != germ_codim(f.truncate(l), cap=cap).mu


def necessary_test(f: Poly, l: int) -> bool:
    """False only when f is certainly not l-determined."""
    return inclusion_test(f, l) and not truncation_witness(f, l)


def is_rK_l_determined(f: Poly, l: int) -> Verdict:
    if sufficient_test(f, l):
        return Verdict.TRUE
    if not necessary_test(f, l):
        return Verdict.FALSE
    return Verdict.INCONCLUSIVE


def determinacy_order(f: Poly, cap: int | None = None) -> int | None:
    """Smallest l <= cap at which the sufficient test passes."""
    cap = jet_cap() if cap is None else cap
    for l in range(1, cap + 1):
        if sufficient_test(f, l):
            return l
    return None


def _component_gens(space: ProductSpace, comps: Sequence[Poly]):
    m = len(comps)
    ring_gens, ideal_gens = [], []
    for i, c in enumerate(comps):
        for g in [c] + _x_partials(c):
            vec = [None] * m
            vec[i] = g
            ring_gens.append(tuple(vec))
        for g in _y_partials(c):
            vec = [None] * m
            vec[i] = g
            ideal_gens.append(tuple(vec))
    return ring_gens, ideal_gens


def is_PK_l_determined(f: MultiGerm, l: int) -> Verdict:
    """Sufficient test for (P-K) l-determinacy of a multi-germ with parameters.

    Returns TRUE or INCONCLUSIVE; no necessary test is attempted.
    """
    space = ProductSpace.of([c.spec for c in f.comps], l)
    ring_gens, ideal_gens = _component_gens(space, f.comps)
    T = module_span(ring_gens, Coeff.ring(), space)
    T = extend_span(T, ideal_gens, Coeff.ideal())
    params = f.params
    if params:
        coupled = [tuple(c.diff(u) for c in f.comps) for u in params]
        T = extend_span(T, coupled, Coeff.ideal(params))
    ok = all(T.contains(v) for _, v in _degree_units(space, l))
    return Verdict.TRUE if ok else Verdict.INCONCLUSIVE


# ------------------------------------------------- versality and stability

@dataclass(frozen=True)
class TransversalityReport:
    ok: bool
    orders: tuple[tuple[int, int], ...]
    witness: str | None = None
    determinacy_order: int | None = None
    bound: int | None = None

    def __bool__(self):
        return self.ok


def _versal_span(F: Family, l: int, with_t: bool) -> LinSubspace:
    f = F.at_t0()
    space = ProductSpace.of([c.spec for c in f.comps], l)
    ring_gens, ideal_gens = _component_gens(space, f.comps)
    T = module_span(ring_gens + ideal_gens, Coeff.ring(), space)
    u = f.params
    T = extend_span(T, [tuple(c.diff(p) for c in f.comps) for p in u], Coeff.ring(u))
    if with_t and F.t:
        dt = tuple(c.diff(F.t).subs({F.t: 0}).restrict(fc.spec) for c, fc in zip(F.comps, f.comps))
        T = extend_span(T, [dt], Coeff.reals())
    return T


def _stable_span(F: Family, l: int) -> LinSubspace:
    space = ProductSpace.of([c.spec for c in F.comps], l)
    ring_gens, ideal_gens = _component_gens(space, F.comps)
    T = module_span(ring_gens + ideal_gens, Coeff.ring(), space)
    tu = F.params
    u = tuple(p for p in tu if p != F.t)
    T = extend_span(T, [tuple(c.diff(p) for c in F.comps) for p in u], Coeff.ring(tu))
    if F.t:
        T = extend_span(T, [tuple(c.diff(F.t) for c in F.comps)], Coeff.ring((F.t,)))
    return T


def _transversality(F: Family, build, l: int | None) -> TransversalityReport:
    orders = [l] if l is not None else [START_ORDER, START_ORDER + 1]
    seen = []
    for order in orders:
        T = build(order)
        seen.append((order, T.codim))
        if T.codim:
            col = T.ambient.index[T.quotient_basis()[0]]
            return TransversalityReport(False, tuple(seen), T.ambient.describe(col))
    base = F.base()
    dets = [determinacy_order(c) for c in base.comps]
    det = None if any(d is None for d in dets) else max(dets)
    bound = None if det is None else det * F.m + det + 1
    return TransversalityReport(True, tuple(seen), None, det, bound)


def check_inf_versal(F: Family, l: int | None = None, with_t: bool = True) -> TransversalityReport:
    """Whether F|_{t=0} plus the t-direction spans the whole product jet space."""
    return _transversality(F, lambda order: _versal_span(F, order, with_t), l)


def check_inf_stable(F: Family, l: int | None = None) -> TransversalityReport:
    """Whether the tangent space of F in all variables (x, y, t, q, z) is everything."""
    return _transversality(F, lambda order: _stable_span(F, order), l)


def is_inf_versal(F: Family, l: int | None = None) -> bool:
    return check_inf_versal(F, l).ok


def is_inf_stable(F: Family, l: int | None = None) -> bool:
    return check_inf_stable(F, l).ok
