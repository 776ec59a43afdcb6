"""Exact sparse polynomials in partitioned variable sets.

Variables carry a role read off their name: ``x`` (corner coordinates,
constrained to x >= 0), ``y`` (free coordinates), ``t`` (the bifurcation
parameter), ``q`` (unfolding parameters), ``u`` (generic parameter slots,
``u11``..``u99``) and ``z`` (the front coordinate).  A group with a single
member may use the bare letter as its name.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping, Union

ROLES = ("x", "y", "t", "q", "u", "z")
STATE_ROLES = ("x", "y")
_ROLE_RANK = {r: i for i, r in enumerate(ROLES)}
_NAME_RE = re.compile(r"^(?:[xyq][1-9]?|t|z|u(?:[1-9][1-9])?)$")

Exps = tuple


def role_of(name: str) -> str:
    if not _NAME_RE.match(name):
        raise ValueError(f"not a variable name: {name!r}")
    return name[0]


def _var_sort_key(name: str):
    return (_ROLE_RANK[role_of(name)], name)


@dataclass(frozen=True)
class VarSpec:
    """Ordered variable list: x-block, y-block, then parameters t, q, u, z."""

    names: tuple[str, ...] = ()

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variables in {names}")
        ranks = [_var_sort_key(n) for n in names]
        if [r[0] for r in ranks] != sorted(r[0] for r in ranks):
            raise ValueError(f"variables out of role order: {names}")
        for role in ROLES:
            group = [n for n in names if n[0] == role]
            if len(group) > 1 and any(len(n) == 1 for n in group):
                raise ValueError(f"bare {role!r} used next to indexed {role} variables")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @classmethod
    def build(cls, r: int = 0, k: int = 0, params: Iterable[str] = ()) -> "VarSpec":
        names = list(group_names("x", r)) + list(group_names("y", k))
        return cls(tuple(names) + tuple(sorted(params, key=_var_sort_key)))

    @classmethod
    def of(cls, names: Iterable[str]) -> "VarSpec":
        """Spec holding ``names`` in canonical role order."""
        return cls(tuple(sorted(set(names), key=_var_sort_key)))

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return self.resolve(name) is not None

    @property
    def nvars(self) -> int:
        return len(self.names)

    def role(self, name: str) -> str:
        return role_of(name)

    def group(self, role: str) -> tuple[str, ...]:
        return tuple(n for n in self.names if n[0] == role)

    @property
    def xs(self) -> tuple[str, ...]:
        return self.group("x")

    @property
    def ys(self) -> tuple[str, ...]:
        return self.group("y")

    @property
    def r(self) -> int:
        return len(self.xs)

    @property
    def k(self) -> int:
        return len(self.ys)

    @property
    def state(self) -> tuple[str, ...]:
        return self.xs + self.ys

    @property
    def params(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if n[0] not in STATE_ROLES)

    def resolve(self, name: str) -> str | None:
        """Canonical name in this spec for ``name``, honouring single-member aliases."""
        if name in self._index:
            return name
        if len(name) == 1 and name in "xyqu":
            group = self.group(name)
            return group[0] if len(group) == 1 else None
        if name[0] in "xyq" and name[1:] == "1" and name[0] in self._index:
            return name[0]
        if name[0] == "u" and name[1:] == "11" and "u" in self._index:
            return "u"
        return None

    def index(self, name: str) -> int:
        canon = self.resolve(name)
        if canon is None:
            raise KeyError(f"variable {name!r} not in {self.names}")
        return self._index[canon]

    def drop(self, names: Iterable[str]) -> "VarSpec":
        gone = {self.resolve(n) for n in names}
        return VarSpec(tuple(n for n in self.names if n not in gone))

    def union(self, other: "VarSpec") -> "VarSpec":
        return VarSpec.of(set(self.names) | set(other.names))

    def __str__(self):
        return "(" + ", ".join(self.names) + ")"


def group_names(role: str, count: int) -> tuple[str, ...]:
    if count == 1:
        return (role,)
    return tuple(f"{role}{i}" for i in range(1, count + 1))


Scalar = Union[int, Fraction, Rational]


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, Rational):
        return Fraction(c.numerator, c.denominator)
    raise TypeError(f"exact coefficients only, got {type(c).__name__}")


def local_key(exps: Exps):
    """Local degree order: total degree first, then x-heavy (earlier variables) first."""
    return (sum(exps), tuple(-e for e in exps))


class Poly:
    """Polynomial with exact rational coefficients over a :class:`VarSpec`."""

    __slots__ = ("spec", "_terms")

    def __init__(self, spec: VarSpec, terms: Mapping[Exps, Scalar] | None = None):
        self.spec = spec
        clean = {}
        n = spec.nvars
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != n:
                raise ValueError(f"exponent {exps} does not fit {spec}")
            c = _as_fraction(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
        key = _print_key(spec)
        self._terms = {e: clean[e] for e in sorted(clean, key=key) if clean[e]}

    # construction helpers
    @classmethod
    def zero(cls, spec: VarSpec) -> "Poly":
        return cls(spec)

    @classmethod
    def const(cls, spec: VarSpec, c: Scalar) -> "Poly":
        return cls(spec, {(0,) * spec.nvars: c})

    @classmethod
    def var(cls, spec: VarSpec, name: str) -> "Poly":
        e = [0] * spec.nvars
        e[spec.index(name)] = 1
        return cls(spec, {tuple(e): 1})

    @classmethod
    def monomial(cls, spec: VarSpec, exps: Exps, c: Scalar = 1) -> "Poly":
        return cls(spec, {tuple(exps): c})

    @property
    def terms(self) -> Mapping[Exps, Fraction]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def order(self) -> int:
        """Lowest total degree present (``-1`` for the zero polynomial)."""
        return min((sum(e) for e in self._terms), default=-1)

    @property
    def constant(self) -> Fraction:
        return self._terms.get((0,) * self.spec.nvars, Fraction(0))

    def coefficient(self, monomial: Mapping[str, int] | Exps) -> Fraction:
        if isinstance(monomial, Mapping):
            e = [0] * self.spec.nvars
            for name, p in monomial.items():
                e[self.spec.index(name)] = p
            monomial = tuple(e)
        return self._terms.get(tuple(monomial), Fraction(0))

    def variables(self) -> tuple[str, ...]:
        used = set()
        for e in self._terms:
            used.update(i for i, p in enumerate(e) if p)
        return tuple(self.spec.names[i] for i in sorted(used))

    def depends_on(self, name: str) -> bool:
        i = self.spec.index(name)
        return any(e[i] for e in self._terms)

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.spec != self.spec:
                raise ValueError(f"spec mismatch: {self.spec} vs {other.spec}")
            return other
        return Poly.const(self.spec, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.spec, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.spec, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            return Poly(self.spec, {e: c * v for e, v in self._terms.items()})
        return mul_truncate(self, self._coerce(other), None)

    __rmul__ = __mul__

    def __pow__(self, p: int):
        if not isinstance(p, int) or p < 0:
            raise ValueError("only non-negative integer powers")
        out = Poly.const(self.spec, 1)
        base = self
        while p:
            if p & 1:
                out = out * base
            base = base * base
            p >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.spec == other.spec and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(self.spec, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.spec, frozenset(self._terms.items())))

    # structural operations
    def truncate(self, l: int) -> "Poly":
        return Poly(self.spec, {e: c for e, c in self._terms.items() if sum(e) <= l})

    def homogeneous_part(self, d: int) -> "Poly":
        return Poly(self.spec, {e: c for e, c in self._terms.items() if sum(e) == d})

    def diff(self, name: str) -> "Poly":
        return diff(self, name)

    def embed(self, spec: VarSpec) -> "Poly":
        """Same polynomial viewed in a larger spec (variables matched by name)."""
        pos = [spec.index(n) for n in self.spec.names]
        out = {}
        for e, c in self._terms.items():
            ne = [0] * spec.nvars
            for i, p in zip(pos, e):
                ne[i] = p
            out[tuple(ne)] = c
        return Poly(spec, out)

    def restrict(self, spec: VarSpec) -> "Poly":
        """View in a smaller spec; every dropped variable must be absent."""
        keep = [self.spec.index(n) for n in spec.names]
        dropped = set(range(self.spec.nvars)) - set(keep)
        out = {}
        for e, c in self._terms.items():
            if any(e[i] for i in dropped):
                missing = [self.spec.names[i] for i in dropped if e[i]]
                raise ValueError(f"cannot drop variables still in use: {missing}")
            out[tuple(e[i] for i in keep)] = c
        return Poly(spec, out)

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        """Rename variables; the result lives in the re-sorted spec."""
        new_names = [mapping.get(n, n) for n in self.spec.names]
        spec = VarSpec.of(new_names)
        pos = [spec.index(n) for n in new_names]
        out = {}
        for e, c in self._terms.items():
            ne = [0] * spec.nvars
            for i, p in zip(pos, e):
                ne[i] = p
            out[tuple(ne)] = c
        return Poly(spec, out)

    def subs(self, values: Mapping[str, "Poly | Scalar"], truncate: int | None = None) -> "Poly":
        """Substitute polynomials (in the same spec) or constants for variables."""
        idx = {}
        for name, v in values.items():
            i = self.spec.index(name)
            idx[i] = v if isinstance(v, Poly) else Poly.const(self.spec, v)
        powers: dict[tuple[int, int], Poly] = {}

        def power(i, p):
            key = (i, p)
            if key not in powers:
                powers[key] = idx[i] if p == 1 else mul_truncate(power(i, p - 1), idx[i], truncate)
            return powers[key]

        total = {}
        for e, c in self._terms.items():
            kept = tuple(0 if i in idx else p for i, p in enumerate(e))
            term = Poly(self.spec, {kept: c})
            for i, p in enumerate(e):
                if p and i in idx:
                    term = mul_truncate(term, power(i, p), truncate)
                    if not term:
                        break
            for te, tc in term._terms.items():
                total[te] = total.get(te, 0) + tc
        out = Poly(self.spec, total)
        return out.truncate(truncate) if truncate is not None else out

    def evaluate(self, values: Mapping[str, Scalar]) -> Fraction:
        """Exact value at a rational point (all variables present must be given)."""
        point = [None] * self.spec.nvars
        for name, v in values.items():
            point[self.spec.index(name)] = _as_fraction(v)
        total = Fraction(0)
        for e, c in self._terms.items():
            term = c
            for i, p in enumerate(e):
                if p:
                    if point[i] is None:
                        raise ValueError(f"no value for {self.spec.names[i]}")
                    term *= point[i] ** p
            total += term
        return total

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, {self.spec})"


def _print_key(spec: VarSpec):
    state = [i for i, n in enumerate(spec.names) if n[0] in STATE_ROLES]
    param = [i for i, n in enumerate(spec.names) if n[0] not in STATE_ROLES]

    def key(e):
        se = tuple(e[i] for i in state)
        pe = tuple(e[i] for i in param)
        has_param = any(pe)
        sdeg = sum(se)
        return (has_param, tuple(-p for p in pe), -sdeg if has_param else sdeg, tuple(-p for p in se))

    return key


def diff(p: Poly, name: str) -> Poly:
    i = p.spec.index(name)
    out = {}
    for e, c in p.items():
        if e[i]:
            ne = list(e)
            ne[i] -= 1
            out[tuple(ne)] = c * e[i]
    return Poly(p.spec, out)


def mul_truncate(a: Poly, b: Poly, l: int | None) -> Poly:
    """Product of ``a`` and ``b`` with every term of degree above ``l`` dropped."""
    if a.spec != b.spec:
        raise ValueError(f"spec mismatch: {a.spec} vs {b.spec}")
    out: dict = {}
    bt = [(e, sum(e), c) for e, c in b.items()]
    for ea, ca in a.items():
        da = sum(ea)
        if l is not None and da > l:
            continue
        for eb, db, cb in bt:
            if l is not None and da + db > l:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return Poly(a.spec, out)


def _format_monomial(spec: VarSpec, e: Exps) -> str:
    parts = []
    order = sorted(range(len(e)), key=lambda i: spec.names[i][0] in STATE_ROLES)
    for i in order:
        name, p = spec.names[i], e[i]
        if p == 1:
            parts.append(name)
        elif p:
            parts.append(f"{name}^{p}")
    return "*".join(parts)


def format_poly(p: Poly) -> str:
    if not p:
        return "0"
    out = []
    for e, c in p.items():
        mono = _format_monomial(p.spec, e)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)
