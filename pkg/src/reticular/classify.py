"""Stable reduction and classification of simple reticular multi-germs."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .jetalg import Poly, VarSpec, group_names
from .tangent import Family, MultiGerm, check_inf_stable, check_inf_versal, germ_codim, jet_cap

REASONS = ("budget-exceeded", "leave-one-out", "component-out-of-catalog", "non-isolated", "unstable")


class OutOfCatalog(ValueError):
    """A component germ outside the simple list A1-A4, B2-B4, C3, C4, F4."""


class Reject(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        if reason not in REASONS:
            raise ValueError(f"unknown reject reason {reason!r}")
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


# ------------------------------------------------------------ reduction

@dataclass(frozen=True)
class ReductionRecord:
    """Outcome of splitting off linear x-terms and non-degenerate y-squares.

    ``residual`` lives in canonically renamed variables; ``signature`` is the
    number of positive and negative squares removed.
    """

    original: Poly
    residual: Poly
    removed_x: tuple[str, ...]
    signature: tuple[int, int]
    order: int

    @property
    def r(self) -> int:
        return self.residual.spec.r

    @property
    def k(self) -> int:
        return self.residual.spec.k


def _y_hessian(f: Poly) -> list[list[Fraction]]:
    ys = f.spec.ys
    idx = [f.spec.index(y) for y in ys]
    H = [[Fraction(0)] * len(ys) for _ in ys]
    for a, ia in enumerate(idx):
        for b, ib in enumerate(idx):
            e = [0] * f.spec.nvars
            e[ia] += 1
            e[ib] += 1
            c = f.coefficient(tuple(e))
            H[a][b] = 2 * c if a == b else c
    return H


def congruence_diagonalize(H):
    """Rational P and diagonal D with P^T H P = D (symmetric elimination)."""
    k = len(H)
    A = [list(map(Fraction, row)) for row in H]
    P = [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]

    def col_add(dst, src, c):
        # column dst += c * column src, mirrored on rows to keep symmetry
        for row in A:
            row[dst] += c * row[src]
        for j in range(k):
            A[dst][j] += c * A[src][j]
        for row in P:
            row[dst] += c * row[src]

    def swap(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        A[i], A[j] = A[j], A[i]
        for row in P:
            row[i], row[j] = row[j], row[i]

    for i in range(k):
        if A[i][i] == 0:
            j = next((j for j in range(i + 1, k) if A[j][j] != 0), None)
            if j is not None:
                swap(i, j)
            else:
                j = next((j for j in range(i + 1, k) if A[i][j] != 0), None)
                if j is None:
                    continue
                col_add(i, j, Fraction(1))
        for j in range(i + 1, k):
            if A[i][j]:
                col_add(j, i, -A[i][j] / A[i][i])
    return P, [A[i][i] for i in range(k)]


def _canonical(f: Poly) -> Poly:
    # state variables keep their relative order, so exponents carry over positionally
    names = group_names("x", f.spec.r) + group_names("y", f.spec.k) + f.spec.params
    return Poly(VarSpec(names), dict(f.items()))


def reduce_stably(f: Poly, l: int | None = None) -> ReductionRecord:
    """Remove linear x-terms and the non-degenerate part of the y-Hessian.

    A variable x_j with a nonzero linear coefficient is split off, leaving
    f restricted to x_j = 0.  The y-Hessian is diagonalised over Q and the
    non-degenerate directions are eliminated by solving df/dy_a = 0 as a
    formal power series up to order ``l``.
    """
    l = jet_cap() if l is None else l
    g = f.truncate(l)
    removed = []
    for x in f.spec.xs:
        e = [0] * g.spec.nvars
        e[g.spec.index(x)] = 1
        if g.coefficient(tuple(e)):
            spec = g.spec.drop([x])
            g = g.subs({x: 0}).restrict(spec)
            removed.append(x)

    pos = neg = 0
    ys = g.spec.ys
    if ys:
        P, D = congruence_diagonalize(_y_hessian(g))
        lin = {}
        for a, y in enumerate(ys):
            lin[y] = sum((P[a][b] * Poly.var(g.spec, ys[b]) for b in range(len(ys))), Poly.zero(g.spec))
        g = g.subs(lin, truncate=l)
        active = [(ys[a], D[a]) for a in range(len(ys)) if D[a] != 0]
        pos = sum(1 for _, d in active if d > 0)
        neg = len(active) - pos
        if active:
            Y = {y: Poly.zero(g.spec) for y, _ in active}
            grads = {y: g.diff(y) for y, _ in active}
            for _ in range(l + 1):
                new = {}
                for y, d in active:
                    val = grads[y].subs(Y, truncate=l)
                    new[y] = (Y[y] - val * (1 / d)).truncate(l)
                if new == Y:
                    break
                Y = new
            g = g.subs(Y, truncate=l)
            g = g.restrict(g.spec.drop([y for y, _ in active]))
    return ReductionRecord(f, _canonical(g), tuple(removed), (pos, neg), l)


# ------------------------------------------------------- classification

@dataclass(frozen=True)
class ComponentClass:
    symbol: str
    mu: int
    mu_boundary: int | None
    reduction: ReductionRecord

    def __str__(self):
        return self.symbol


def _mu(f: Poly, cap: int):
    return germ_codim(f, cap=cap).mu


def classify_component(f: Poly, cap: int | None = None) -> ComponentClass:
    """Symbol of a single component germ, read from (r, k, mu, mu on x = 0) of its residual."""
    cap = jet_cap() if cap is None else cap
    if f.spec.params:
        raise ValueError("classify the organising germ, not an unfolding")
    red = reduce_stably(f, cap)
    h = red.residual
    mu = _mu(h, cap)
    if mu == math.inf:
        raise OutOfCatalog(f"non-isolated germ {f}")
    if mu == 0:
        raise OutOfCatalog(f"regular germ {f} (linear y-term)")
    r, k = h.spec.r, h.spec.k
    mu_b = None
    if r == 1:
        mu_b = _mu(h.subs({h.spec.xs[0]: 0}).restrict(VarSpec(h.spec.ys)), cap)
    sym = None
    if r == 0 and k <= 1 and 1 <= mu <= 4:
        sym = f"A{mu}"
    elif r == 1 and k == 0 and 2 <= mu <= 4:
        sym = f"B{mu}"
    elif r == 1 and k == 1:
        x, y = h.spec.xs[0], h.spec.ys[0]
        if (mu, mu_b) == (3, 2):
            b = h.coefficient({x: 1, y: 1})
            c = h.coefficient({y: 3})
            if b and c:
                sym = "C3+" if b * c > 0 else "C3-"
        elif (mu, mu_b) == (4, 3):
            sym = "C4"
        elif (mu, mu_b) == (4, 2) and h.coefficient({x: 2}):
            sym = "F4"
    if sym is None:
        raise OutOfCatalog(f"{f}: residual {h} with r={r}, k={k}, mu={mu}, mu|x=0={mu_b} is not in the list")
    return ComponentClass(sym, mu, mu_b, red)


_SUP = str.maketrans("0123456789+-", "⁰¹²³⁴⁵⁶⁷⁸⁹⁺⁻")
_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")
_UNSUP = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹⁺⁻₀₁₂₃₄₅₆₇₈₉", "0123456789+-0123456789")
_SYMBOL = re.compile(r"([ABCF])(\d)([+-]?)")


def _pretty_symbol(sym: str) -> str:
    m = _SYMBOL.fullmatch(sym)
    return "⁰" + m.group(1) + m.group(2).translate(_SUB) + m.group(3).translate(_SUP)


@dataclass(frozen=True)
class CatalogLabel:
    prefix: int
    symbols: tuple[str, ...]

    def __str__(self):
        return str(self.prefix).translate(_SUP) + "(" + "".join(_pretty_symbol(s) for s in self.symbols) + ")"

    @property
    def ascii(self) -> str:
        return f"{self.prefix}({','.join(self.symbols)})"

    @property
    def slug(self) -> str:
        return "_".join([str(self.prefix)] + [s.replace("+", "p").replace("-", "m") for s in self.symbols])

    @classmethod
    def parse(cls, text: str) -> "CatalogLabel":
        """Accepts ``1(A1,A2)``, ``1(A1A2)``, ``1_A1_A2`` or the unicode form."""
        s = text.strip().translate(_UNSUP).replace(" ", "")
        m = re.fullmatch(r"([01])[(_](.*?)\)?", s)
        if not m:
            raise ValueError(f"cannot read label {text!r}")
        body = m.group(2).replace(",", "").replace("_", "")
        body = re.sub(r"0(?=[ABCF])", "", body)
        body = re.sub(r"(C\d)p", r"\1+", body)
        body = re.sub(r"(C\d)m", r"\1-", body)
        syms = [a + b + c for a, b, c in _SYMBOL.findall(body)]
        if "".join(syms) != body or not syms:
            raise ValueError(f"cannot read label {text!r}")
        return cls(int(m.group(1)), tuple(syms))


def _check_budget(mus, n):
    total = sum(mus)
    if total > n + 2:
        raise Reject("budget-exceeded", f"sum of codimensions {total} > n + 2 = {n + 2}")
    for i in range(len(mus)):
        rest = total - mus[i]
        if rest > n + 1:
            raise Reject("leave-one-out", f"dropping component {i + 1} leaves {rest} > n + 1 = {n + 1}")


def classify_multigerm(f0: MultiGerm, n: int, cap: int | None = None) -> CatalogLabel:
    """Label of an organising multi-germ, or :class:`Reject`.

    The prefix is 1 when the codimensions add up to exactly n + 2.
    """
    cap = jet_cap(n) if cap is None else cap
    mus = [_mu(c, cap) for c in f0.comps]
    bad = [i + 1 for i, m in enumerate(mus) if m == math.inf]
    if bad:
        raise Reject("non-isolated", f"component(s) {bad} have infinite codimension")
    _check_budget(mus, n)
    syms = []
    for i, c in enumerate(f0.comps):
        try:
            syms.append(classify_component(c, cap).symbol)
        except OutOfCatalog as exc:
            raise Reject("component-out-of-catalog", f"component {i + 1}: {exc}") from None
    return CatalogLabel(max(0, sum(mus) - 1 - n), tuple(syms))


def classify_family(F: Family, cap: int | None = None) -> CatalogLabel:
    """Label of an unfolding: prefix 0 when F at t = 0 is already versal, 1 when t is needed."""
    n = F.n
    base = F.base()
    label = classify_multigerm(base, n, cap)
    if check_inf_versal(F, with_t=False).ok:
        return CatalogLabel(0, label.symbols)
    report = check_inf_stable(F)
    if not report.ok:
        raise Reject("unstable", f"tangent space misses {report.witness}")
    return CatalogLabel(1, label.symbols)
