"""Stable unfoldings: construction, the normal-form catalogs and their verification."""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field

from .classify import CatalogLabel, Reject, classify_family, classify_multigerm
from .jetalg import Poly, VarSpec, group_names
from .tangent import (Family, MultiGerm, check_inf_stable, check_inf_versal, codim_report, jet_cap,
                      nondegeneracy_issues)

SYMBOL_MU = {"A1": 1, "A2": 2, "A3": 3, "A4": 4, "B2": 2, "B3": 3, "B4": 4,
             "C3+": 3, "C3-": 3, "C4": 4, "F4": 4}


class VerificationError(RuntimeError):
    def __init__(self, message: str, witness: str | None = None):
        self.witness = witness
        super().__init__(message if witness is None else f"{message} (quotient witness: {witness})")


# ----------------------------------------------------------- construction

def _params_spec(comp: Poly, n: int) -> VarSpec:
    return VarSpec(comp.spec.state + ("t",) + group_names("q", n) + ("z",))


def _assemble(f0: MultiGerm, n: int, terms: list[list[tuple[Poly, Poly]]]) -> Family:
    comps = []
    for c, extra in zip(f0.comps, terms):
        spec = _params_spec(c, n)
        F = c.embed(spec) - Poly.var(spec, "z")
        for coef, phi in extra:
            F = F + coef.embed(spec) * phi.embed(spec)
        comps.append(F)
    return Family(tuple(comps), group_names("q", n))


def _qvar(comp: Poly, n: int, j: int) -> Poly:
    spec = _params_spec(comp, n)
    return Poly.var(spec, group_names("q", n)[j])


def build_versal(f0: MultiGerm, n: int) -> Family:
    """Codimension-0 unfolding: every standard monomial gets a parameter,
    except the constant of the last component (z absorbs it)."""
    label = classify_multigerm(f0, n)
    rep = codim_report(f0, cap=jet_cap(n))
    if sum(rep.mu) > n + 1:
        raise ValueError(f"{label} has total codimension {sum(rep.mu)} = n + 2; use build_codim1")
    terms = []
    j = 0
    for i, c in enumerate(f0.comps):
        phis = rep.phi[i][:-1] if i == f0.m - 1 else rep.phi[i]
        extra = []
        for phi in phis:
            extra.append((_qvar(c, n, j), phi))
            j += 1
        terms.append(extra)
    F = _assemble(f0, n, terms)
    report = check_inf_stable(F)
    if not report.ok:
        raise VerificationError(f"constructed family {F} is not stable", report.witness)
    return F


def build_codim1(f0: MultiGerm, n: int, signs: str | None = None) -> Family:
    """Codimension-1 unfolding with t attached to the top monomial of the first component.

    The first component carries (t + a) phi_11 + its remaining monomials,
    middle components carry all of theirs, the last drops its constant.
    ``a`` is a signed sum of the first parameter of every later component
    plus n + 2 - sum(mu) signed Morse squares.  Parameters are numbered:
    the ones entering ``a`` linearly first, then the rest, then the Morse ones.
    """
    if f0.m < 2:
        raise ValueError("codimension-1 families need at least two components")
    classify_multigerm(f0, n)
    rep = codim_report(f0, cap=jet_cap(n))
    total = sum(rep.mu)
    morse = n + 2 - total
    if morse < 0:
        raise Reject("budget-exceeded", f"sum of codimensions {total} > n + 2 = {n + 2}")
    slots: list[list[Poly]] = []
    for i in range(f0.m):
        slots.append(list(rep.phi[i][:-1] if i == f0.m - 1 else rep.phi[i]))
    linear = [(i, 0) for i in range(1, f0.m) if slots[i]]
    rest = [(0, j) for j in range(1, len(slots[0]))]
    rest += [(i, j) for i in range(1, f0.m) for j in range(1, len(slots[i]))]
    order = linear + rest
    if len(order) + morse != n:
        raise ValueError(f"parameter count {len(order) + morse} does not match n = {n}")
    nsigns = len(linear) + morse
    signs = "+" * nsigns if signs is None else signs
    if len(signs) != nsigns or set(signs) - {"+", "-"}:
        raise ValueError(f"expected {nsigns} signs from '+-', got {signs!r}")
    qindex = {slot: j for j, slot in enumerate(order)}
    first = f0.comps[0]
    spec1 = _params_spec(first, n)
    a = Poly.var(spec1, "t")
    for (i, _), s in zip(linear, signs):
        q = Poly.var(spec1, group_names("q", n)[qindex[(i, 0)]])
        a = a + q if s == "+" else a - q
    for j, s in enumerate(signs[len(linear):]):
        q = Poly.var(spec1, group_names("q", n)[len(order) + j])
        a = a + q * q if s == "+" else a - q * q
    terms = []
    for i, c in enumerate(f0.comps):
        extra = []
        for j, phi in enumerate(slots[i]):
            if i == 0 and j == 0:
                extra.append((a, phi))
            else:
                extra.append((_qvar(c, n, qindex[(i, j)]), phi))
        terms.append(extra)
    F = _assemble(f0, n, terms)
    report = check_inf_stable(F)
    if not report.ok:
        raise VerificationError(f"constructed family {F} with signs {signs!r} is not stable", report.witness)
    return F


def codim1_sign_vectors(f0: MultiGerm, n: int) -> list[tuple[str, bool]]:
    """Every sign vector of the codimension-1 form with its stability verdict."""
    rep = codim_report(f0, cap=jet_cap(n))
    linear = sum(1 for i in range(1, f0.m) if (rep.phi[i][:-1] if i == f0.m - 1 else rep.phi[i]))
    count = linear + n + 2 - sum(rep.mu)
    out = []
    for combo in itertools.product("+-", repeat=count):
        signs = "".join(combo)
        try:
            build_codim1(f0, n, signs)
            out.append((signs, True))
        except VerificationError:
            out.append((signs, False))
    return out


# ---------------------------------------------------------------- catalog

_TEMPLATES = {
    1: [
        ("0(A1,A1)", "y^2 + q - z; y^2 - z"),
        ("1(A1,A1)", "y^2 + t {0} q^2 - z; y^2 - z"),
        ("1(A1,A2)", "y^2 + t {0} q - z; y^3 + q*y - z"),
        ("1(A1,B2)", "y^2 + t {0} q - z; x^2 + q*x - z"),
        ("1(A1,A1,A1)", "y^2 + t - z; y^2 + q - z; y^2 - q - z"),
    ],
    2: [
        ("1(A1,A1)", "y^2 + t {0} q1^2 {1} q2^2 - z; y^2 - z"),
        ("0(A1,A2)", "y^2 + t {0} q1 - z; y^3 + q1*y - q2 - z"),
        ("1(A1,A2)", "y^2 + t {0} q1 {1} q2^2 - z; y^3 + q1*y - z"),
        ("0(A1,B2)", "y^2 + q1 - z; x^2 + q2*x - z"),
        ("1(A1,A3)", "y^2 + t {0} q1 - z; y^4 + q1*y^2 + q2*y - z"),
        ("1(A2,A2)", "y^3 + (t {0} q1)*y + q2 - z; y^3 + q1*y - z"),
        ("1(A1,B2)", "y^2 + t {0} q1 {1} q2^2 - z; x^2 + q1*x - z"),
        ("1(A1,B3)", "y^2 + t {0} q1 - z; x^3 + q1*x^2 + q2*x - z"),
        ("1(A1,C3{0})", "y^2 + t + q1 - z; {0}x*y + y^3 + q1*y^2 + q2*y - z"),
        ("1(B2,B2)", "x^2 + (t {0} q1)*x + q2 - z; x^2 + q1*x - z"),
        ("0(A1,A1,A1)", "y^2 + q1 - z; y^2 + q2 - z; y^2 - z"),
        ("1(A1,A1,A1)", "y^2 + t {0} q1 {1} q2^2 - z; y^2 + q1 - z; y^2 - z"),
        ("1(A1,A1,A2)", "y^2 + t {0} q1 - z; y^2 - z; y^3 + q1*y + q2 - z"),
        ("1(A1,A1,B2)", "y^2 + t {0} q1 - z; y^2 - z; x^2 + q1*x + q2 - z"),
        ("1(A1,A1,A1,A1)", "y^2 + t {0} q1 {1} q2 - z; y^2 + q1 - z; y^2 + q2 - z; y^2 - z"),
    ],
}


@dataclass(frozen=True)
class Variant:
    signs: str
    label: CatalogLabel
    family: Family

    @property
    def mu(self) -> tuple[int, ...]:
        return tuple(SYMBOL_MU[s] for s in self.label.symbols)


@dataclass(frozen=True)
class CatalogEntry:
    """One catalog line: a template with ``{i}`` sign slots and its sign variants."""

    n: int
    template: str
    label_template: str
    variants: tuple[Variant, ...] = field(default=())

    @property
    def m(self) -> int:
        return self.variants[0].family.m

    @property
    def label(self) -> str:
        return self.label_template.replace("{0}", "±")

    @property
    def base(self) -> MultiGerm:
        return self.variants[0].family.base()

    @property
    def mu(self) -> tuple[int, ...]:
        return self.variants[0].mu


def _fill(text: str, signs: str) -> str:
    return text.format(*signs)


def catalog(n: int) -> list[CatalogEntry]:
    """The generic families for n = 1 or 2, with every sign variant expanded."""
    if n not in _TEMPLATES:
        raise ValueError("catalogs exist for n = 1 and n = 2")
    out = []
    for label_t, fam_t in _TEMPLATES[n]:
        slots = len(set(re.findall(r"\{(\d)\}", fam_t)))
        variants = []
        for combo in itertools.product("+-", repeat=slots):
            signs = "".join(combo)
            F = Family.parse(_fill(fam_t, signs), n)
            variants.append(Variant(signs, CatalogLabel.parse(_fill(label_t, signs)), F))
        out.append(CatalogEntry(n, fam_t, label_t, tuple(variants)))
    return out


def catalog_variants(n: int) -> list[Variant]:
    return [v for e in catalog(n) for v in e.variants]


def find_variant(n: int, label: str | CatalogLabel, signs: str | None = None) -> Variant:
    want = label if isinstance(label, CatalogLabel) else CatalogLabel.parse(label)
    hits = [v for v in catalog_variants(n) if v.label == want]
    if signs is not None:
        hits = [v for v in hits if v.signs == signs]
    if not hits:
        known = sorted({v.label.ascii for v in catalog_variants(n)})
        raise KeyError(f"no catalog family {want.ascii} (signs {signs}) for n = {n}; known: {', '.join(known)}")
    return hits[0]


# ------------------------------------------------------------ verification

@dataclass(frozen=True)
class MinimalityProbe:
    parameter: str
    still_versal: bool


def minimality_probe(F: Family, prefix: int) -> list[MinimalityProbe]:
    """Set each q_j to zero in turn; a minimal family loses versality every time.

    Codimension-0 families are probed without the t-direction.
    """
    out = []
    for q in F.q:
        G = F.drop_parameter(q)
        out.append(MinimalityProbe(q, check_inf_versal(G, with_t=prefix == 1).ok))
    return out


@dataclass(frozen=True)
class VerifyRow:
    label: CatalogLabel
    signs: str
    family: str
    nondegenerate: bool
    stable: bool
    label_ok: bool
    mu_ok: bool
    minimal: bool
    witness: str | None = None
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.nondegenerate and self.stable and self.label_ok and self.mu_ok and self.minimal

    def as_dict(self) -> dict:
        return {
            "label": self.label.ascii, "label_unicode": str(self.label), "signs": self.signs,
            "family": self.family, "nondegenerate": self.nondegenerate, "stable": self.stable,
            "label_ok": self.label_ok, "mu_ok": self.mu_ok, "minimal": self.minimal,
            "ok": self.ok, "witness": self.witness, "notes": list(self.notes),
        }


def verify_variant(v: Variant, check_minimal: bool = True) -> VerifyRow:
    F = v.family
    notes = list(nondegeneracy_issues(F))
    stable = check_inf_stable(F)
    witness = stable.witness
    if not stable.ok:
        notes.append(f"tangent space misses {stable.witness}")
    try:
        got = classify_family(F)
        label_ok = got == v.label
        if not label_ok:
            notes.append(f"classified as {got.ascii}")
    except Reject as exc:
        label_ok = False
        notes.append(f"classifier rejected: {exc}")
    rep = codim_report(F.base(), cap=jet_cap(F.n))
    mu_ok = rep.mu == v.mu
    if not mu_ok:
        notes.append(f"mu {rep.mu} != {v.mu}")
    minimal = True
    if check_minimal:
        for probe in minimality_probe(F, v.label.prefix):
            if probe.still_versal:
                minimal = False
                notes.append(f"still versal without {probe.parameter}")
    return VerifyRow(v.label, v.signs, str(F), not nondegeneracy_issues(F), stable.ok, label_ok, mu_ok,
                     minimal, witness, tuple(notes))


@dataclass(frozen=True)
class VerifyReport:
    n: int
    rows: tuple[VerifyRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def lines(self) -> int:
        return len({r.label.ascii.replace("C3+", "C3±").replace("C3-", "C3±") for r in self.rows})

    def summary(self) -> str:
        passed = sum(r.ok for r in self.rows)
        return f"n={self.n}: {passed}/{len(self.rows)} variants pass over {self.lines} catalog lines"


def verify_catalog(n: int, check_minimal: bool = True) -> VerifyReport:
    return VerifyReport(n, tuple(verify_variant(v, check_minimal) for v in catalog_variants(n)))


# ----------------------------------------------------------------- export

TEXT_HEADER = "# label\tm\tn\tsigns\tmu\tfamily"


def export_text(entries: list[CatalogEntry]) -> str:
    """One tab-separated record per sign variant.

    Fields: ascii label, m, n, sign string ('.' when the line has no
    sign slot), comma-separated mu vector, components joined by '; '.
    """
    lines = [TEXT_HEADER]
    for e in entries:
        for v in e.variants:
            mu = ",".join(str(m) for m in v.mu)
            lines.append(f"{v.label.ascii}\t{v.family.m}\t{e.n}\t{v.signs or '.'}\t{mu}\t{v.family}")
    return "\n".join(lines) + "\n"


def export_json(entries: list[CatalogEntry]) -> str:
    data = []
    for e in entries:
        for v in e.variants:
            data.append({
                "label": v.label.ascii, "label_unicode": str(v.label), "n": e.n, "m": v.family.m,
                "signs": v.signs, "mu": list(v.mu), "template": e.template,
                "family": [str(c) for c in v.family.comps],
            })
    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def import_text(text: str, n: int) -> list[tuple[CatalogLabel, str, Family]]:
    out = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        label, _m, _n, signs, _mu, fam = line.split("\t")
        out.append((CatalogLabel.parse(label), "" if signs == "." else signs, Family.parse(fam, n)))
    return out
