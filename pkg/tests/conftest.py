import random
from fractions import Fraction

from reticular.jetalg import Poly, VarSpec

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())


def small_fraction(rng: random.Random, lo: int = -3, hi: int = 3, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(lo, hi), rng.choice((1, 2, 3)))
        if v or not nonzero:
            return v


def random_poly(rng: random.Random, spec: VarSpec, dmin: int, dmax: int, terms: int = 4) -> Poly:
    out = Poly.zero(spec)
    names = spec.names
    for _ in range(terms):
        d = rng.randint(dmin, dmax)
        e = [0] * len(names)
        for _ in range(d):
            e[rng.randrange(len(names))] += 1
        out = out + Poly.monomial(spec, tuple(e), small_fraction(rng))
    return out


def random_reticular_change(rng: random.Random, f: Poly, l: int) -> Poly:
    """a * f(phi) truncated at degree l, with phi preserving the corner.

    x_j -> x_j * (c_j + h_j) with c_j > 0, y -> invertible linear part plus
    higher terms, a(0) != 0.
    """
    spec = f.spec
    sub = {}
    for x in spec.xs:
        c = Fraction(rng.randint(1, 4), rng.choice((1, 2, 3)))
        sub[x] = Poly.var(spec, x) * (c + random_poly(rng, spec, 1, 2, 2))
    ys = spec.ys
    if ys:
        while True:
            M = [[small_fraction(rng) for _ in ys] for _ in ys]
            if _det(M):
                break
        for a, y in enumerate(ys):
            lin = sum((M[a][b] * Poly.var(spec, ys[b]) for b in range(len(ys))), Poly.zero(spec))
            xs_lin = sum((small_fraction(rng) * Poly.var(spec, x) for x in spec.xs), Poly.zero(spec))
            sub[y] = lin + xs_lin + random_poly(rng, spec, 2, 3, 2)
    unit = small_fraction(rng, 1, 3, nonzero=True) * rng.choice((1, -1)) + random_poly(rng, spec, 1, 2, 2)
    g = f.subs(sub, truncate=l)
    return (unit * g).truncate(l)


def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * _det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(n))
