from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from reticular.jetalg import (
    GermSyntaxError, Poly, UnknownVariableError, VarSpec, format_poly, group_names, infer_spec,
    local_key, mul_truncate, names_in, parse_poly,
)

SPEC = VarSpec.of(["x", "y", "t", "q", "z"])


def P(text, spec=SPEC):
    return parse_poly(text, spec)


# ---------------------------------------------------------------- VarSpec

def test_spec_orders_roles():
    spec = VarSpec.of(["z", "q2", "y", "t", "q1", "x"])
    assert spec.names == ("x", "y", "t", "q1", "q2", "z")
    assert spec.state == ("x", "y")
    assert spec.params == ("t", "q1", "q2", "z")
    assert spec.r == 1 and spec.k == 1


def test_build_and_group_names():
    spec = VarSpec.build(2, 1, ["q1", "q2"])
    assert spec.names == ("x1", "x2", "y", "q1", "q2")
    assert group_names("y", 1) == ("y",)
    assert group_names("q", 3) == ("q1", "q2", "q3")


def test_aliases():
    spec = VarSpec.of(["x", "y", "u"])
    assert spec.resolve("x1") == "x"
    assert spec.resolve("u11") == "u"
    assert spec.resolve("y2") is None
    two = VarSpec.of(["y1", "y2"])
    assert two.resolve("y") is None


def test_drop_and_union():
    spec = VarSpec.of(["x", "y", "t"])
    assert spec.drop(["t"]).names == ("x", "y")
    assert spec.union(VarSpec.of(["q", "z"])).names == ("x", "y", "t", "q", "z")


# ---------------------------------------------------------------- parsing

@pytest.mark.parametrize("text,expected", [
    ("y^2 + t + q - z", "y^2 + t + q - z"),
    ("x*y + y^3", "x*y + y^3"),
    ("(t + q)*x + x^2", "x^2 + t*x + q*x"),
    ("3/2*y^2 - 1/2", "-1/2 + 3/2*y^2"),
    ("-(y - 1)^2", "-1 + 2*y - y^2"),
    ("2*(x+y) - 2*x", "2*y"),
])
def test_parse_format(text, expected):
    assert format_poly(P(text)) == expected


def test_round_trip_through_text():
    p = P("y^3 + t*y - q*y + q - z + 5/3*x^2*y")
    assert P(str(p)) == p


@pytest.mark.parametrize("text,pos", [("y^", 2), ("y + * 2", 4), ("(y + 1", 6), ("", 0), ("y $ 2", 2), ("1/0", 2)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(GermSyntaxError) as exc:
        P(text)
    assert exc.value.pos == pos


def test_unknown_variable():
    with pytest.raises(UnknownVariableError) as exc:
        parse_poly("y^2 + w", VarSpec.of(["y"]))
    assert exc.value.name == "w"


def test_names_and_inference():
    assert names_in("x1*y2 + q1 - z") == ["x1", "y2", "q1", "z"]
    assert infer_spec("y1^2 + t").names == ("y", "t")
    assert infer_spec("y1^2 - y2^2").names == ("y1", "y2")
    assert infer_spec("x + q1", extra=["z"]).names == ("x", "q1", "z")
    with pytest.raises(GermSyntaxError):
        infer_spec("y + y2")


# ---------------------------------------------------------------- algebra

def test_basic_queries():
    p = P("x^2*y + 3*y - 2")
    assert p.degree() == 3
    assert p.order() == 0
    assert p.constant == -2
    assert p.coefficient({"x": 2, "y": 1}) == 1
    assert p.variables() == ("x", "y")
    assert p.depends_on("y") and not p.depends_on("t")
    assert p.truncate(1) == P("3*y - 2")
    assert p.homogeneous_part(3) == P("x^2*y")


def test_diff_and_evaluate():
    p = P("x^2*y + t*y^3 - z")
    assert p.diff("y") == P("x^2 + 3*t*y^2")
    assert p.diff("z") == Poly.const(SPEC, -1)
    assert p.evaluate({"x": 2, "y": Fraction(1, 2), "t": 1, "z": 3}) == Fraction(2) + Fraction(1, 8) - 3


def test_embed_restrict_rename():
    p = parse_poly("y^2 + q", VarSpec.of(["y", "q"]))
    big = p.embed(SPEC)
    assert big.spec == SPEC and str(big) == "y^2 + q"
    assert big.restrict(VarSpec.of(["y", "q"])) == p
    with pytest.raises(ValueError):
        P("x + y").restrict(VarSpec.of(["y"]))
    r = p.rename({"q": "t"})
    assert str(r) == "y^2 + t"


def test_subs_with_truncation():
    p = P("y^3")
    s = p.subs({"y": P("y + x^2")}, truncate=4)
    assert s == P("y^3 + 3*x^2*y^2")


def test_mul_truncate_matches_truncated_product():
    a, b = P("1 + x + y^2"), P("y + x^3")
    assert mul_truncate(a, b, 2) == (a * b).truncate(2)


def test_local_key_orders_by_degree_then_x():
    exps = [(0, 2), (1, 0), (2, 0), (1, 1), (0, 0)]
    assert sorted(exps, key=local_key) == [(0, 0), (1, 0), (2, 0), (1, 1), (0, 2)]


# ---------------------------------------------------------------- properties

XY = VarSpec.of(["x", "y", "q"])
coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)
mono = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2))
polys = st.dictionaries(mono, coef, max_size=5).map(lambda d: Poly(XY, d))
sx, sy, sq = sympy.symbols("x y q")


def to_sympy(p: Poly):
    return sum((sympy.Rational(c.numerator, c.denominator) * sx**e[0] * sy**e[1] * sq**e[2]
                for e, c in p.items()), sympy.Integer(0))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_product_and_derivative_match_sympy(a, b):
    assert sympy.expand(to_sympy(a * b) - to_sympy(a) * to_sympy(b)) == 0
    assert sympy.expand(to_sympy(a.diff("y")) - sympy.diff(to_sympy(a), sy)) == 0


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_leibniz(a, b):
    assert (a * b).diff("x") == a.diff("x") * b + a * b.diff("x")


@settings(max_examples=40, deadline=None)
@given(polys, polys, st.fractions(min_value=-2, max_value=2, max_denominator=3))
def test_subs_then_evaluate(a, b, v):
    lhs = a.subs({"x": b}).evaluate({"x": 0, "y": v, "q": 1})
    inner = b.evaluate({"x": 0, "y": v, "q": 1})
    assert lhs == a.evaluate({"x": inner, "y": v, "q": 1})


@settings(max_examples=40, deadline=None)
@given(polys)
def test_format_parse_round_trip(a):
    assert parse_poly(str(a), XY) == a
