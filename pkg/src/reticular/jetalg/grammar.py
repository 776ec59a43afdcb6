"""Parser for the germ grammar.

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT ("/" INT)? | NAME | "(" expr ")"

Names are x1..x9, y1..y9, t, q1..q9, u11..u99, z, with the bare letters
x, y, q, u allowed when the VarSpec holds a single variable of that kind.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from .poly import Poly, VarSpec, role_of, _NAME_RE

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class GermSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.message = message
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text!r}")


class UnknownVariableError(ValueError):
    def __init__(self, name: str, spec: VarSpec, pos: int):
        self.name = name
        self.pos = pos
        super().__init__(f"unknown variable {name!r} at position {pos} (allowed: {', '.join(spec.names) or 'none'})")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            out.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*^()/":
                raise GermSyntaxError(f"unexpected character {ch!r}", text, m.start(3))
            out.append((ch, ch, m.start(3)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, spec: VarSpec):
        self.text = text
        self.spec = spec
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            want = "integer" if kind == "int" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise GermSyntaxError(f"expected {want}, found {got}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            raise GermSyntaxError("empty expression", self.text, 0)
        out = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise GermSyntaxError(f"unexpected {tok[1]!r}", self.text, tok[2])
        return out

    def expr(self) -> Poly:
        acc = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Poly:
        acc = self.unary()
        while self.peek()[0] == "*":
            self.take()
            acc = acc * self.unary()
        return acc

    def unary(self) -> Poly:
        kind = self.peek()[0]
        if kind == "+":
            self.take()
            return self.unary()
        if kind == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("int")
            base = base ** int(tok[1])
        return base

    def atom(self) -> Poly:
        tok = self.peek()
        if tok[0] == "int":
            self.take()
            value = Fraction(int(tok[1]))
            if self.peek()[0] == "/":
                self.take()
                den = self.take("int")
                if int(den[1]) == 0:
                    raise GermSyntaxError("division by zero", self.text, den[2])
                value /= int(den[1])
            return Poly.const(self.spec, value)
        if tok[0] == "name":
            self.take()
            canon = self.spec.resolve(tok[1])
            if canon is None:
                raise UnknownVariableError(tok[1], self.spec, tok[2])
            return Poly.var(self.spec, canon)
        if tok[0] == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        got = "end of input" if tok[0] == "end" else repr(tok[1])
        raise GermSyntaxError(f"expected a number, variable or '(', found {got}", self.text, tok[2])


def parse_poly(text: str, spec: VarSpec) -> Poly:
    """Parse ``text`` as a polynomial in ``spec``."""
    return _Parser(text, spec).parse()


def names_in(text: str) -> list[str]:
    """Variable names appearing in ``text``, validated against the grammar."""
    out = []
    for kind, value, pos in _tokenize(text):
        if kind == "name":
            if not _NAME_RE.match(value):
                raise GermSyntaxError(f"unknown variable {value!r}", text, pos)
            out.append(value)
    return out


def infer_spec(text: str, extra: Iterable[str] = ()) -> VarSpec:
    """Smallest spec covering the names used in ``text`` plus ``extra``.

    For x and y the bare name and its index-1 form are identified, so a
    lone ``y1`` gives the VarSpec ``(y)``.  Parameter names are kept as written.
    """
    names = set(extra)
    state: dict[str, set[str]] = {}
    for n in names_in(text):
        if role_of(n) in ("x", "y"):
            state.setdefault(n[0], set()).add(n)
        else:
            names.add(n)
    for role, group in state.items():
        if group <= {role, role + "1"}:
            names.add(role)
        elif role in group:
            raise GermSyntaxError(f"bare {role!r} mixed with indexed {role} variables", text, 0)
        else:
            names.update(group)
    return VarSpec.of(names)
