"""Exact polynomial and jet-space algebra."""
from .poly import ROLES, Poly, VarSpec, diff, format_poly, group_names, local_key, mul_truncate, role_of
from .grammar import GermSyntaxError, UnknownVariableError, infer_spec, names_in, parse_poly
from .space import Coeff, JetSpace, LinSubspace, ProductSpace, extend_span, module_span, monomials

__all__ = [
    "ROLES", "Poly", "VarSpec", "diff", "format_poly", "group_names", "local_key", "mul_truncate", "role_of",
    "GermSyntaxError", "UnknownVariableError", "infer_spec", "names_in", "parse_poly",
    "Coeff", "JetSpace", "LinSubspace", "ProductSpace", "extend_span", "module_span", "monomials",
]
