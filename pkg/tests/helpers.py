"""Shared test helpers: string -> polynomial, sympy conversion oracles."""

import sympy

from radtower.expressions import ast_to_ratfunc, parse_expression
from radtower.poly import MultiPoly, RatFunc, VarTable


def table(*names, classes=None):
    if classes is None:
        classes = []
        for nm in names:
            if nm.startswith("t"):
                classes.append("T")
            elif nm.startswith("d"):
                classes.append("Delta")
            elif nm.startswith("x") or nm.startswith("y"):
                classes.append("X")
            elif nm == "z":
                classes.append("Z")
            else:
                classes.append("Aux")
    return VarTable(names, classes)


def poly(tbl: VarTable, text: str) -> MultiPoly:
    rf = ast_to_ratfunc(parse_expression(text), tbl)
    assert rf.is_polynomial(), f"{text} is not a polynomial"
    return rf.num


def ratfunc(tbl: VarTable, text: str) -> RatFunc:
    return ast_to_ratfunc(parse_expression(text), tbl)


def to_sympy(p: MultiPoly, syms=None):
    """Independent conversion of a MultiPoly into a sympy expression."""
    if syms is None:
        syms = {nm: sympy.Symbol(nm) for nm in p.vars.names}
    total = sympy.Integer(0)
    for e, c in p.terms.items():
        term = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator
        )
        for i, k in enumerate(e):
            if k:
                term *= syms[p.vars.names[i]] ** k
        total += term
    return sympy.expand(total)


def sympy_equal(p: MultiPoly, expr) -> bool:
    return sympy.expand(to_sympy(p) - expr) == 0
