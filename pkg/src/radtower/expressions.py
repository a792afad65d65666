"""Expression front end: parsing, canonical AST form, conversions.

Grammar (precedence low to high: +,- then *,/ then ^ then unary -):

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := power
    power   := unary ('^' ('-')? integer)?
    unary   := '-' unary | atom
    atom    := number | 'i' | name | '(' expr ')'
             | 'sqrt' '(' expr ')' | 'root' '(' expr ',' integer ')'
             | 'exp' '(' expr ')' | 'pi'        [transcendental mode only]

`sqrt(e)` is `root(e, 2)`; `i` is the imaginary unit; parameters are named
`t` (one variable) or `t1..tn`.  Number literals are integers or decimals,
both exact rationals.  `exp`/`pi` are only accepted when parsing branch
values, which are evaluated numerically with principal roots.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .gaussian import GR_I, GR_MINUS_ONE, GR_ONE, GaussianRational
from .poly import MultiPoly, RatFunc, VarTable


class ExprSyntaxError(ValueError):
    """Parse failure with a character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: GaussianRational


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    args: tuple


@dataclass(frozen=True)
class Mul:
    args: tuple


@dataclass(frozen=True)
class Div:
    num: object
    den: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class Root:
    arg: object
    index: int


@dataclass(frozen=True)
class Exp:
    arg: object


@dataclass(frozen=True)
class Pi:
    pass


_TOKEN = re.compile(r"\s*(?:(\d+\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^|\+|\-|\*|/|\(|\)|,))")


class _Parser:
    def __init__(self, text: str, transcendental: bool):
        self.text = text
        self.transcendental = transcendental
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", pos)
            if m.group(1):
                self.tokens.append(("num", m.group(1), m.start(1)))
            elif m.group(2):
                self.tokens.append(("name", m.group(2), m.start(2)))
            else:
                self.tokens.append(("op", m.group(3), m.start(3)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing {val!r}", pos)
        return e

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                if val == "-":
                    rhs = Mul((Num(GR_MINUS_ONE), rhs))
                node = Add((node, rhs))
            else:
                return node

    def term(self):
        node = self.power()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.power()
                node = Mul((node, rhs)) if val == "*" else Div(node, rhs)
            else:
                return node

    def power(self):
        base = self.unary()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            sign = 1
            kind, val, pos = self.peek()
            if kind == "op" and val == "-":
                self.next()
                sign = -1
            kind, val, pos = self.next()
            if kind != "num" or "." in val:
                raise ExprSyntaxError("exponent must be an integer", pos)
            return Pow(base, sign * int(val))
        return base

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Mul((Num(GR_MINUS_ONE), self.unary()))
        return self.atom()

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(GaussianRational(Fraction(val)))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "name":
            if val == "i":
                return Num(GR_I)
            if val == "sqrt":
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Root(arg, 2)
            if val == "root":
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(",")
                k, idx, p2 = self.next()
                if k != "num" or "." in idx:
                    raise ExprSyntaxError("root index must be an integer", p2)
                idx = int(idx)
                if idx < 2:
                    raise ExprSyntaxError("root index must be >= 2", p2)
                self.expect_op(")")
                return Root(arg, idx)
            if val == "exp":
                if not self.transcendental:
                    raise ExprSyntaxError("exp(...) only allowed in branch values", pos)
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Exp(arg)
            if val == "pi":
                if not self.transcendental:
                    raise ExprSyntaxError("pi only allowed in branch values", pos)
                return Pi()
            return Var(val)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def normalize_ast(node):
    """Flatten associativity, fold numeric literals, sort commutative operands."""
    if isinstance(node, (Num, Var, Pi)):
        return node
    if isinstance(node, Add):
        args = []
        const = None
        for a in node.args:
            a = normalize_ast(a)
            parts = a.args if isinstance(a, Add) else (a,)
            for p in parts:
                if isinstance(p, Num):
                    const = p.value if const is None else const + p.value
                else:
                    args.append(p)
        if const is not None and (const or not args):
            args.append(Num(const))
        if not args:
            return Num(GaussianRational(0))
        args.sort(key=render_ast)
        return Add(tuple(args)) if len(args) > 1 else args[0]
    if isinstance(node, Mul):
        args = []
        const = None
        for a in node.args:
            a = normalize_ast(a)
            parts = a.args if isinstance(a, Mul) else (a,)
            for p in parts:
                if isinstance(p, Num):
                    const = p.value if const is None else const * p.value
                else:
                    args.append(p)
        if const is not None and not const:
            return Num(const)
        if const is not None and (not const.is_one() or not args):
            args.append(Num(const))
        if not args:
            return Num(GR_ONE)
        args.sort(key=render_ast)
        return Mul(tuple(args)) if len(args) > 1 else args[0]
    if isinstance(node, Div):
        num, den = normalize_ast(node.num), normalize_ast(node.den)
        if isinstance(num, Num) and isinstance(den, Num) and den.value:
            return Num(num.value / den.value)
        return Div(num, den)
    if isinstance(node, Pow):
        if node.exp == 1:
            return normalize_ast(node.base)
        if node.exp == 0:
            return Num(GR_ONE)
        base = normalize_ast(node.base)
        if isinstance(base, Num) and node.exp > 0:
            v = GR_ONE
            for _ in range(node.exp):
                v = v * base.value
            return Num(v)
        return Pow(base, node.exp)
    if isinstance(node, Root):
        return Root(normalize_ast(node.arg), node.index)
    if isinstance(node, Exp):
        return Exp(normalize_ast(node.arg))
    raise TypeError(f"unknown AST node {node!r}")


def render_ast(node) -> str:
    """Deterministic text form; parses back to the same normalized AST."""
    if isinstance(node, Num):
        v = node.value
        if v.is_rational() and v.re >= 0:
            return str(v.re)
        if v.is_rational():
            return f"(0-{-v.re})"
        base = v.render()
        if base == "i":
            return "i"
        if base.startswith("("):
            return base
        if base.startswith("-"):
            return f"(0{base})"
        return f"({base})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Add):
        return "(" + "+".join(render_ast(a) for a in node.args) + ")"
    if isinstance(node, Mul):
        return "(" + "*".join(render_ast(a) for a in node.args) + ")"
    if isinstance(node, Div):
        return f"({render_ast(node.num)}/{render_ast(node.den)})"
    if isinstance(node, Pow):
        e = node.exp
        estr = str(e) if e >= 0 else f"-{-e}"
        return f"{render_ast(node.base)}^{estr}"
    if isinstance(node, Root):
        return f"root({render_ast(node.arg)},{node.index})"
    if isinstance(node, Exp):
        return f"exp({render_ast(node.arg)})"
    raise TypeError(f"unknown AST node {node!r}")


def parse_expression(text: str, transcendental: bool = False):
    """Parse to a normalized AST; raises ExprSyntaxError with a position."""
    return normalize_ast(_Parser(text, transcendental).parse())


def ast_depth(node) -> int:
    """Radical nesting depth: 0 for radical-free expressions."""
    if isinstance(node, (Num, Var, Pi)):
        return 0
    if isinstance(node, (Add, Mul)):
        return max(ast_depth(a) for a in node.args)
    if isinstance(node, Div):
        return max(ast_depth(node.num), ast_depth(node.den))
    if isinstance(node, (Pow, Exp)):
        return ast_depth(node.base if isinstance(node, Pow) else node.arg)
    if isinstance(node, Root):
        return 1 + ast_depth(node.arg)
    raise TypeError


def iter_radicals(node):
    """Maximal radical subtrees in left-to-right appearance order."""
    if isinstance(node, (Num, Var, Pi)):
        return
    if isinstance(node, (Add, Mul)):
        for a in node.args:
            yield from iter_radicals(a)
        return
    if isinstance(node, Div):
        yield from iter_radicals(node.num)
        yield from iter_radicals(node.den)
        return
    if isinstance(node, Pow):
        yield from iter_radicals(node.base)
        return
    if isinstance(node, Exp):
        yield from iter_radicals(node.arg)
        return
    if isinstance(node, Root):
        yield node
        return
    raise TypeError


def ast_variables(node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Num, Pi)):
        return set()
    if isinstance(node, (Add, Mul)):
        s = set()
        for a in node.args:
            s |= ast_variables(a)
        return s
    if isinstance(node, Div):
        return ast_variables(node.num) | ast_variables(node.den)
    if isinstance(node, Pow):
        return ast_variables(node.base)
    if isinstance(node, Exp):
        return ast_variables(node.arg)
    if isinstance(node, Root):
        return ast_variables(node.arg)
    raise TypeError


def ast_to_ratfunc(node, table: VarTable, radical_hook: Optional[Callable] = None) -> RatFunc:
    """Convert an AST to an exact rational function over `table`.

    Root nodes are handed to `radical_hook(node) -> RatFunc`; without a hook
    any radical is an error (used for radical-free conversions).
    """
    if isinstance(node, Num):
        return RatFunc.const(table, node.value)
    if isinstance(node, Var):
        return RatFunc.from_poly(MultiPoly.variable(table, node.name))
    if isinstance(node, Add):
        acc = RatFunc.zero(table)
        for a in node.args:
            acc = acc + ast_to_ratfunc(a, table, radical_hook)
        return acc
    if isinstance(node, Mul):
        acc = RatFunc.one(table)
        for a in node.args:
            acc = acc * ast_to_ratfunc(a, table, radical_hook)
        return acc
    if isinstance(node, Div):
        return ast_to_ratfunc(node.num, table, radical_hook) / ast_to_ratfunc(
            node.den, table, radical_hook
        )
    if isinstance(node, Pow):
        base = ast_to_ratfunc(node.base, table, radical_hook)
        e = node.exp
        if e < 0:
            base = RatFunc.one(table) / base
            e = -e
        return RatFunc(base.num**e, base.den**e, reduce=False)
    if isinstance(node, Root):
        if radical_hook is None:
            raise ValueError("radical in a radical-free context")
        return radical_hook(node)
    raise ValueError(f"node {node!r} not convertible to a rational function")


def eval_ast_exact(node) -> GaussianRational:
    """Exact evaluation of a radical-free, variable-free expression."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Add):
        acc = GaussianRational(0)
        for a in node.args:
            acc = acc + eval_ast_exact(a)
        return acc
    if isinstance(node, Mul):
        acc = GR_ONE
        for a in node.args:
            acc = acc * eval_ast_exact(a)
        return acc
    if isinstance(node, Div):
        return eval_ast_exact(node.num) / eval_ast_exact(node.den)
    if isinstance(node, Pow):
        base = eval_ast_exact(node.base)
        e = node.exp
        if e < 0:
            base = GR_ONE / base
            e = -e
        acc = GR_ONE
        for _ in range(e):
            acc = acc * base
        return acc
    raise ValueError("expression is not an exact Gaussian rational constant")


def eval_ast_numeric(node, env: Optional[dict] = None) -> complex:
    """Numeric evaluation with principal roots (branch-value literals)."""
    env = env or {}
    if isinstance(node, Num):
        return complex(node.value)
    if isinstance(node, Var):
        if node.name not in env:
            raise ValueError(f"unbound name {node.name!r} in numeric expression")
        return env[node.name]
    if isinstance(node, Pi):
        return complex(cmath.pi)
    if isinstance(node, Add):
        return sum(eval_ast_numeric(a, env) for a in node.args)
    if isinstance(node, Mul):
        out = 1 + 0j
        for a in node.args:
            out *= eval_ast_numeric(a, env)
        return out
    if isinstance(node, Div):
        return eval_ast_numeric(node.num, env) / eval_ast_numeric(node.den, env)
    if isinstance(node, Pow):
        return eval_ast_numeric(node.base, env) ** node.exp
    if isinstance(node, Root):
        v = eval_ast_numeric(node.arg, env)
        # principal branch
        return v ** (1.0 / node.index) if v != 0 else 0j
    if isinstance(node, Exp):
        return cmath.exp(eval_ast_numeric(node.arg, env))
    raise TypeError
