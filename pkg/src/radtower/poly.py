"""Sparse multivariate polynomial arithmetic with exact coefficients.

A polynomial is a dict mapping exponent tuples to nonzero coefficients.
Coefficients are GaussianRational in the main ring Q(i)[vars]; the same
class also carries RatFunc coefficients for arithmetic in radical-tower
algebras (any coefficient type with field operations and truthiness works).

Canonical textual rendering: terms in descending lex order (variable-table
order), explicit `*` and `^`; this string form is the serialization used by
the reports and the golden tests.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Optional

from .gaussian import (
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    gaussian_nth_root,
    gaussian_sqrt,
)

VAR_CLASSES = ("T", "Delta", "X", "Z", "S", "D", "Aux")


class VarTable:
    """Ordered variable names, each tagged with a classification."""

    __slots__ = ("names", "classes", "_index")

    def __init__(self, names: Iterable[str], classes: Iterable[str]):
        self.names = tuple(names)
        self.classes = tuple(classes)
        if len(self.names) != len(self.classes):
            raise ValueError("names/classes length mismatch")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        for c in self.classes:
            if c not in VAR_CLASSES:
                raise ValueError(f"unknown variable class {c!r}")
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        return self._index[name]

    def indices_of_class(self, cls: str) -> tuple:
        return tuple(i for i, c in enumerate(self.classes) if c == cls)

    def __eq__(self, other):
        return (
            isinstance(other, VarTable)
            and self.names == other.names
            and self.classes == other.classes
        )

    def __hash__(self):
        return hash((self.names, self.classes))

    def __repr__(self):
        return f"VarTable({list(self.names)!r})"


class MonomialOrder:
    """lex or block_lex term order.

    `priority` lists variable indices from most to least significant; a
    block order with lex inside blocks is the plain lex order on the
    concatenated priority sequence, and the blocks are kept for
    elimination bookkeeping.
    """

    __slots__ = ("kind", "priority", "blocks")

    def __init__(self, kind: str, priority, blocks=None):
        if kind not in ("lex", "block_lex"):
            raise ValueError(f"unknown order kind {kind!r}")
        self.kind = kind
        self.priority = tuple(priority)
        self.blocks = tuple(tuple(b) for b in blocks) if blocks is not None else None
        if sorted(self.priority) != list(range(len(self.priority))):
            raise ValueError("priority must be a permutation of the variable indices")

    @staticmethod
    def lex(table: VarTable) -> "MonomialOrder":
        return MonomialOrder("lex", range(len(table)))

    @staticmethod
    def block(table: VarTable, blocks) -> "MonomialOrder":
        """blocks: iterable of iterables of var indices, leading block first."""
        blocks = [tuple(b) for b in blocks]
        flat = [i for b in blocks for i in b]
        if sorted(flat) != list(range(len(table))):
            raise ValueError("blocks must partition the variable table")
        return MonomialOrder("block_lex", flat, blocks)

    def key(self, expo: tuple) -> tuple:
        return tuple(expo[i] for i in self.priority)

    def greater(self, e1: tuple, e2: tuple) -> bool:
        return self.key(e1) > self.key(e2)


def mono_mul(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))

def mono_divides(a: tuple, b: tuple) -> bool:
    """a | b componentwise."""
    return all(x <= y for x, y in zip(a, b))

def mono_sub(a: tuple, b: tuple) -> tuple:
    """a - b componentwise (valid when b divides a)."""
    return tuple(x - y for x, y in zip(a, b))

def mono_lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


class MultiPoly:
    """Sparse multivariate polynomial: exponent tuple -> nonzero coefficient."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: VarTable, terms: dict):
        self.vars = vars
        self.terms = terms

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(vars: VarTable) -> "MultiPoly":
        return MultiPoly(vars, {})

    @staticmethod
    def const(vars: VarTable, c) -> "MultiPoly":
        if not isinstance(c, GaussianRational):
            c = GaussianRational(c)
        if not c:
            return MultiPoly(vars, {})
        return MultiPoly(vars, {(0,) * len(vars): c})

    @staticmethod
    def const_coeff(vars: VarTable, c) -> "MultiPoly":
        """Constant with an arbitrary coefficient object (e.g. RatFunc)."""
        if not c:
            return MultiPoly(vars, {})
        return MultiPoly(vars, {(0,) * len(vars): c})

    @staticmethod
    def variable(vars: VarTable, name: str, power: int = 1) -> "MultiPoly":
        e = [0] * len(vars)
        e[vars.index(name)] = power
        return MultiPoly(vars, {tuple(e): GR_ONE})

    @staticmethod
    def monomial(vars: VarTable, expo: tuple, coeff) -> "MultiPoly":
        if not coeff:
            return MultiPoly(vars, {})
        return MultiPoly(vars, {tuple(expo): coeff})

    # -- basic queries ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self):
        """The coefficient of the constant term (polynomial must be constant)."""
        if not self.terms:
            return GR_ZERO
        [(e, c)] = self.terms.items()
        if any(e):
            raise ValueError("not a constant polynomial")
        return c

    def degree(self, vidx: int) -> int:
        if not self.terms:
            return -1
        return max(e[vidx] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def active_vars(self) -> list:
        """Indices of variables appearing with positive degree."""
        n = len(self.vars)
        seen = [False] * n
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    seen[i] = True
        return [i for i in range(n) if seen[i]]

    def num_terms(self) -> int:
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # -- ring arithmetic ---------------------------------------------------

    def _check(self, other: "MultiPoly"):
        if self.vars != other.vars:
            raise ValueError("variable-table mismatch")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e)
            if s is None:
                t[e] = c
            else:
                s = s + c
                if s:
                    t[e] = s
                else:
                    del t[e]
        return MultiPoly(self.vars, t)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e)
            if s is None:
                t[e] = -c
            else:
                s = s - c
                if s:
                    t[e] = s
                else:
                    del t[e]
        return MultiPoly(self.vars, t)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        if not self.terms or not other.terms:
            return MultiPoly(self.vars, {})
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        t: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                c = ca * cb
                s = t.get(e)
                if s is None:
                    if c:
                        t[e] = c
                else:
                    s = s + c
                    if s:
                        t[e] = s
                    else:
                        del t[e]
        return MultiPoly(self.vars, t)

    def scale(self, c) -> "MultiPoly":
        if not c:
            return MultiPoly(self.vars, {})
        return MultiPoly(self.vars, {e: k * c for e, k in self.terms.items()})

    def scale_div(self, c) -> "MultiPoly":
        return MultiPoly(self.vars, {e: k / c for e, k in self.terms.items()})

    def mul_monomial(self, expo: tuple, coeff) -> "MultiPoly":
        if not coeff:
            return MultiPoly(self.vars, {})
        return MultiPoly(
            self.vars,
            {tuple(x + y for x, y in zip(e, expo)): c * coeff for e, c in self.terms.items()},
        )

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = None
        base = self
        if n == 0:
            one = GR_ONE
            for c in self.terms.values():
                one = c / c
                break
            return MultiPoly.const_coeff(self.vars, one)
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- leading terms ------------------------------------------------------

    def leading(self, order: MonomialOrder):
        """(exponent, coefficient) of the leading term; polynomial nonzero."""
        key = order.key
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def sorted_terms(self, order: Optional[MonomialOrder] = None):
        key = order.key if order is not None else (lambda e: e)
        return sorted(self.terms.items(), key=lambda t: key(t[0]), reverse=True)

    # -- calculus -------------------------------------------------------------

    def derivative(self, vidx: int) -> "MultiPoly":
        t = {}
        for e, c in self.terms.items():
            k = e[vidx]
            if not k:
                continue
            ne = list(e)
            ne[vidx] = k - 1
            nc = c * GaussianRational(k) if isinstance(c, GaussianRational) else c * k
            if nc:
                t[tuple(ne)] = nc
        return MultiPoly(self.vars, t)

    # -- evaluation -------------------------------------------------------------

    def evaluate(self, point: dict) -> complex:
        """Numeric evaluation; point maps variable index -> complex."""
        total = 0j
        for e, c in self.terms.items():
            v = complex(c)
            for i, k in enumerate(e):
                if k:
                    v *= point[i] ** k
            total += v
        return total

    def eval_scale(self, point: dict) -> float:
        """Sum of term magnitudes at the point, for relative residuals."""
        total = 0.0
        for e, c in self.terms.items():
            v = abs(complex(c))
            for i, k in enumerate(e):
                if k:
                    v *= abs(point[i]) ** k
            total += v
        return total

    def evaluate_exact(self, point: dict) -> GaussianRational:
        """Exact evaluation at GaussianRational coordinates."""
        total = GR_ZERO
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    p = point[i]
                    for _ in range(k):
                        v = v * p
            total = total + v
        return total

    # -- substitution ------------------------------------------------------------

    def subst_polys(self, mapping: dict) -> "MultiPoly":
        """Substitute variables by polynomials (mapping: var index -> MultiPoly)."""
        target = None
        for p in mapping.values():
            target = p.vars
            break
        if target is None:
            target = self.vars
        pow_cache: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in pow_cache:
                pow_cache[key] = mapping[i] ** k
            return pow_cache[key]

        acc = MultiPoly.zero(target)
        for e, c in self.terms.items():
            term = MultiPoly.const_coeff(target, c)
            for i, k in enumerate(e):
                if not k:
                    continue
                if i in mapping:
                    term = term * power(i, k)
                else:
                    if self.vars.names[i] not in target._index:
                        raise ValueError(
                            f"variable {self.vars.names[i]} not available after substitution"
                        )
                    term = term * MultiPoly.variable(target, self.vars.names[i], k)
            acc = acc + term
        return acc

    def embed(self, target: VarTable) -> "MultiPoly":
        """Re-express on a larger/reordered table, matching variables by name."""
        if target == self.vars:
            return self
        idx_map = []
        for i, name in enumerate(self.vars.names):
            idx_map.append(target._index.get(name, -1))
        t = {}
        for e, c in self.terms.items():
            ne = [0] * len(target)
            for i, k in enumerate(e):
                if k:
                    j = idx_map[i]
                    if j < 0:
                        raise ValueError(f"variable {self.vars.names[i]} missing in target table")
                    ne[j] = k
            t[tuple(ne)] = c
        return MultiPoly(target, t)

    # -- normalization (GaussianRational coefficients) ----------------------------

    def content_rational(self) -> Fraction:
        """Positive rational c with self/c integer-primitive (Gaussian-integer
        coefficients whose numerators have gcd 1)."""
        if not self.terms:
            return Fraction(1)
        den_lcm = 1
        for c in self.terms.values():
            den_lcm = den_lcm * c.re.denominator // int_gcd(den_lcm, c.re.denominator)
            den_lcm = den_lcm * c.im.denominator // int_gcd(den_lcm, c.im.denominator)
        num_gcd = 0
        for c in self.terms.values():
            num_gcd = int_gcd(num_gcd, abs(c.re.numerator * (den_lcm // c.re.denominator)))
            num_gcd = int_gcd(num_gcd, abs(c.im.numerator * (den_lcm // c.im.denominator)))
        return Fraction(num_gcd, den_lcm)

    def normalized(self) -> "MultiPoly":
        """Integer-primitive with positive leading coefficient under lex."""
        if not self.terms:
            return self
        c = self.content_rational()
        p = self.scale(GaussianRational(1 / c))
        e = max(p.terms)
        if p.terms[e].is_negative_convention():
            p = -p
        return p

    def monic(self, order: MonomialOrder) -> "MultiPoly":
        _, c = self.leading(order)
        if c.is_one() if isinstance(c, GaussianRational) else False:
            return self
        return self.scale_div(c)

    # -- rendering -----------------------------------------------------------------

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(
                f"{self.vars.names[i]}^{k}" if k > 1 else self.vars.names[i]
                for i, k in enumerate(e)
                if k
            )
            cs = c.render()
            if mono:
                if cs == "1":
                    term = mono
                elif cs == "-1":
                    term = f"-{mono}"
                else:
                    term = f"{cs}*{mono}"
            else:
                term = cs
            if parts and not term.startswith("-"):
                parts.append("+" + term)
            else:
                parts.append(term)
        return "".join(parts)

    def __repr__(self):
        return f"MultiPoly<{self.render()}>"


# ---------------------------------------------------------------------------
# exact division, gcd, square-free part
# ---------------------------------------------------------------------------


def exact_divide(a: MultiPoly, b: MultiPoly) -> Optional[MultiPoly]:
    """a / b when the division is exact in the polynomial ring, else None."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return a
    rem = dict(a.terms)
    eb = max(b.terms)
    cb = b.terms[eb]
    bt = list(b.terms.items())
    q: dict = {}
    # bounded by term count growth; each step removes the current lex-leading term
    while rem:
        ea = max(rem)
        ca = rem[ea]
        if not all(x >= y for x, y in zip(ea, eb)):
            return None
        qe = tuple(x - y for x, y in zip(ea, eb))
        qc = ca / cb
        q[qe] = qc
        for e, c in bt:
            ke = tuple(x + y for x, y in zip(qe, e))
            s = rem.get(ke)
            d = qc * c
            if s is None:
                if d:
                    rem[ke] = -d
            else:
                s = s - d
                if s:
                    rem[ke] = s
                else:
                    del rem[ke]
    return MultiPoly(a.vars, q)


def _prem(f: dict, g: dict, vidx: int, vars: VarTable):
    """Pseudo-remainder of f by g as univariate polys in vidx.

    f, g: dict degree -> MultiPoly coefficient (in the remaining variables).
    Returns dict in the same form.
    """
    df = max(f)
    dg = max(g)
    lc_g = g[dg]
    r = dict(f)
    steps = df - dg + 1
    while r:
        dr = max(r)
        if dr < dg:
            break
        lead = r[dr]
        nr: dict = {}
        for d, c in r.items():
            if d == dr:
                continue
            nr[d] = c * lc_g
        for d, c in g.items():
            if d == dg:
                continue
            key = d + dr - dg
            s = nr.get(key)
            p = c * lead
            if s is None:
                nr[key] = -p
            else:
                s = s - p
                if s:
                    nr[key] = s
                else:
                    del nr[key]
        nr = {d: c for d, c in nr.items() if c}
        r = nr
        steps -= 1
    # scale the remainder so that overall lc(g)^(df-dg+1) * f = q*g + r
    if steps > 0 and r:
        mult = lc_g**steps if steps > 1 else lc_g
        r = {d: c * mult for d, c in r.items()}
    return r


def _upoly(p: MultiPoly, vidx: int) -> dict:
    """View p as univariate in vidx with MultiPoly coefficients."""
    coeffs: dict = {}
    for e, c in p.terms.items():
        d = e[vidx]
        ne = list(e)
        ne[vidx] = 0
        key = tuple(ne)
        cur = coeffs.get(d)
        if cur is None:
            coeffs[d] = MultiPoly(p.vars, {key: c})
        else:
            cur.terms[key] = cur.terms.get(key, GR_ZERO) + c
            if not cur.terms[key]:
                del cur.terms[key]
    return {d: c for d, c in coeffs.items() if c.terms}

def _upoly_to_poly(up: dict, vidx: int, vars: VarTable) -> MultiPoly:
    t: dict = {}
    for d, c in up.items():
        for e, k in c.terms.items():
            ne = list(e)
            ne[vidx] = d
            t[tuple(ne)] = k
    return MultiPoly(vars, t)


def _content_in(up: dict) -> MultiPoly:
    """gcd of the coefficients of a univariate view."""
    it = iter(sorted(up))
    g = up[next(it)]
    for d in it:
        g = gcd_multivariate(g, up[d])
        if g.is_constant():
            break
    return g.normalized()


def gcd_multivariate(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """A gcd, primitive with positive leading coefficient; gcd(p, 0) = normalize(p).

    Subresultant PRS recursing on the variable of lowest maximum degree.
    """
    if a.is_zero():
        return b.normalized()
    if b.is_zero():
        return a.normalized()
    one = MultiPoly.const(a.vars, GR_ONE)
    if a.is_constant() or b.is_constant():
        return one
    av = set(a.active_vars())
    bv = set(b.active_vars())
    common = sorted(av & bv, key=lambda i: max(a.degree(i), b.degree(i)))
    if not common:
        return one
    v = common[0]
    ua, ub = _upoly(a, v), _upoly(b, v)
    ca, cb = _content_in(ua), _content_in(ub)
    cont = gcd_multivariate(ca, cb)
    pa = exact_divide(a, ca)
    pb = exact_divide(b, cb)
    fa, fb = _upoly(pa, v), _upoly(pb, v)
    if max(fa) < max(fb):
        fa, fb = fb, fa
    # subresultant PRS on primitive parts
    g = one
    h = one
    while True:
        delta = max(fa) - max(fb)
        r = _prem(fa, fb, v, a.vars)
        if not r:
            break
        if max(r) == 0:
            # nontrivial constant-degree remainder: primitive parts are coprime in v
            fb = {0: one}
            break
        denom = g
        if delta:
            hp = h
            for _ in range(delta - 1):
                hp = hp * h
            denom = g * hp
        nr = {}
        for d, c in r.items():
            qc = exact_divide(c, denom)
            if qc is None:
                raise ArithmeticError("subresultant division not exact")
            nr[d] = qc
        fa, fb = fb, nr
        g = fa[max(fa)]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            num = g
            for _ in range(delta - 1):
                num = num * g
            hd = h
            for _ in range(delta - 2):
                hd = hd * h
            q = exact_divide(num, hd)
            if q is None:
                raise ArithmeticError("subresultant h-update not exact")
            h = q
    if max(fb) == 0:
        result = cont
    else:
        cand = _upoly_to_poly(fb, v, a.vars)
        cand = exact_divide(cand, _content_in(_upoly(cand, v)))
        result = (cont * cand).normalized()
    result = result.normalized()
    # cheap insurance: a gcd must divide both inputs
    if exact_divide(a, result) is None or exact_divide(b, result) is None:
        raise ArithmeticError("gcd verification failed")
    return result


def partial_derivative(p: MultiPoly, name_or_idx) -> MultiPoly:
    vidx = p.vars.index(name_or_idx) if isinstance(name_or_idx, str) else name_or_idx
    return p.derivative(vidx)


def squarefree_part(p: MultiPoly) -> MultiPoly:
    """Product of the distinct irreducible factors of p, primitive."""
    if p.is_zero():
        raise ValueError("square-free part of zero")
    if p.is_constant():
        return MultiPoly.const(p.vars, GR_ONE)
    g = p
    for v in p.active_vars():
        g = gcd_multivariate(g, p.derivative(v))
        if g.is_constant():
            break
    if g.is_constant():
        return p.normalized()
    q = exact_divide(p, g)
    return q.normalized()


# ---------------------------------------------------------------------------
# exact polynomial square root
# ---------------------------------------------------------------------------


def poly_sqrt(p: MultiPoly) -> Optional[MultiPoly]:
    """s with s*s == p exactly, or None when p is not a square."""
    if p.is_zero():
        return p
    e = max(p.terms)
    if any(k % 2 for k in e):
        return None
    c = gaussian_sqrt(p.terms[e])
    if c is None:
        return None
    half = tuple(k // 2 for k in e)
    s = MultiPoly.monomial(p.vars, half, c)
    lead2 = c + c
    r = p - s * s
    guard = 4 * len(p.terms) + 16
    prev_key = None
    while r.terms:
        guard -= 1
        if guard < 0:
            return None
        er = max(r.terms)
        if prev_key is not None and er >= prev_key:
            return None
        prev_key = er
        if not all(x >= y for x, y in zip(er, half)):
            return None
        ne = tuple(x - y for x, y in zip(er, half))
        nc = r.terms[er] / lead2
        t = MultiPoly.monomial(p.vars, ne, nc)
        r = r - (s + s) * t - t * t
        s = s + t
    return s


# ---------------------------------------------------------------------------
# light best-effort factorization
# ---------------------------------------------------------------------------

# z^d - 1 factor tables over Q(i) as (coefficient, power-of-a, power-of-b)
# triples for a^d - b^d; built from the small cyclotomic polynomials.
_BINOMIAL_FACTORS = {
    2: [[(1, 1, 0), (-1, 0, 1)], [(1, 1, 0), (1, 0, 1)]],
    3: [[(1, 1, 0), (-1, 0, 1)], [(1, 2, 0), (1, 1, 1), (1, 0, 2)]],
    4: [
        [(1, 1, 0), (-1, 0, 1)],
        [(1, 1, 0), (1, 0, 1)],
        [(1, 1, 0), ("-i", 0, 1)],
        [(1, 1, 0), ("i", 0, 1)],
    ],
    5: [[(1, 1, 0), (-1, 0, 1)], [(1, 4, 0), (1, 3, 1), (1, 2, 2), (1, 1, 3), (1, 0, 4)]],
    6: [
        [(1, 1, 0), (-1, 0, 1)],
        [(1, 1, 0), (1, 0, 1)],
        [(1, 2, 0), (1, 1, 1), (1, 0, 2)],
        [(1, 2, 0), (-1, 1, 1), (1, 0, 2)],
    ],
}


def _coeff_of(spec):
    from .gaussian import GR_I

    if spec == "i":
        return GR_I
    if spec == "-i":
        return -GR_I
    return GaussianRational(spec)


def _try_binomial_split(p: MultiPoly):
    """Split c1*v^k + c2*M when M is an exact d-th power monomial, d | k."""
    if len(p.terms) != 2:
        return None
    (e1, c1), (e2, c2) = sorted(p.terms.items(), reverse=True)
    for (ea, ca), (eb, cb) in (((e1, c1), (e2, c2)), ((e2, c2), (e1, c1))):
        nz = [i for i, k in enumerate(ea) if k]
        if len(nz) != 1:
            continue
        v = nz[0]
        k = ea[v]
        if k < 2 or eb[v] != 0:
            continue
        m_coeff = -(cb / ca)
        for d in sorted((d for d in range(2, k + 1) if k % d == 0), reverse=True):
            if d not in _BINOMIAL_FACTORS:
                continue
            if any(x % d for x in eb):
                continue
            root_c = gaussian_nth_root(m_coeff, d)
            if root_c is None:
                continue
            ae = [0] * len(ea)
            ae[v] = k // d
            ae = tuple(ae)
            be = tuple(x // d for x in eb)
            factors = []
            for pattern in _BINOMIAL_FACTORS[d]:
                t: dict = {}
                for coeff_spec, pa, pb in pattern:
                    expo = tuple(x * pa + y * pb for x, y in zip(ae, be))
                    cf = _coeff_of(coeff_spec)
                    if pb:
                        rc = root_c
                        for _ in range(pb - 1):
                            rc = rc * root_c
                        cf = cf * rc
                    t[expo] = t.get(expo, GR_ZERO) + cf
                factors.append(MultiPoly(p.vars, {e: c for e, c in t.items() if c}))
            prod = MultiPoly.const(p.vars, ca)
            for f in factors:
                prod = prod * f
            if prod == p:
                return factors
    return None


def _split_factors(p: MultiPoly, out: list):
    """Recursive strategy pipeline over a square-free polynomial."""
    if p.is_constant():
        return
    # content/primitive split per variable
    for v in p.active_vars():
        up = _upoly(p, v)
        if len(up) == 1:
            continue
        cont = _content_in(up)
        if not cont.is_constant():
            _split_factors(cont, out)
            _split_factors(exact_divide(p, cont), out)
            return
    # single-variable monomial content (v^k divides p)
    for v in p.active_vars():
        kmin = min(e[v] for e in p.terms)
        if kmin > 0:
            out.append((MultiPoly.variable(p.vars, p.vars.names[v]), True))
            shifted = MultiPoly(
                p.vars,
                {
                    tuple(x - (kmin if i == v else 0) for i, x in enumerate(e)): c
                    for e, c in p.terms.items()
                },
            )
            _split_factors(shifted, out)
            return
    active = p.active_vars()
    # linear in some variable, primitive there: irreducible
    for v in active:
        if p.degree(v) == 1:
            out.append((p.normalized(), True))
            return
    # quadratic in some variable: discriminant decides
    for v in active:
        if p.degree(v) != 2:
            continue
        up = _upoly(p, v)
        a = up.get(2, MultiPoly.zero(p.vars))
        b = up.get(1, MultiPoly.zero(p.vars))
        c = up.get(0, MultiPoly.zero(p.vars))
        disc = b * b - MultiPoly.const(p.vars, GaussianRational(4)) * a * c
        s = poly_sqrt(disc)
        if s is None:
            # primitive in v, square-free, non-square discriminant: irreducible
            out.append((p.normalized(), True))
            return
        two = MultiPoly.const(p.vars, GaussianRational(2))
        vpoly = MultiPoly.variable(p.vars, p.vars.names[v])
        f1 = two * a * vpoly + b - s
        f2 = two * a * vpoly + b + s
        g1 = _content_in(_upoly(f1, v))
        g2 = _content_in(_upoly(f2, v))
        f1 = exact_divide(f1, g1)
        f2 = exact_divide(f2, g2)
        _split_factors(f1, out)
        _split_factors(f2, out)
        return
    # binomial v^k - monomial
    factors = _try_binomial_split(p)
    if factors is not None:
        for f in factors:
            _split_factors(f, out)
        return
    out.append((p.normalized(), False))


def light_factor(p: MultiPoly) -> list:
    """Best-effort factor list [(factor, certified_irreducible)].

    The product of the returned factors equals squarefree_part(p) up to a
    nonzero constant; unmatched polynomials come back whole, uncertified.
    """
    if p.is_zero():
        raise ValueError("cannot factor zero")
    sf = squarefree_part(p)
    if sf.is_constant():
        return []
    out: list = []
    try:
        _split_factors(sf, out)
    except ArithmeticError:
        return [(sf.normalized(), False)]
    out = [(f.normalized(), cert) for f, cert in out]
    prod = MultiPoly.const(p.vars, GR_ONE)
    for f, _ in out:
        prod = prod * f
    if prod.normalized() != sf.normalized():
        return [(sf.normalized(), False)]
    out.sort(key=lambda fc: fc[0].render())
    return out


def evaluate_poly(p: MultiPoly, point: dict) -> complex:
    return p.evaluate(point)


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------


class RatFunc:
    """Quotient of polynomials, normalized: gcd(num, den) = 1 and den has
    positive leading coefficient under lex. Rational content of the
    denominator is preserved (cleared-denominator systems keep the user's
    written form)."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: Optional[MultiPoly] = None, reduce: bool = True):
        if den is None:
            den = MultiPoly.const(num.vars, GR_ONE)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce and not num.is_zero() and not den.is_constant():
            g = gcd_multivariate(num, den)
            if not g.is_constant():
                num = exact_divide(num, g)
                den = exact_divide(den, g)
        if num.is_zero():
            den = MultiPoly.const(num.vars, GR_ONE)
        else:
            e = max(den.terms)
            lc = den.terms[e]
            if lc.is_negative_convention():
                num, den = -num, -den
            if den.is_constant():
                c = den.constant_value()
                if not c.is_one():
                    num = num.scale_div(c)
                    den = MultiPoly.const(num.vars, GR_ONE)
        self.num = num
        self.den = den

    # -- constructors ----------------------------------------------------------

    @staticmethod
    def from_poly(p: MultiPoly) -> "RatFunc":
        return RatFunc(p, None, reduce=False)

    @staticmethod
    def const(vars: VarTable, c) -> "RatFunc":
        return RatFunc(MultiPoly.const(vars, c), None, reduce=False)

    @staticmethod
    def zero(vars: VarTable) -> "RatFunc":
        return RatFunc(MultiPoly.zero(vars), None, reduce=False)

    @staticmethod
    def one(vars: VarTable) -> "RatFunc":
        return RatFunc(MultiPoly.const(vars, GR_ONE), None, reduce=False)

    @property
    def vars(self) -> VarTable:
        return self.num.vars

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num.terms)

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        if self.den == other.den:
            return RatFunc(self.num - other.num, self.den)
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        r = RatFunc.__new__(RatFunc)
        r.num = -self.num
        r.den = self.den
        return r

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    def __hash__(self):
        return hash((self.num, self.den))

    def derivative(self, vidx: int) -> "RatFunc":
        dn = self.num.derivative(vidx)
        if self.den.is_constant():
            return RatFunc(dn, self.den)
        dd = self.den.derivative(vidx)
        return RatFunc(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: dict) -> complex:
        d = self.den.evaluate(point)
        return self.num.evaluate(point) / d

    def subst_polys(self, mapping: dict) -> "RatFunc":
        return RatFunc(self.num.subst_polys(mapping), self.den.subst_polys(mapping))

    def subst_ratfuncs(self, mapping: dict) -> "RatFunc":
        """Substitute variables by rational functions (var index -> RatFunc)."""
        target = None
        for rf in mapping.values():
            target = rf.vars
            break
        if target is None:
            target = self.vars

        def poly_sub(p: MultiPoly) -> "RatFunc":
            acc = RatFunc.zero(target)
            pow_cache: dict = {}

            def power(i, k):
                key = (i, k)
                if key not in pow_cache:
                    rf = mapping[i]
                    pow_cache[key] = RatFunc(rf.num**k, rf.den**k, reduce=False)
                return pow_cache[key]

            for e, c in p.terms.items():
                term = RatFunc.const(target, c)
                for i, k in enumerate(e):
                    if not k:
                        continue
                    if i in mapping:
                        term = term * power(i, k)
                    else:
                        term = term * RatFunc.from_poly(
                            MultiPoly.variable(target, p.vars.names[i], k)
                        )
                acc = acc + term
            return acc

        return poly_sub(self.num) / poly_sub(self.den)

    def embed(self, target: VarTable) -> "RatFunc":
        r = RatFunc.__new__(RatFunc)
        r.num = self.num.embed(target)
        r.den = self.den.embed(target)
        return r

    def render(self) -> str:
        if self.den.is_constant() and self.den.constant_value().is_one():
            return self.num.render()
        ns, ds = self.num.render(), self.den.render()
        if not ns.replace("^", "").isalnum():
            ns = f"({ns})"
        if not ds.replace("^", "").isalnum():
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"RatFunc<{self.render()}>"
