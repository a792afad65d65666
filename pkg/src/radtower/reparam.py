"""Rational reparametrization of radical parametrizations.

The tower variety is parametrized rationally when it falls in a supported
class, and the change of parameters is pushed through the components.
Strategies, in order:

  1. a generator linear in some variable: solve it out and recurse;
  2. conics in Euler form (last variable squared equals a univariate
     quadratic whose leading coefficient is the square of a rational):
     projection from the infinite point, the classical substitution;
  3. monoid hypersurfaces: a point of multiplicity deg-1, parametrized by
     the pencil of lines through it;
  4. a variable of degree 2 whose discriminant is an exact polynomial
     square: solved rationally, graph parametrization.

Every produced map is verified exactly: it annihilates the defining
equations, and both compositions with the attached inverse reduce to the
identity (modulo the ideal on the variety side).

When no strategy applies, the decision falls back to the tracing index
and, for plane tower curves, a naive genus with a validity flag: the
"not rational" verdict is only emitted with index 1 and a valid positive
genus.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence

from .gaussian import GaussianRational, fraction_sqrt
from .groebner import Ideal, MonomialOrder, buchberger, quotient_dimension
from .poly import (
    MultiPoly,
    RatFunc,
    VarTable,
    light_factor,
    poly_sqrt,
    squarefree_part,
)


class ReparamError(RuntimeError):
    pass


class Hypersurface:
    """A squarefree defining polynomial with its ambient variable order."""

    def __init__(self, F: MultiPoly, ambient: Sequence[str]):
        if F.is_zero():
            raise ValueError("zero defining polynomial")
        self.ambient = list(ambient)
        self.F = squarefree_part(F)

    def degree(self) -> int:
        return self.F.total_degree()


class RationalMap:
    """Tuple of rational functions in fresh parameters, with an inverse."""

    def __init__(self, components: List[RatFunc], params: List[str],
                 inverse: Optional[List[RatFunc]] = None, birational: bool = False):
        self.components = components
        self.params = params
        self.inverse = inverse
        self.birational = birational

    def rendered(self) -> dict:
        out = {
            "params": self.params,
            "components": [rf.render() for rf in self.components],
            "birational": self.birational,
        }
        if self.inverse is not None:
            out["inverse"] = [rf.render() for rf in self.inverse]
        return out


class ReparamOutcome:
    """Reparametrized(map, new parametrization) / NotRational / NoAnswer."""

    def __init__(self, kind: str, mapping: Optional[RationalMap] = None,
                 new_components: Optional[List[RatFunc]] = None,
                 reason: str = "", evidence: Optional[dict] = None):
        self.kind = kind  # "reparametrized" | "not_rational" | "no_answer"
        self.mapping = mapping
        self.new_components = new_components
        self.reason = reason
        self.evidence = evidence or {}

    def rendered(self) -> dict:
        out = {"outcome": self.kind}
        if self.mapping is not None:
            out["change_of_parameters"] = self.mapping.rendered()
        if self.new_components is not None:
            out["parametrization"] = [rf.render() for rf in self.new_components]
        if self.reason:
            out["reason"] = self.reason
        if self.evidence:
            out["evidence"] = self.evidence
        return out


def _param_names(k: int) -> List[str]:
    if k == 1:
        return ["u"]
    return [f"h{i+1}" for i in range(k)]


def _shift_poly(F: MultiPoly, point) -> MultiPoly:
    """F(v + p) as a polynomial in v (Taylor shift)."""
    table = F.vars
    mapping = {}
    for i, nm in enumerate(table.names):
        mapping[i] = MultiPoly.variable(table, nm) + MultiPoly.const(table, point[i])
    return F.subst_polys(mapping)


def multiplicity_at(F: MultiPoly, point) -> int:
    """Vanishing order of F at an exact point (0 when F(p) != 0)."""
    shifted = _shift_poly(F, point)
    if shifted.is_zero():
        raise ValueError("zero polynomial")
    degs = [sum(e) for e in shifted.terms]
    low = min(degs)
    return low


def lowest_form(F: MultiPoly, point) -> MultiPoly:
    shifted = _shift_poly(F, point)
    low = min(sum(e) for e in shifted.terms)
    return MultiPoly(F.vars, {e: c for e, c in shifted.terms.items() if sum(e) == low})


# ---------------------------------------------------------------------------
# rational point extraction from zero-dimensional systems
# ---------------------------------------------------------------------------


def _rational_roots(coeffs: List[GaussianRational], height: int) -> List[Fraction]:
    """Rational roots of a univariate polynomial given by coefficient list."""
    from math import gcd as _gcd

    # a rational root must kill the real and the imaginary part separately
    polys = []
    for part in ("re", "im"):
        cs = [getattr(c, part) for c in coeffs]
        if any(cs):
            polys.append(cs)
    if not polys:
        return []
    work = list(polys[0])
    while work and not work[-1]:
        work.pop()
    candidates = set()
    if work and not work[0]:
        candidates.add(Fraction(0))
        while work and not work[0]:
            work.pop(0)
    if len(work) > 1:
        den_l = 1
        for c in work:
            den_l = den_l * c.denominator // _gcd(den_l, c.denominator)
        ics = [int(c * den_l) for c in work]
        a0, ad = abs(ics[0]), abs(ics[-1])
        # only divisors within the height bound can appear in a kept root
        ps = [p for p in range(1, min(a0, height) + 1) if a0 % p == 0]
        qs = [q for q in range(1, min(ad, height) + 1) if ad % q == 0]
        for p in ps:
            for q in qs:
                for sgn in (1, -1):
                    cand = Fraction(sgn * p, q)
                    if abs(cand.numerator) <= height and cand.denominator <= height:
                        candidates.add(cand)
    out = []
    for cand in sorted(candidates):
        ok = True
        for cs2 in polys:
            val = Fraction(0)
            for k in reversed(range(len(cs2))):
                val = val * cand + cs2[k]
            if val:
                ok = False
                break
        if ok:
            out.append(cand)
    return out


def solve_rational_points(gens: List[MultiPoly], height: int = 20) -> List[tuple]:
    """Rational solutions (height-bounded) of a zero-dimensional system."""
    if not gens:
        return []
    table = gens[0].vars
    n = len(table)
    order = MonomialOrder.lex(table)
    gb = buchberger(list(gens), order)
    if not gb:
        return []
    if any(g.is_constant() for g in gb):
        return []

    def recurse(basis: List[MultiPoly], pos: int, partial: dict) -> List[tuple]:
        if pos < 0:
            point = tuple(partial[i] for i in range(n))
            if all(
                not g.evaluate_exact({i: GaussianRational(partial[i]) for i in range(n)})
                for g in gens
            ):
                return [point]
            return []
        # univariate polynomial in variable pos after substituting the tail
        uni = None
        for g in basis:
            sub = {}
            for i in range(pos + 1, n):
                sub[i] = MultiPoly.const(table, GaussianRational(partial[i]))
            h = g.subst_polys(sub) if sub else g
            if h.is_zero():
                continue
            if all(all(e[i] == 0 for i in range(n) if i != pos) for e in h.terms):
                if h.degree(pos) > 0:
                    uni = h
                    break
        if uni is None:
            return []
        coeffs = [GaussianRational(0)] * (uni.degree(pos) + 1)
        for e, c in uni.terms.items():
            coeffs[e[pos]] = coeffs[e[pos]] + c
        out = []
        for root in _rational_roots(coeffs, height):
            np = dict(partial)
            np[pos] = root
            out.extend(recurse(basis, pos - 1, np))
        return out

    # variables are solved from the lex-last one upwards
    return recurse(gb, n - 1, {})


# ---------------------------------------------------------------------------
# multiple points and the monoid parametrization
# ---------------------------------------------------------------------------


def find_multiple_point(H: Hypersurface):
    """A point of multiplicity deg-1, or None.

    Tries the origin, the signed coordinate points, rational solutions of
    the singular system (height <= 20), and for quadrics a small-height
    sweep solving one variable at a time.
    """
    F = H.F
    table = F.vars
    k1 = len(H.ambient)
    d = F.total_degree()
    if d < 2:
        return None
    candidates = []
    zero = tuple(GaussianRational(0) for _ in range(k1))
    candidates.append(zero)
    for i in range(k1):
        for sgn in (1, -1):
            p = [GaussianRational(0)] * k1
            p[i] = GaussianRational(sgn)
            candidates.append(tuple(p))
    for p in candidates:
        shifted_mult = multiplicity_at(F, p)
        if shifted_mult == d - 1:
            return p, d - 1
    sing = [F] + [F.derivative(i) for i in range(k1)]
    for sol in solve_rational_points(sing, height=20):
        p = tuple(GaussianRational(c) for c in sol)
        if multiplicity_at(F, p) == d - 1:
            return p, d - 1
    if d == 2:
        # quadric: any point will do; sweep small rational values
        small = [Fraction(0), Fraction(1), Fraction(-1), Fraction(2), Fraction(-2),
                 Fraction(1, 2), Fraction(-1, 2), Fraction(3), Fraction(-3)]
        for v in range(k1):
            up = {}
            for e, c in F.terms.items():
                up.setdefault(e[v], []).append((e, c))
            if F.degree(v) != 2:
                continue
            import itertools

            others = [i for i in range(k1) if i != v]
            for combo in itertools.product(small, repeat=len(others)):
                env = {others[j]: GaussianRational(combo[j]) for j in range(len(others))}
                coeffs = [GaussianRational(0)] * 3
                for e, c in F.terms.items():
                    val = c
                    for i in others:
                        if e[i]:
                            b = env[i]
                            for _ in range(e[i]):
                                val = val * b
                    coeffs[e[v]] = coeffs[e[v]] + val
                a, b, c0 = coeffs[2], coeffs[1], coeffs[0]
                if not a:
                    continue
                disc = b * b - GaussianRational(4) * a * c0
                from .gaussian import gaussian_sqrt

                s = gaussian_sqrt(disc)
                if s is None or not s.is_rational() or not b.is_rational():
                    continue
                root = (s - b) / (GaussianRational(2) * a)
                if not root.is_rational():
                    continue
                p = [None] * k1
                for j, i in enumerate(others):
                    p[i] = GaussianRational(combo[j])
                p[v] = root
                p = tuple(p)
                if multiplicity_at(F, p) == 1 == d - 1:
                    return p, 1
    return None


def ratparam_monoid(H: Hypersurface, point, mult: Optional[int] = None) -> RationalMap:
    """Parametrize a monoid hypersurface by lines through its multiple point."""
    F = H.F
    table = F.vars
    k1 = len(H.ambient)
    d = F.total_degree()
    if mult is None:
        mult = multiplicity_at(F, point)
    if mult != d - 1:
        raise ReparamError("point is not a (deg-1)-fold point")
    params = _param_names(k1 - 1)
    last_error = None
    for chart in reversed(range(k1)):
        try:
            return _monoid_chart(H, point, chart, params)
        except ReparamError as exc:
            last_error = exc
            continue
    raise ReparamError(f"no line chart worked: {last_error}")


def _monoid_chart(H: Hypersurface, point, chart: int, params: List[str]) -> RationalMap:
    F = H.F
    k1 = len(H.ambient)
    d = F.total_degree()
    hnames = list(params)
    # substitution table carries the line parameter u and the directions
    ext = VarTable(tuple(hnames) + ("u_line",), tuple(["Aux"] * (len(hnames) + 1)))
    u = MultiPoly.variable(ext, "u_line")
    mapping = {}
    hpos = 0
    for i in range(k1):
        base = MultiPoly.const(ext, point[i])
        if i == chart:
            mapping[i] = base + u
        else:
            mapping[i] = base + u * MultiPoly.variable(ext, hnames[hpos])
            hpos += 1
    sub = F.subst_polys(mapping)
    # collect by powers of the line parameter
    ui = ext.index("u_line")
    bydeg: dict = {}
    for e, c in sub.terms.items():
        ne = list(e)
        k = ne[ui]
        ne[ui] = 0
        bydeg.setdefault(k, {})[tuple(ne)] = c
    if any(k < d - 1 for k in bydeg):
        raise ReparamError("unexpected low-order terms along the lines")
    A = MultiPoly(ext, bydeg.get(d - 1, {}))
    B = MultiPoly(ext, bydeg.get(d, {}))
    if A.is_zero() or B.is_zero():
        raise ReparamError("degenerate line pencil in this chart")
    htable = VarTable(tuple(hnames), tuple(["Aux"] * len(hnames)))
    A = A.embed(htable)
    B = B.embed(htable)
    ustar = RatFunc(-A, B)
    comps = []
    hpos = 0
    for i in range(k1):
        base = RatFunc.const(htable, point[i])
        if i == chart:
            comps.append(base + ustar)
        else:
            hv = RatFunc.from_poly(MultiPoly.variable(htable, hnames[hpos]))
            comps.append(base + ustar * hv)
            hpos += 1
    _verify_on_hypersurface(F, H.ambient, comps)
    # inverse: directions recovered by projection from the point
    amb_table = F.vars
    inverse = []
    chart_num = MultiPoly.variable(amb_table, H.ambient[chart]) - MultiPoly.const(
        amb_table, point[chart]
    )
    for i in range(k1):
        if i == chart:
            continue
        num = MultiPoly.variable(amb_table, H.ambient[i]) - MultiPoly.const(
            amb_table, point[i]
        )
        inverse.append(RatFunc(num, chart_num))
    rmap = RationalMap(comps, hnames, inverse, birational=False)
    _verify_birational(rmap, [F], H.ambient, amb_table)
    return rmap


def _verify_on_hypersurface(F: MultiPoly, ambient, comps):
    table = F.vars
    mapping = {table.index(nm): comps[i] for i, nm in enumerate(ambient)}
    val = RatFunc.from_poly(F).subst_ratfuncs(mapping)
    if not val.num.is_zero():
        raise ReparamError("candidate map does not satisfy the defining equation")


def _verify_birational(rmap: RationalMap, gens, ambient, amb_table):
    """Exact two-sided composition check; sets the birational flag."""
    htable = rmap.components[0].vars
    # inverse(components) must be the identity in the parameters
    mapping = {amb_table.index(nm): rmap.components[i] for i, nm in enumerate(ambient)}
    for j, inv in enumerate(rmap.inverse):
        back = inv.subst_ratfuncs(mapping)
        expect = RatFunc.from_poly(MultiPoly.variable(htable, rmap.params[j]))
        if back != expect:
            raise ReparamError("inverse composition is not the identity")
    # components(inverse) must be the identity modulo the ideal
    ideal = Ideal(list(gens), MonomialOrder.lex(amb_table)) if gens else None
    hmap = {htable.index(p): rmap.inverse[j] for j, p in enumerate(rmap.params)}
    for i, nm in enumerate(ambient):
        forward = rmap.components[i].subst_ratfuncs(hmap)
        diff_num = forward.num - forward.den * MultiPoly.variable(amb_table, nm)
        if ideal is None:
            if not diff_num.is_zero():
                raise ReparamError("forward composition is not the identity")
        elif not ideal.contains(diff_num):
            raise ReparamError("forward composition is not the identity on the variety")
    rmap.birational = True


# ---------------------------------------------------------------------------
# Euler-form conics and rationally solvable quadratics
# ---------------------------------------------------------------------------


def _euler_conic(F: MultiPoly, ambient) -> Optional[RationalMap]:
    """Conic v2^2 = a*v1^2 + b*v1 + c with sqrt(a) rational: projection
    from the infinite point, the classical substitution u = v2 - sqrt(a) v1."""
    if len(ambient) != 2:
        return None
    table = F.vars
    i1, i2 = table.index(ambient[0]), table.index(ambient[1])
    if F.degree(i2) != 2 or F.degree(i1) > 2:
        return None
    coeff2 = {}
    rest = {}
    for e, c in F.terms.items():
        if e[i2] == 2 and sum(e) == 2 and e[i1] == 0:
            coeff2[e] = c
        elif e[i2] == 0:
            rest[e] = c
        else:
            return None
    if len(coeff2) != 1:
        return None
    k2 = list(coeff2.values())[0]
    # v2^2 = -(rest)/k2 = a v1^2 + b v1 + c
    q = MultiPoly(table, rest).scale_div(-k2)
    a = GaussianRational(0)
    b = GaussianRational(0)
    c = GaussianRational(0)
    for e, cc in q.terms.items():
        if e[i1] == 2:
            a = cc
        elif e[i1] == 1:
            b = cc
        elif e[i1] == 0:
            c = cc
        else:
            return None
    if not a or not a.is_rational():
        return None
    ra = fraction_sqrt(a.re)
    if ra is None or ra == 0:
        return None
    sa = GaussianRational(ra)
    params = _param_names(1)
    htable = VarTable(tuple(params), ("Aux",))
    uvar = MultiPoly.variable(htable, params[0])
    two_sa = MultiPoly.const(htable, sa + sa)
    bb = MultiPoly.const(htable, b)
    den = two_sa * uvar - bb
    if den.is_zero():
        return None
    cnum = MultiPoly.const(htable, c) - uvar * uvar
    t_comp = RatFunc(cnum, den)
    d_num = (
        MultiPoly.const(htable, sa) * uvar * uvar
        - bb * uvar
        + MultiPoly.const(htable, sa * c)
    )
    d_comp = RatFunc(d_num, den)
    comps = [t_comp, d_comp]
    _verify_on_hypersurface(F, ambient, comps)
    inverse = [
        RatFunc.from_poly(
            MultiPoly.variable(table, ambient[1])
            - MultiPoly.variable(table, ambient[0]).scale(sa)
        )
    ]
    rmap = RationalMap(comps, params, inverse, birational=False)
    _verify_birational(rmap, [F], ambient, table)
    return rmap


def _quadratic_solve(F: MultiPoly, ambient) -> Optional[RationalMap]:
    """A variable of degree 2 with exact-square discriminant: solve it."""
    table = F.vars
    for pos in reversed(range(len(ambient))):
        v = table.index(ambient[pos])
        if F.degree(v) != 2:
            continue
        a = MultiPoly.zero(table)
        b = MultiPoly.zero(table)
        c = MultiPoly.zero(table)
        ok = True
        for e, cc in F.terms.items():
            ne = list(e)
            k = ne[v]
            ne[v] = 0
            mono = MultiPoly.monomial(table, tuple(ne), cc)
            if k == 2:
                a = a + mono
            elif k == 1:
                b = b + mono
            elif k == 0:
                c = c + mono
            else:
                ok = False
                break
        if not ok:
            continue
        disc = b * b - a * c.scale(GaussianRational(4))
        s = poly_sqrt(disc)
        if s is None:
            continue
        others = [nm for j, nm in enumerate(ambient) if j != pos]
        params = _param_names(len(others))
        htable = VarTable(tuple(params), tuple(["Aux"] * len(params)))
        ren = {table.index(nm): MultiPoly.variable(htable, params[j]) for j, nm in enumerate(others)}
        for sign in (1, -1):
            num = (s.scale(GaussianRational(sign)) - b).subst_polys(ren)
            den = a.scale(GaussianRational(2)).subst_polys(ren)
            if den.is_zero():
                continue
            vexpr = RatFunc(num, den)
            comps = []
            hpos = 0
            for j, nm in enumerate(ambient):
                if j == pos:
                    comps.append(vexpr)
                else:
                    comps.append(RatFunc.from_poly(MultiPoly.variable(htable, params[hpos])))
                    hpos += 1
            try:
                _verify_on_hypersurface(F, ambient, comps)
            except ReparamError:
                continue
            inverse = [
                RatFunc.from_poly(MultiPoly.variable(table, nm)) for nm in others
            ]
            rmap = RationalMap(comps, params, inverse, birational=False)
            try:
                _verify_birational(rmap, [F], ambient, table)
            except ReparamError:
                continue
            return rmap
    return None


# ---------------------------------------------------------------------------
# the recursive driver
# ---------------------------------------------------------------------------


def ratparam(gens: List[MultiPoly], ambient: List[str], table: VarTable) -> Optional[RationalMap]:
    """Birational parametrization of V(gens), or None if unsupported."""
    # work on a table that is exactly the ambient variables
    classes = [table.classes[table.index(nm)] for nm in ambient]
    small = VarTable(ambient, classes)
    gens = [g.embed(small) for g in gens if not g.is_zero()]
    table = small
    if not gens:
        params = _param_names(len(ambient))
        htable = VarTable(tuple(params), tuple(["Aux"] * len(params)))
        comps = [RatFunc.from_poly(MultiPoly.variable(htable, p)) for p in params]
        inverse = [RatFunc.from_poly(MultiPoly.variable(table, nm)) for nm in ambient]
        return RationalMap(comps, params, inverse, birational=True)

    # strategy 1: a generator linear in some variable (constant coeff first)
    best = None
    for want_const in (True, False):
        for g in gens:
            for pos, nm in enumerate(ambient):
                v = table.index(nm)
                if g.degree(v) != 1:
                    continue
                coeff_terms = {}
                rest_terms = {}
                for e, c in g.terms.items():
                    if e[v]:
                        ne = list(e)
                        ne[v] = 0
                        coeff_terms[tuple(ne)] = c
                    else:
                        rest_terms[e] = c
                coeff = MultiPoly(table, coeff_terms)
                if want_const and not coeff.is_constant():
                    continue
                best = (g, pos, coeff, MultiPoly(table, rest_terms))
                break
            if best:
                break
        if best:
            break
    if best is not None:
        g, pos, coeff, rest = best
        nm = ambient[pos]
        v = table.index(nm)
        vexpr = RatFunc(-rest, coeff)
        sub_ambient = [a for a in ambient if a != nm]
        submap_gens = []
        mapping = {v: vexpr}
        for other in gens:
            if other is g:
                continue
            rf = RatFunc.from_poly(other).subst_ratfuncs(mapping)
            if not rf.num.is_zero():
                submap_gens.append(rf.num)
        sub = ratparam(submap_gens, sub_ambient, table)
        if sub is None:
            return None
        htable = sub.components[0].vars
        comp_map = {
            table.index(a): sub.components[j] for j, a in enumerate(sub_ambient)
        }
        vcomp = vexpr.subst_ratfuncs(comp_map)
        comps = []
        sidx = 0
        for a in ambient:
            if a == nm:
                comps.append(vcomp)
            else:
                comps.append(sub.components[sidx])
                sidx += 1
        inverse = [rf.embed(table) for rf in sub.inverse]
        rmap = RationalMap(comps, sub.params, inverse, birational=False)
        try:
            for gg in gens:
                _verify_on_hypersurface(gg, ambient, rmap.components)
            _verify_birational(rmap, gens, ambient, table)
        except ReparamError:
            return None
        return rmap

    if len(gens) > 1:
        return None
    F = gens[0]
    euler = _euler_conic(F, ambient)
    if euler is not None:
        return euler
    H = Hypersurface(F.embed(table), ambient)
    found = find_multiple_point(H)
    if found is not None:
        point, mult = found
        try:
            return ratparam_monoid(H, point, mult)
        except ReparamError:
            pass
    quad = _quadratic_solve(F, ambient)
    if quad is not None:
        return quad
    return None


# ---------------------------------------------------------------------------
# naive plane-curve genus
# ---------------------------------------------------------------------------


def plane_curve_genus_naive(F: MultiPoly, ambient: Sequence[str]):
    """(genus, valid) for a plane curve; valid only when the singular locus
    is fully rational, ordinary, and completely accounted for."""
    table = F.vars
    if len(ambient) != 2:
        return 0, False
    x, y = (table.index(nm) for nm in ambient)
    F = squarefree_part(F)
    d = F.total_degree()
    if d <= 2:
        return 0, True
    sing = [F, F.derivative(x), F.derivative(y)]
    order = MonomialOrder.lex(table)
    ideal = Ideal(sing, order)
    q_aff = quotient_dimension(ideal, [table.names[x], table.names[y]])
    if q_aff is None:
        return 0, False
    points = solve_rational_points(sing, height=100)
    deduction = 0
    count_found = 0
    ordinary = True
    for sol in points:
        p = [GaussianRational(0)] * len(table)
        p[x] = GaussianRational(sol[x])
        p[y] = GaussianRational(sol[y])
        mq = multiplicity_at(F, p)
        if mq < 2:
            continue
        count_found += 1
        form = lowest_form(F, p)
        sf = squarefree_part(form)
        if (form.normalized() != sf.normalized()):
            ordinary = False
        deduction += mq * (mq - 1) // 2
    # points at infinity: inspect the leading form
    lead = MultiPoly(table, {e: c for e, c in F.terms.items() if sum(e) == d})
    inf_sing = 0
    inf_found = 0
    for f, cert in light_factor(lead):
        if f.total_degree() != 1:
            # a potential irrational point at infinity; check singularity there
            # conservatively by the homogeneous criterion below
            continue
    q_inf, inf_found, inf_deduction, inf_ordinary = _infinity_singularities(F, x, y, d)
    if q_inf is None:
        return 0, False
    deduction += inf_deduction
    if not (ordinary and inf_ordinary):
        return (d - 1) * (d - 2) // 2 - deduction, False
    if q_aff != count_found or q_inf != inf_found:
        return (d - 1) * (d - 2) // 2 - deduction, False
    return (d - 1) * (d - 2) // 2 - deduction, True


def _infinity_singularities(F: MultiPoly, x: int, y: int, d: int):
    """Quotient length, found-rational count, genus deduction, ordinariness
    of the singular scheme on the line at infinity."""
    table = F.vars
    # homogenize with w, working in the chart y = 1 plus the point (1:0:0)
    wt = VarTable(("xx", "ww"), ("Aux", "Aux"))
    # chart y = 1: substitute x -> xx, and each monomial scaled by w^(d-deg)
    def chart_poly(swap: bool) -> MultiPoly:
        t = {}
        for e, c in F.terms.items():
            ex, ey = e[x], e[y]
            if swap:
                ex, ey = ey, ex
            key = (ex, d - ex - ey)
            t[key] = t.get(key, GaussianRational(0)) + c
        return MultiPoly(wt, {k: v for k, v in t.items() if v})

    total_q = 0
    total_found = 0
    total_deduction = 0
    ordinary = True
    for swap in (False, True):
        Fh = chart_poly(swap)
        xx, ww = wt.index("xx"), wt.index("ww")
        fx = Fh.derivative(xx)
        fw = Fh.derivative(ww)
        # euler relation gives the third partial
        sing = [Fh, fx, fw, MultiPoly.variable(wt, "ww")]
        if swap:
            # only the point x=0 in this chart (i.e. (1:0:0)) is new
            sing.append(MultiPoly.variable(wt, "xx"))
        ideal = Ideal(sing, MonomialOrder.lex(wt))
        q = quotient_dimension(ideal, ["xx", "ww"])
        if q is None:
            return None, 0, 0, False
        total_q += q
        for sol in solve_rational_points(sing, height=100):
            p = (GaussianRational(sol[0]), GaussianRational(sol[1]))
            mq = multiplicity_at(Fh, p)
            if mq < 2:
                continue
            total_found += 1
            form = lowest_form(Fh, p)
            if form.normalized() != squarefree_part(form).normalized():
                ordinary = False
            total_deduction += mq * (mq - 1) // 2
    return total_q, total_found, total_deduction, ordinary


# ---------------------------------------------------------------------------
# the reparametrization algorithm
# ---------------------------------------------------------------------------


def reparametrize(P, report, seed: int = 0, step_budget: int = 200_000) -> ReparamOutcome:
    """Tower-variety route: parametrize it rationally if possible and push
    the change of parameters through the components; otherwise decide via
    the tracing index and (for plane tower curves) the naive genus."""
    from .tracing import Inconclusive, TracingError, tracing_index

    sys = report.system
    tower = P.ctx.tower
    ambient = list(tower.param_names) + [lv.name for lv in tower.levels]
    vt = report.generators_tower

    if tower.m == 0:
        params = _param_names(tower.n)
        htable = VarTable(tuple(params), tuple(["Aux"] * len(params)))
        comps = [RatFunc.from_poly(MultiPoly.variable(htable, p)) for p in params]
        rmap = RationalMap(comps, params, comps, birational=True)
        new_comps = [
            _component_substitution(P, c, rmap, ambient) for c in P.components
        ]
        return ReparamOutcome("reparametrized", rmap, new_comps)

    rmap = ratparam([g for g in vt], ambient, sys.table)
    if rmap is not None:
        _check_tower_substitution(P, rmap, ambient)
        new_comps = [_component_substitution(P, c, rmap, ambient) for c in P.components]
        _check_variety_annihilated(report, new_comps, sys)
        return ReparamOutcome("reparametrized", rmap, new_comps)

    try:
        cert = tracing_index(P, report, seed=seed, step_budget=step_budget)
    except (TracingError, Inconclusive) as exc:
        return ReparamOutcome(
            "no_answer", reason=f"tower variety in no supported class; tracing failed: {exc}"
        )
    if cert.index != 1:
        return ReparamOutcome(
            "no_answer",
            reason="tower variety in no supported class and tracing index != 1",
            evidence={"tracing_index": cert.index},
        )
    if len(ambient) == 2 and len(vt) == 1:
        genus, valid = plane_curve_genus_naive(vt[0], ambient)
        if valid and genus >= 1:
            return ReparamOutcome(
                "not_rational",
                reason="tracing index 1 and tower curve of positive genus",
                evidence={"tracing_index": 1, "genus": genus, "genus_valid": True},
            )
        return ReparamOutcome(
            "no_answer",
            reason="genus certificate not valid or zero",
            evidence={"tracing_index": 1, "genus": genus, "genus_valid": valid},
        )
    return ReparamOutcome(
        "no_answer",
        reason="tower variety not a plane curve; no parametrization strategy applied",
        evidence={"tracing_index": cert.index},
    )


def _ambient_mapping(P, rmap: RationalMap, ambient):
    tower = P.ctx.tower
    joint = tower.joint
    return {joint.index(nm): rmap.components[k] for k, nm in enumerate(ambient)}


def _check_tower_substitution(P, rmap: RationalMap, ambient):
    """Each root coordinate must satisfy its tower relation exactly."""
    tower = P.ctx.tower
    mapping = _ambient_mapping(P, rmap, ambient)
    for i, lv in enumerate(tower.levels):
        dcomp = rmap.components[tower.n + i]
        alpha = RatFunc(lv.radicand.num, lv.radicand.den, reduce=False).subst_ratfuncs(
            mapping
        )
        power = RatFunc(dcomp.num ** lv.exponent, dcomp.den ** lv.exponent, reduce=False)
        if (power - alpha).num.is_zero():
            continue
        raise ReparamError(
            f"substituted coordinates violate the relation of {lv.name}"
        )


def _component_substitution(P, comp, rmap: RationalMap, ambient) -> RatFunc:
    num, den = comp.joint_fraction()
    mapping = _ambient_mapping(P, rmap, ambient)
    out = RatFunc(num, den, reduce=False).subst_ratfuncs(mapping)
    return out


def _check_variety_annihilated(report, new_comps, sys):
    table = sys.table
    mapping = {table.index(nm): new_comps[j] for j, nm in enumerate(sys.x_names)}
    for g in report.generators_variety:
        val = RatFunc.from_poly(g).subst_ratfuncs(mapping)
        if not val.num.is_zero():
            raise ReparamError(
                "reparametrized components do not satisfy the implicit equations"
            )
