"""Tracing index: the generic number of incidence-variety points over a
point of the radical variety.

Two methods, per the source constructions:

* generic fiber: adjoin generic-point coordinates a_1..a_r constrained to
  the radical variety, compute a lex basis with the generic coordinates
  highest, and read the fiber off when the basis is triangular and linear
  in every parameter and root variable.  Succeeding certifies index 1 and
  yields the inverse map by back-substitution.

* specialization count: specialize the parameters to a random rational
  point, duplicate the root variables for the specialized copy, count the
  solutions of the combined zero-dimensional system, and divide by the
  number of root-conjugate images that land on the radical variety.  The
  division is exact because the generic fiber cardinality is constant on a
  dense open subset; all conjugate images are assumed generic in that
  sense (documented assumption).  Three independent specializations must
  agree, and every variable's minimal polynomial in the quotient must be
  square-free (otherwise the sample is rejected).
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence

from .gaussian import GR_ONE, GaussianRational
from .groebner import Ideal, MonomialOrder, buchberger, minimal_polynomial
from .poly import MultiPoly, RatFunc, VarTable, gcd_multivariate
from .varieties import IncidenceSystem, sample_witnesses


class TracingError(RuntimeError):
    pass


class Inconclusive(Exception):
    """Generic-fiber basis lacked the triangular linear shape."""


class TracingCertificate:
    def __init__(self, index: int, method: str, inverse_map=None, samples=None):
        self.index = index
        self.method = method
        self.inverse_map = inverse_map  # list of RatFunc in the image coordinates
        self.samples = samples or []

    def rendered(self) -> dict:
        out = {
            "index": self.index,
            "method": self.method,
            "samples": self.samples,
        }
        if self.inverse_map is not None:
            out["inverse_map"] = [rf.render() for rf in self.inverse_map]
        return out


# ---------------------------------------------------------------------------
# generic-fiber method
# ---------------------------------------------------------------------------


def tracing_index_generic(
    bp_gens: Sequence[MultiPoly],
    vp_gens: Sequence[MultiPoly],
    sys: IncidenceSystem,
    step_budget: int = 200_000,
    validate_witnesses: int = 10,
    seed: int = 0,
    tol: float = 1e-6,
) -> TracingCertificate:
    """Index-1 certificate with the inverse map, or raise Inconclusive."""
    table = sys.table
    r = len(sys.x_names)
    a_names = [f"a{j+1}" for j in range(r)]
    ext = VarTable(
        tuple(a_names) + table.names,
        tuple(["S"] * r) + table.classes,
    )
    ai = [ext.index(nm) for nm in a_names]
    xi = [ext.index(nm) for nm in sys.x_names]
    ti = [ext.index(nm) for nm in sys.param_names]
    di = [ext.index(nm) for nm in reversed(sys.delta_names)]
    zi = [ext.index("z")]
    order = MonomialOrder.block(ext, [ai, xi, ti, di, zi])

    x_to_a = {
        table.index(nm): MultiPoly.variable(ext, a_names[j])
        for j, nm in enumerate(sys.x_names)
    }
    gens = []
    for g in vp_gens:
        gens.append(g.subst_polys(x_to_a))
    for j, nm in enumerate(sys.x_names):
        gens.append(
            MultiPoly.variable(ext, nm) - MultiPoly.variable(ext, a_names[j])
        )
    for g in bp_gens:
        gens.append(g.embed(ext))
    gb = buchberger(gens, order, step_budget)

    vp_a = [g.subst_polys(x_to_a) for g in vp_gens]
    vp_ideal = Ideal(vp_a, order, step_budget) if vp_a else None

    fiber_names = list(sys.param_names) + list(sys.delta_names)
    fiber_idx = {ext.index(nm): nm for nm in fiber_names}
    allowed_base = set(ai)
    # on the fiber the image coordinates equal the generic point: X_j = a_j
    solved: dict = {
        ext.index(nm): RatFunc.from_poly(MultiPoly.variable(ext, a_names[j]))
        for j, nm in enumerate(sys.x_names)
    }

    def vanishes_on_variety(num: MultiPoly) -> bool:
        if vp_ideal is None:
            return num.is_zero()
        return vp_ideal.contains(num)

    r_solved0 = len(solved)
    progress = True
    while progress and len(solved) < len(fiber_names) + r_solved0:
        progress = False
        for g in gb:
            for v in list(fiber_idx):
                if v in solved:
                    continue
                if g.degree(v) != 1:
                    continue
                active = set(g.active_vars())
                if not active <= (allowed_base | set(solved) | {v}):
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
                coeff = MultiPoly(ext, coeff_terms)
                rest = MultiPoly(ext, rest_terms)
                mapping = {k: rf for k, rf in solved.items()}
                coeff_rf = (
                    RatFunc.from_poly(coeff).subst_ratfuncs(mapping)
                    if mapping
                    else RatFunc.from_poly(coeff)
                )
                if vanishes_on_variety(coeff_rf.num):
                    continue
                rest_rf = (
                    RatFunc.from_poly(rest).subst_ratfuncs(mapping)
                    if mapping
                    else RatFunc.from_poly(rest)
                )
                solved[v] = RatFunc.zero(ext) - rest_rf / coeff_rf
                progress = True
        if not progress:
            break
    if len(solved) < len(fiber_names) + r_solved0:
        raise Inconclusive("no triangular linear elements for some fiber variables")

    # rename generic-point coordinates back to the image coordinates
    a_to_x = {
        ext.index(a_names[j]): MultiPoly.variable(table, sys.x_names[j])
        for j in range(r)
    }
    inverse = []
    for nm in fiber_names:
        rf = solved[ext.index(nm)]
        inverse.append(
            RatFunc(rf.num.subst_polys(a_to_x), rf.den.subst_polys(a_to_x))
        )

    # certificate validation on fresh incidence witnesses
    witnesses = sample_witnesses(sys, validate_witnesses, seed, salt=4242)
    sample_data = []
    for tv, dv, xs in witnesses:
        env = {table.index(nm): xs[j] for j, nm in enumerate(sys.x_names)}
        coords = list(tv) + list(dv)
        for k, rf in enumerate(inverse):
            val = rf.evaluate(env)
            err = abs(val - coords[k]) / max(1.0, abs(coords[k]))
            if err > tol:
                raise TracingError(
                    f"inverse map fails witness validation (err {err:.2e})"
                )
        sample_data.append({"point": [(v.real, v.imag) for v in xs]})
    return TracingCertificate(1, "generic_fiber", inverse, sample_data)


# ---------------------------------------------------------------------------
# specialization-count method
# ---------------------------------------------------------------------------


def _conjugate_images(sys: IncidenceSystem, svals) -> Optional[list]:
    """All root-conjugate (deltas, xs) at the specialized parameters, or
    None when the point is too close to the discriminant set."""
    tower = sys.parametrization.ctx.tower
    stack = [[]]
    for i, lv in enumerate(tower.levels):
        new = []
        for dv in stack:
            a, ok = sys.parametrization.ctx._eval_radicand(i, svals, dv)
            if not ok or abs(a) < 1e-4:
                return None
            roots = sys.parametrization.ctx._roots(a, lv.exponent)
            for rt in roots:
                new.append(dv + [rt])
        stack = new
    out = []
    for dv in stack:
        point = {}
        for k, nm in enumerate(sys.param_names):
            point[sys.table.index(nm)] = svals[k]
        for k, nm in enumerate(sys.delta_names):
            point[sys.table.index(nm)] = dv[k]
        point[sys.table.index("z")] = 0j
        xs = []
        ok = True
        for num, den in sys.component_fractions:
            dval = den.evaluate(point)
            if abs(dval) < 1e-4 * max(1.0, den.eval_scale(point)):
                ok = False
                break
            xs.append(num.evaluate(point) / dval)
        if not ok:
            return None
        out.append((dv, xs))
    return out


def _univar_squarefree(coeffs: List[GaussianRational]) -> bool:
    table = VarTable(["u_"], ["Aux"])
    p = MultiPoly.zero(table)
    for k, c in enumerate(coeffs):
        if c:
            p = p + MultiPoly.monomial(table, (k,), c)
    if p.total_degree() <= 1:
        return True
    g = gcd_multivariate(p, p.derivative(0))
    return g.is_constant()


def tracing_index_specialized(
    P,
    bp_gens: Sequence[MultiPoly],
    vp_gens: Sequence[MultiPoly],
    sys: IncidenceSystem,
    seed: int = 0,
    step_budget: int = 200_000,
    rounds: int = 3,
) -> TracingCertificate:
    """Index by counting specialized fibers over all conjugate images."""
    tower = P.ctx.tower
    table = sys.table
    m = tower.m
    w_names = [f"w{i+1}" for i in range(m)]
    ext = VarTable(
        table.names + tuple(w_names) + ("z2",),
        table.classes + tuple(["D"] * m) + ("Z",),
    )
    zi = [ext.index("z"), ext.index("z2")]
    rest = [i for i in range(len(ext)) if i not in zi]
    order = MonomialOrder.block(ext, [zi, rest])
    rest_order = MonomialOrder.block(ext, [zi, rest])

    rng = random.Random(seed * 1000003 + 4099)
    results = []
    sample_log = []
    attempts = 0
    while len(results) < rounds:
        attempts += 1
        if attempts > 60:
            raise TracingError("could not find enough good specializations")
        svals_q = [
            Fraction(rng.randint(-30, 30), rng.randint(1, 20)) for _ in range(tower.n)
        ]
        svals = [complex(q) for q in svals_q]
        conj = _conjugate_images(sys, svals)
        if conj is None:
            continue
        s_consts = {
            table.index(nm): MultiPoly.const(ext, GaussianRational(svals_q[k]))
            for k, nm in enumerate(sys.param_names)
        }
        d_to_w = {
            table.index(nm): MultiPoly.variable(ext, w_names[k])
            for k, nm in enumerate(sys.delta_names)
        }
        z_to_z2 = {table.index("z"): MultiPoly.variable(ext, "z2")}
        dup_map = {**s_consts, **d_to_w, **z_to_z2}

        gens = []
        for g in sys.E + sys.G:
            gens.append(g.embed(ext))
        for g in bp_gens:
            gens.append(g.embed(ext))
        gens.append(sys.GZ.embed(ext))
        for g in sys.E + sys.G:
            gens.append(g.subst_polys(dup_map))
        gens.append(sys.GZ.subst_polys(dup_map))
        for g in vp_gens:
            gens.append(g.embed(ext))

        try:
            gb = buchberger(gens, order, step_budget)
        except Exception as exc:  # budget or degenerate sample
            raise TracingError(f"specialized basis failed: {exc}")
        zset = set(zi)
        elim = [g for g in gb if all(all(e[i] == 0 for i in zset) for e in g.terms)]
        fiber_names = (
            list(sys.param_names)
            + list(sys.delta_names)
            + list(sys.x_names)
            + w_names
        )
        ideal = Ideal(elim, rest_order, step_budget)
        ideal.reduced_gb = elim
        from .groebner import quotient_dimension

        n_total = quotient_dimension(ideal, fiber_names)
        if n_total is None:
            continue
        # square-freeness guard on every fiber variable
        good = True
        for nm in fiber_names:
            coeffs = minimal_polynomial(ideal, nm, GR_ONE, support_vars=fiber_names)
            if coeffs is None or not _univar_squarefree(coeffs):
                good = False
                break
        if not good:
            continue
        # branch count: conjugates whose image satisfies the variety ideal
        n_branch = _count_branch_images(sys, vp_gens, svals_q, step_budget)
        if n_branch is None or n_branch == 0:
            continue
        if n_total % n_branch:
            raise TracingError(
                f"inconsistent specialization: {n_total} fiber points over "
                f"{n_branch} conjugate images"
            )
        results.append(n_total // n_branch)
        sample_log.append(
            {
                "point": [str(q) for q in svals_q],
                "total": n_total,
                "branch_images": n_branch,
            }
        )
    if len(set(results)) != 1:
        raise TracingError(f"specializations disagree: {results}")
    return TracingCertificate(results[0], "specialization_count", None, sample_log)


def _count_branch_images(sys: IncidenceSystem, vp_gens, svals_q, step_budget):
    """Solutions of the specialized tower system landing on the variety."""
    tower = sys.parametrization.ctx.tower
    m = tower.m
    w_names = [f"w{i+1}" for i in range(m)]
    wt = VarTable(tuple(w_names), tuple(["D"] * m))
    worder = MonomialOrder("lex", list(reversed(range(m))))
    table = sys.table
    s_consts = {
        table.index(nm): MultiPoly.const(wt, GaussianRational(svals_q[k]))
        for k, nm in enumerate(sys.param_names)
    }
    d_to_w = {
        table.index(nm): MultiPoly.variable(wt, w_names[k])
        for k, nm in enumerate(sys.delta_names)
    }
    sub = {**s_consts, **d_to_w}
    gens = [g.subst_polys(sub) for g in sys.E]
    # variety generators at the conjugate images, denominators cleared
    frac_map = {}
    for j, (num, den) in enumerate(sys.component_fractions):
        nj = num.subst_polys(sub)
        dj = den.subst_polys(sub)
        frac_map[table.index(sys.x_names[j])] = RatFunc(nj, dj)
    for g in vp_gens:
        rf = RatFunc.from_poly(g).subst_ratfuncs(frac_map)
        if rf.num.is_zero():
            continue
        gens.append(rf.num)
    if not gens:
        return 1
    ideal = Ideal(gens, worder, step_budget)
    from .groebner import quotient_dimension

    return quotient_dimension(ideal, w_names)


def tracing_index(P, report, seed: int = 0, step_budget: int = 200_000) -> TracingCertificate:
    """Generic-fiber method first; specialization count as the fallback."""
    sys = report.system
    try:
        return tracing_index_generic(
            report.generators_incidence,
            report.generators_variety,
            sys,
            step_budget,
            seed=seed,
        )
    except Inconclusive:
        return tracing_index_specialized(
            P,
            report.generators_incidence,
            report.generators_variety,
            sys,
            seed=seed,
            step_budget=step_budget,
        )
