"""Rationalizing substitutions for integrals of radical functions.

For an integrand f in a one-parameter radical tower whose tower variety is
rationally parametrizable with a birational map, the change of variable
t = xi(u) (the parameter coordinate of the branch-aligned parametrization)
turns the integral of f into a rational one:

    integral f(t) dt  =  integral f(sub(u)) * xi'(u) du

with sub the full substitution (parameter and root coordinates).  The
change of variable is undone by the back-substitution, the rational
expression of u in the tower extracted from the graph ideal.

The root coordinates of the computed parametrization are aligned with the
input branch by exact unit factors (roots of unity available in Q(i)),
chosen numerically at one sample; the alignment, and therefore the whole
substitution, is local to the branch region around that sample, so the
numeric verification samples stay in a neighbourhood of it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List

from .gaussian import GR_I, GR_MINUS_ONE, GR_ONE, GaussianRational
from .groebner import Ideal, MonomialOrder, buchberger
from .poly import MultiPoly, RatFunc, VarTable
from .reparam import RationalMap, ratparam
from .tower import ContinuationError, TowerElement
from .varieties import variety_report


class IntegrateError(RuntimeError):
    pass


class NonBirationalParametrization(IntegrateError):
    """The tower-variety parametrization failed a composition check."""


class IntegralTransform:
    def __init__(
        self,
        rational_integrand: RatFunc,
        forward: RatFunc,
        substitution: List[RatFunc],
        back_substitution: TowerElement,
        certificate: dict,
    ):
        self.rational_integrand = rational_integrand  # g(u)
        self.forward = forward  # xi(u)
        self.substitution = substitution  # full branch-aligned map
        self.back_substitution = back_substitution
        self.certificate = certificate

    def rendered(self) -> dict:
        return {
            "rational_integrand": self.rational_integrand.render(),
            "forward_substitution": self.forward.render(),
            "substitution": [rf.render() for rf in self.substitution],
            "back_substitution": self.back_substitution.render(),
            "certificate": self.certificate,
        }


def _unit_candidates(e: int):
    units = [GR_ONE]
    if e % 2 == 0:
        units.append(GR_MINUS_ONE)
    if e % 4 == 0:
        units.extend([GR_I, -GR_I])
    return units


def _scale_ratfunc(rf: RatFunc, c: GaussianRational) -> RatFunc:
    return RatFunc(rf.num.scale(c), rf.den, reduce=False)


def rationalize_integral(f: TowerElement, aux, seed: int = 0, samples: int = 8,
                         step_budget: int = 200_000) -> IntegralTransform:
    """Build the rationalizing substitution for a one-parameter integrand.

    `aux` is the auxiliary parametrization (t, roots...) over the same
    branch context (see build.build_integrand).
    """
    ctx = f.ctx
    tower = ctx.tower
    if tower.n != 1:
        raise IntegrateError("only one-parameter integrands are supported")
    if tower.m == 0:
        # already rational: identity transform
        ttab = VarTable(("u",), ("Aux",))
        num, den = f.joint_fraction()
        sub = {f.ctx.tower.joint.index(tower.param_names[0]): RatFunc.from_poly(
            MultiPoly.variable(ttab, "u"))}
        g = RatFunc(num, den, reduce=False).subst_ratfuncs(sub)
        ident = RatFunc.from_poly(MultiPoly.variable(ttab, "u"))
        back = TowerElement.from_param(ctx, tower.param_names[0])
        return IntegralTransform(
            g, ident, [ident], back, {"birational": True, "trivial": True}
        )

    report = variety_report(aux, seed=seed, samples=samples, step_budget=step_budget)
    sys = report.system
    ambient = list(tower.param_names) + [lv.name for lv in tower.levels]
    rmap = ratparam(list(report.generators_tower), ambient, sys.table)
    if rmap is None:
        raise IntegrateError("tower variety is not in a supported rational class")
    if not rmap.birational:
        raise NonBirationalParametrization("composition checks failed")

    aligned, sample_u = _align_with_branch(ctx, rmap, seed)
    xi = aligned[0]
    dxi = xi.derivative(0)
    num, den = f.joint_fraction()
    joint = tower.joint
    mapping = {joint.index(nm): aligned[k] for k, nm in enumerate(ambient)}
    g0 = RatFunc(num, den, reduce=False).subst_ratfuncs(mapping)
    g = g0 * dxi

    back = _back_substitution(ctx, report.generators_tower, aligned, sys, step_budget)
    certificate = {
        "birational": True,
        "alignment_sample": sample_u,
        "params": rmap.params,
    }
    return IntegralTransform(g, xi, aligned, back, certificate)


def _align_with_branch(ctx, rmap: RationalMap, seed: int):
    """Adjust root coordinates by exact unit factors to match the branch.

    Returns (aligned components, sample point u0).  The choice is made
    numerically at one sample with a safety margin and then re-verified
    exactly against the tower relations.
    """
    tower = ctx.tower
    comps = rmap.components
    n, m = tower.n, tower.m
    candidates = [_unit_candidates(lv.exponent) for lv in tower.levels]
    u_samples = [
        Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 5),
        Fraction(3, 7), Fraction(2, 7), Fraction(1, 7), Fraction(5, 9),
        Fraction(-1, 3), Fraction(-1, 2),
    ]
    last_err = "no admissible sample"
    for u0 in u_samples:
        uv = complex(u0)
        try:
            t0 = comps[0].evaluate({0: uv})
        except ZeroDivisionError:
            continue
        try:
            dv = ctx.continue_deltas([t0])
        except (ContinuationError, ZeroDivisionError):
            continue
        flips = []
        ok = True
        for i in range(m):
            try:
                coord = comps[n + i].evaluate({0: uv})
            except ZeroDivisionError:
                ok = False
                break
            scale = max(1.0, abs(dv[i]))
            best = None
            dists = []
            for unit in candidates[i]:
                dist = abs(complex(unit) * coord - dv[i]) / scale
                dists.append(dist)
                if best is None or dist < best[0]:
                    best = (dist, unit)
            dists.sort()
            if best[0] > 1e-6:
                ok = False
                last_err = f"no unit factor matches the branch (best {best[0]:.2e})"
                break
            if len(dists) > 1 and dists[1] < 1e-4:
                ok = False
                last_err = "ambiguous unit alignment at the sample"
                break
            flips.append(best[1])
        if not ok:
            continue
        aligned = [comps[0]] + [
            _scale_ratfunc(comps[n + i], flips[i]) for i in range(m)
        ]
        _exact_relation_check(ctx, aligned)
        return aligned, str(u0)
    raise IntegrateError(f"branch alignment failed: {last_err}")


def _exact_relation_check(ctx, aligned):
    tower = ctx.tower
    joint = tower.joint
    ambient = list(tower.param_names) + [lv.name for lv in tower.levels]
    mapping = {joint.index(nm): aligned[k] for k, nm in enumerate(ambient)}
    for i, lv in enumerate(tower.levels):
        coord = aligned[tower.n + i]
        alpha = RatFunc(lv.radicand.num, lv.radicand.den, reduce=False).subst_ratfuncs(
            mapping
        )
        power = RatFunc(coord.num ** lv.exponent, coord.den ** lv.exponent, reduce=False)
        if not (power - alpha).num.is_zero():
            raise NonBirationalParametrization(
                f"aligned coordinates violate the relation of {lv.name}"
            )


def _back_substitution(ctx, vt_gens, aligned, sys, step_budget):
    """u as a rational expression in (t, roots), from the graph ideal."""
    tower = ctx.tower
    names = ("uu",) + tuple(lv.name for lv in reversed(tower.levels)) + tuple(
        tower.param_names
    )
    classes = ("Aux",) + tuple("Delta" for _ in tower.levels) + tuple(
        "T" for _ in tower.param_names
    )
    gt = VarTable(names, classes)
    order = MonomialOrder.lex(gt)
    gens = [g.embed(gt) for g in vt_gens]
    ambient = list(tower.param_names) + [lv.name for lv in tower.levels]
    uvar = MultiPoly.variable(gt, "uu")
    for k, nm in enumerate(ambient):
        # clear denominators: coordinate * den(u) - num(u), u renamed into the table
        rf = aligned[k]
        ren = {0: uvar}
        num_u = rf.num.subst_polys(ren)
        den_u = rf.den.subst_polys(ren)
        gens.append(MultiPoly.variable(gt, nm) * den_u - num_u)
    gb = buchberger(gens, order, step_budget)
    ui = gt.index("uu")
    vt_ideal = Ideal([g.embed(gt) for g in vt_gens], order, step_budget)
    for g in gb:
        if g.degree(ui) != 1:
            continue
        coeff_terms = {}
        rest_terms = {}
        for e, c in g.terms.items():
            if e[ui]:
                ne = list(e)
                ne[ui] = 0
                coeff_terms[tuple(ne)] = c
            else:
                rest_terms[e] = c
        coeff = MultiPoly(gt, coeff_terms)
        rest = MultiPoly(gt, rest_terms)
        if vt_ideal.contains(coeff):
            continue
        expr = RatFunc(-rest, coeff)
        return TowerElement.from_ratfunc(ctx, _to_joint_rf(expr, tower))
    raise NonBirationalParametrization(
        "no linear back-substitution element in the graph ideal"
    )


def _to_joint_rf(rf: RatFunc, tower) -> RatFunc:
    return RatFunc(rf.num.embed(tower.joint), rf.den.embed(tower.joint), reduce=False)


def verify_transform(transform: IntegralTransform, f: TowerElement, seed: int = 0,
                     count: int = 10, tol: float = 1e-6) -> dict:
    """Numeric residuals of the substitution identity and the round trip.

    Samples stay near the alignment point: the substitution is valid on the
    branch region selected there (radical sheets are locally constant).
    """
    ctx = f.ctx
    base = Fraction(transform.certificate.get("alignment_sample", "1/2"))
    us = []
    k = 1
    while len(us) < count and k < 120:
        cand = base + Fraction(k, 977)
        us.append(cand)
        k += 3
    max_identity = 0.0
    max_round = 0.0
    used = 0
    for u0 in us:
        uv = complex(u0)
        try:
            gval = transform.rational_integrand.evaluate({0: uv})
            tval = transform.forward.evaluate({0: uv})
            dxi = transform.forward.derivative(0).evaluate({0: uv})
            fval = f.evaluate([tval])
            back = transform.back_substitution.evaluate([tval])
        except (ZeroDivisionError, ContinuationError):
            continue
        used += 1
        scale = max(1.0, abs(gval))
        max_identity = max(max_identity, abs(gval - fval * dxi) / scale)
        max_round = max(max_round, abs(back - uv) / max(1.0, abs(uv)))
    if used < max(3, count // 2):
        raise IntegrateError("too few usable verification samples")
    report = {
        "samples": used,
        "identity_max": max_identity,
        "roundtrip_max": max_round,
        "tolerance": tol,
        "ok": max_identity <= tol and max_round <= tol,
    }
    return report
