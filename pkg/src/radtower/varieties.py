"""Implicitization pipeline for radical parametrizations.

Builds the cleared-denominator incidence system (tower equations E_i,
component equations G_j, and the inverse-variable equation G_Z), then
computes:

  * the auxiliary variety ideal (eliminate the inverse variable),
  * the incidence-variety ideal (the unique component through the branch,
    selected by light factorization plus numeric witness filtering),
  * the radical-variety ideal (eliminate everything but the image
    coordinates), and
  * the tower-variety ideal (eliminate the image coordinates).

All reported generator lists are reduced Groebner bases under block orders
with a fixed variable layout (inverse variable, then root variables from
the highest level down, then parameters, then image coordinates), rendered
integer-primitive.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence

from .gaussian import GR_ONE
from .groebner import Ideal, MonomialOrder, buchberger
from .poly import MultiPoly, VarTable, exact_divide, gcd_multivariate, light_factor
from .tower import ContinuationError, RadicalParametrization

DEFAULT_WITNESSES = 8
RESIDUAL_TOL = 1e-6


class VarietyError(RuntimeError):
    pass


class AmbiguousComponent(VarietyError):
    """A witness vanished on two distinct factors of one generator."""


class DensityCheckError(VarietyError):
    """The parameter projection of the incidence ideal was not dense."""


def poly_lcm(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    g = gcd_multivariate(a, b)
    return a * exact_divide(b, g)


class IncidenceSystem:
    """Cleared-denominator equations of a parametrization, on one table."""

    def __init__(self, P: RadicalParametrization):
        self.parametrization = P
        tower = P.ctx.tower
        n, m, r = tower.n, tower.m, P.r
        delta_names = [lv.name for lv in tower.levels]
        x_names = [f"x{j+1}" for j in range(r)]
        names = ["z"] + delta_names + list(tower.param_names) + x_names
        classes = ["Z"] + ["Delta"] * m + ["T"] * n + ["X"] * r
        self.table = VarTable(names, classes)
        self.delta_names = delta_names
        self.x_names = x_names
        self.param_names = list(tower.param_names)
        # block order: z, then roots from the highest level down, then
        # parameters, then image coordinates
        zi = [self.table.index("z")]
        di = [self.table.index(nm) for nm in reversed(delta_names)]
        ti = [self.table.index(nm) for nm in tower.param_names]
        xi = [self.table.index(nm) for nm in x_names]
        self.pipeline_order = MonomialOrder.block(self.table, [zi, di, ti, xi])
        self.tower_order = MonomialOrder.block(self.table, [zi + xi, di, ti])

        self.E: List[MultiPoly] = []
        lcm_all = MultiPoly.const(self.table, GR_ONE)
        for i, lv in enumerate(tower.levels):
            num = lv.radicand.num.embed(self.table)
            den = lv.radicand.den.embed(self.table)
            head = MultiPoly.variable(self.table, lv.name, lv.exponent)
            self.E.append(head * den - num)
            lcm_all = poly_lcm(lcm_all, den)
        self.G: List[MultiPoly] = []
        self.component_fractions = []
        for j, comp in enumerate(P.components):
            num, den = comp.joint_fraction()
            num = num.embed(self.table)
            den = den.embed(self.table)
            self.component_fractions.append((num, den))
            xj = MultiPoly.variable(self.table, x_names[j])
            self.G.append(xj * den - num)
            lcm_all = poly_lcm(lcm_all, den)
        z = MultiPoly.variable(self.table, "z")
        self.GZ = z * lcm_all - MultiPoly.const(self.table, GR_ONE)

    def generators(self) -> List[MultiPoly]:
        return self.E + self.G + [self.GZ]


def build_system(P: RadicalParametrization) -> IncidenceSystem:
    return IncidenceSystem(P)


def auxiliary_ideal(sys: IncidenceSystem, step_budget: int = 200_000) -> List[MultiPoly]:
    """Generators of the auxiliary variety: eliminate the inverse variable."""
    gb = buchberger(sys.generators(), sys.pipeline_order, step_budget)
    zi = sys.table.index("z")
    return [g for g in gb if all(e[zi] == 0 for e in g.terms)]


# ---------------------------------------------------------------------------
# witness sampling
# ---------------------------------------------------------------------------


def _random_rational(rng: random.Random, height: int = 50) -> Fraction:
    num = rng.randint(-height, height)
    den = rng.randint(1, height)
    return Fraction(num, den)


def sample_witnesses(
    sys: IncidenceSystem,
    count: int,
    seed: int,
    salt: int = 0,
):
    """Numeric points (t, deltas, x) on the branch, discriminant-avoiding."""
    P = sys.parametrization
    tower = P.ctx.tower
    rng = random.Random(seed * 1000003 + 1013 + salt)
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 80 * count:
            raise VarietyError("witness sampling failed; too close to the discriminant")
        t = [_random_rational(rng) for _ in range(tower.n)]
        tv = [complex(a) for a in t]
        try:
            dv = P.ctx.continue_deltas(tv)
        except (ContinuationError, ZeroDivisionError):
            continue
        # reject near-discriminant points: small radicands or denominators
        ok = True
        for i, lv in enumerate(tower.levels):
            a, fine = P.ctx._eval_radicand(i, tv, dv)
            if not fine or abs(a) < 1e-4:
                ok = False
                break
        if not ok:
            continue
        xs = []
        for num, den in sys.component_fractions:
            point = _point_env(sys, tv, dv, xs=None)
            dval = den.evaluate(point)
            dscale = max(1.0, den.eval_scale(point))
            if abs(dval) < 1e-4 * dscale:
                ok = False
                break
            xs.append(num.evaluate(point) / dval)
        if not ok:
            continue
        out.append((tv, dv, xs))
    return out


def _point_env(sys: IncidenceSystem, tv, dv, xs=None):
    env = {}
    for k, nm in enumerate(sys.param_names):
        env[sys.table.index(nm)] = tv[k]
    for k, nm in enumerate(sys.delta_names):
        env[sys.table.index(nm)] = dv[k]
    env[sys.table.index("z")] = 0j
    if xs is not None:
        for k, nm in enumerate(sys.x_names):
            env[sys.table.index(nm)] = xs[k]
    return env


def _residual(poly: MultiPoly, env) -> float:
    v = poly.evaluate(env)
    scale = max(1.0, poly.eval_scale(env))
    return abs(v) / scale


# ---------------------------------------------------------------------------
# incidence-component selection
# ---------------------------------------------------------------------------


def select_incidence_component(
    ap_gens: Sequence[MultiPoly],
    sys: IncidenceSystem,
    seed: int = 0,
    samples: int = DEFAULT_WITNESSES,
    tol: float = RESIDUAL_TOL,
    step_budget: int = 200_000,
):
    """The unique irreducible component of the auxiliary variety through
    the branch, as (generators, flags, witnesses, combinations_examined).
    """
    for round_ in range(2):
        witnesses = sample_witnesses(sys, samples, seed, salt=round_)
        envs = [_point_env(sys, tv, dv, xs) for tv, dv, xs in witnesses]
        new_gens = []
        combos = 1
        all_certified = True
        replaced_ok = True
        try:
            for g in ap_gens:
                factors = light_factor(g)
                if len(factors) <= 1:
                    new_gens.append(g)
                    if factors and not factors[0][1]:
                        all_certified = False
                    continue
                combos *= len(factors)
                surviving = [
                    (f, cert)
                    for f, cert in factors
                    if all(_residual(f, env) <= tol for env in envs)
                ]
                if not surviving:
                    raise AmbiguousComponent(
                        "no factor of a generator vanishes at all witnesses"
                    )
                if len(surviving) > 1:
                    raise AmbiguousComponent(
                        "a witness vanishes on two distinct factors of one generator"
                    )
                f, cert = surviving[0]
                if not cert:
                    all_certified = False
                    replaced_ok = False
                new_gens.append(f)
        except AmbiguousComponent:
            if round_ == 0:
                continue
            raise
        bp = buchberger(new_gens, sys.pipeline_order, step_budget)
        bad = [
            (i, max(_residual(g, env) for env in envs))
            for i, g in enumerate(bp)
            if any(_residual(g, env) > tol for env in envs)
        ]
        if bad:
            if round_ == 0:
                continue
            raise VarietyError(f"selected component fails witness residuals: {bad}")
        _density_check(bp, sys, step_budget)
        flags = {
            "BP_certified": all_certified and replaced_ok,
            "BP_unverified_irreducibility": not (all_certified and replaced_ok),
        }
        return bp, flags, witnesses, combos
    raise VarietyError("component selection failed")


def _density_check(bp_gens, sys: IncidenceSystem, step_budget):
    """Eliminating everything but the parameters must give the zero ideal."""
    drop = ["z"] + sys.delta_names + sys.x_names
    ideal = Ideal(list(bp_gens), sys.pipeline_order, step_budget)
    from .groebner import eliminate

    residue = eliminate(ideal, drop)
    if residue:
        raise DensityCheckError(
            "parameter projection of the incidence ideal is not dense"
        )


def radical_variety_ideal(bp_gens, sys: IncidenceSystem, step_budget=200_000):
    """Eliminate all variables except the image coordinates."""
    gb = buchberger(list(bp_gens), sys.pipeline_order, step_budget)
    keep = {sys.table.index(nm) for nm in sys.x_names}
    out = []
    for g in gb:
        if all(all(k == 0 for i, k in enumerate(e) if i not in keep) for e in g.terms):
            out.append(g)
    return out


def tower_variety_ideal(bp_gens, sys: IncidenceSystem, step_budget=200_000):
    """Eliminate the image coordinates, keeping parameters and roots."""
    gb = buchberger(list(bp_gens), sys.tower_order, step_budget)
    drop = {sys.table.index(nm) for nm in sys.x_names} | {sys.table.index("z")}
    out = []
    for g in gb:
        if all(all(e[i] == 0 for i in drop) for e in g.terms):
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------


class VarietyReport:
    def __init__(self):
        self.generators_auxiliary: List[MultiPoly] = []
        self.generators_incidence: List[MultiPoly] = []
        self.generators_variety: List[MultiPoly] = []
        self.generators_tower: List[MultiPoly] = []
        self.witness_points: list = []
        self.flags: dict = {}
        self.residuals: dict = {}
        self.combinations_examined: int = 1
        self.system: Optional[IncidenceSystem] = None

    def rendered(self) -> dict:
        return {
            "auxiliary": [g.normalized().render() for g in self.generators_auxiliary],
            "incidence": [g.normalized().render() for g in self.generators_incidence],
            "radical_variety": [g.normalized().render() for g in self.generators_variety],
            "tower_variety": [g.normalized().render() for g in self.generators_tower],
        }


def variety_report(
    P: RadicalParametrization,
    seed: int = 0,
    samples: int = DEFAULT_WITNESSES,
    tol: float = RESIDUAL_TOL,
    step_budget: int = 200_000,
    fresh_checks: int = 20,
    include_tower: bool = True,
) -> VarietyReport:
    """Run the full implicitization pipeline with residual verification.

    `include_tower=False` skips the tower-variety elimination (a separate,
    sometimes much heavier basis computation) for commands that do not
    report it."""
    sys = IncidenceSystem(P)
    report = VarietyReport()
    report.system = sys
    ap = auxiliary_ideal(sys, step_budget)
    report.generators_auxiliary = ap
    bp, flags, witnesses, combos = select_incidence_component(
        ap, sys, seed=seed, samples=samples, tol=tol, step_budget=step_budget
    )
    report.generators_incidence = bp
    report.flags = flags
    report.combinations_examined = combos
    report.witness_points = [
        [list(_c2pair(v)) for v in (list(tv) + list(dv) + list(xs))]
        for tv, dv, xs in witnesses
    ]
    report.generators_variety = radical_variety_ideal(bp, sys, step_budget)
    report.generators_tower = (
        tower_variety_ideal(bp, sys, step_budget) if include_tower else []
    )

    fresh = sample_witnesses(sys, fresh_checks, seed, salt=7777)
    max_bp = max_vp = max_vt = 0.0
    for tv, dv, xs in fresh:
        env = _point_env(sys, tv, dv, xs)
        for g in report.generators_incidence:
            max_bp = max(max_bp, _residual(g, env))
        for g in report.generators_variety:
            max_vp = max(max_vp, _residual(g, env))
        for g in report.generators_tower:
            max_vt = max(max_vt, _residual(g, env))
    report.residuals = {
        "incidence_max": max_bp,
        "radical_variety_max": max_vp,
        "tower_variety_max": max_vt,
        "samples": len(fresh),
    }
    if max(max_bp, max_vp, max_vt) > tol:
        raise VarietyError(f"residual verification failed: {report.residuals}")
    return report


def _c2pair(v: complex):
    return (v.real, v.imag)
