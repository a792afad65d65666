import cmath
import random

import pytest

from radtower.expressions import ast_to_ratfunc, parse_expression
from radtower.gaussian import GaussianRational
from radtower.poly import VarTable
from radtower.tower import (
    BranchContext,
    BranchSpec,
    BranchSpecError,
    IdenticallyZeroOnBranch,
    JacobianRankError,
    RadicalParametrization,
    RadicalTower,
    TowerElement,
    TowerLevel,
    branch_evaluate,
    jacobian_rank,
    tower_derive,
    tower_invert,
)

def make_tower(param_names, level_specs):
    """level_specs: list of (name, exponent, radicand text)."""
    names = list(param_names) + [nm for nm, _, _ in level_specs]
    classes = ["T"] * len(param_names) + ["Delta"] * len(level_specs)
    joint = VarTable(names, classes)
    levels = [
        TowerLevel(nm, e, ast_to_ratfunc(parse_expression(text), joint))
        for nm, e, text in level_specs
    ]
    return RadicalTower(param_names, levels)


@pytest.fixture(scope="module")
def circle_ctx():
    tower = make_tower(["t"], [("d", 2, "1-t^2")])
    return BranchContext(tower, BranchSpec([GaussianRational(0)], [1.0]), seed=0)


@pytest.fixture(scope="module")
def sixth_root_ctx():
    # d1^2 = t, d2^3 = t, d3^6 = t with the branch making the paper's
    # reciprocal expression well defined
    tower = make_tower(["t"], [("d1", 2, "t"), ("d2", 3, "t"), ("d3", 6, "t")])
    w = cmath.exp(2j * cmath.pi / 3)
    return BranchContext(
        tower, BranchSpec([GaussianRational(1)], [-1.0, w, 1.0]), seed=0
    )


def test_square_of_root_is_radicand(circle_ctx):
    d = TowerElement.from_delta(circle_ctx, 0)
    prod = d * d
    expected = TowerElement.from_ratfunc(
        circle_ctx, ast_to_ratfunc(parse_expression("1-t^2"), circle_ctx.tower.joint)
    )
    assert prod.semantically_equal(expected)


def test_additive_identity(circle_ctx):
    d = TowerElement.from_delta(circle_ctx, 0)
    zero = TowerElement.from_const(circle_ctx, GaussianRational(0))
    assert (d + zero).semantically_equal(d)


def test_sixth_root_cubed_squared_is_t(sixth_root_ctx):
    d3 = TowerElement.from_delta(sixth_root_ctx, 2)
    t = TowerElement.from_param(sixth_root_ctx, "t")
    assert ((d3**3) * (d3**3)).semantically_equal(t)


def test_invert_constant(circle_ctx):
    two = TowerElement.from_const(circle_ctx, GaussianRational(2))
    inv = tower_invert(two)
    one = TowerElement.from_const(circle_ctx, GaussianRational(1))
    assert (inv * two).semantically_equal(one)
    assert inv.render() == "1/2"


def test_invert_with_relation_discovery(sixth_root_ctx):
    ctx = sixth_root_ctx
    d1 = TowerElement.from_delta(ctx, 0)
    d2 = TowerElement.from_delta(ctx, 1)
    d3 = TowerElement.from_delta(ctx, 2)
    x = d3 * d2 - d1
    inv = tower_invert(x)
    one = TowerElement.from_const(ctx, GaussianRational(1))
    assert (inv * x).semantically_equal(one)
    # the reciprocal continues to e^{-pi i/3}/sqrt(t); at t = 4 that halves
    val = inv.evaluate([4.0])
    expected = cmath.exp(-1j * cmath.pi / 3) / 2
    assert abs(val - expected) <= 1e-8 * abs(expected)
    assert ctx.relations_joint, "a branch relation should have been discovered"


def test_all_principal_branch_is_degenerate():
    tower = make_tower(["t"], [("d1", 2, "t"), ("d2", 3, "t"), ("d3", 6, "t")])
    ctx = BranchContext(tower, BranchSpec([GaussianRational(1)], [1.0, 1.0, 1.0]), seed=0)
    d1 = TowerElement.from_delta(ctx, 0)
    d2 = TowerElement.from_delta(ctx, 1)
    d3 = TowerElement.from_delta(ctx, 2)
    with pytest.raises(IdenticallyZeroOnBranch):
        tower_invert(d3 * d2 - d1)


def test_branch_values_checked_at_base():
    tower = make_tower(["t"], [("d", 2, "1-t^2")])
    with pytest.raises(BranchSpecError):
        BranchContext(tower, BranchSpec([GaussianRational(0)], [0.5]), seed=0)


def test_derivative_examples(circle_ctx):
    d = TowerElement.from_delta(circle_ctx, 0)
    t = TowerElement.from_param(circle_ctx, "t")
    dd = tower_derive(d, 0)
    # dd/dt = -t/d, equivalently -t*d/(1-t^2)
    expected = (-t) / d
    assert dd.semantically_equal(expected)
    dt = tower_derive(t, 0)
    one = TowerElement.from_const(circle_ctx, GaussianRational(1))
    assert dt.semantically_equal(one)


def test_chain_rule_consistency():
    tower = make_tower(["t"], [("d", 2, "t^2+1")])
    ctx = BranchContext(tower, BranchSpec([GaussianRational(0)], [1.0]), seed=0)
    d = TowerElement.from_delta(ctx, 0)
    sq = d * d
    dsq = tower_derive(sq, 0)
    t = TowerElement.from_param(ctx, "t")
    expected = t + t
    assert dsq.semantically_equal(expected)


def test_derivation_product_rule(circle_ctx):
    rng = random.Random(5)
    d = TowerElement.from_delta(circle_ctx, 0)
    t = TowerElement.from_param(circle_ctx, "t")
    for _ in range(10):
        a = TowerElement.from_const(circle_ctx, GaussianRational(rng.randint(-3, 3)))
        x = a + d * TowerElement.from_const(circle_ctx, GaussianRational(rng.randint(1, 3))) + t
        y = d - t * a if rng.random() < 0.5 else d * d + t
        lhs = tower_derive(x * y, 0)
        rhs = tower_derive(x, 0) * y + x * tower_derive(y, 0)
        assert lhs.semantically_equal(rhs)


def test_finite_difference_derivative(circle_ctx):
    d = TowerElement.from_delta(circle_ctx, 0)
    t = TowerElement.from_param(circle_ctx, "t")
    x = d * t + d
    dx = tower_derive(x, 0)
    t0 = 0.37
    exact = dx.evaluate([t0])
    errs = []
    for h in (1e-4, 1e-5):
        approx = (x.evaluate([t0 + h]) - x.evaluate([t0 - h])) / (2 * h)
        errs.append(abs(approx - exact))
    decay = errs[0] / max(errs[1], 1e-300)
    assert 70 <= decay <= 130  # quadratic decay of the central difference


def test_branch_evaluate_examples(circle_ctx):
    d = TowerElement.from_delta(circle_ctx, 0)
    assert abs(d.evaluate([0.6]) - 0.8) < 1e-9
    # quartic root of t^2 from +1 stays the positive square root on reals
    tower = make_tower(["t"], [("d", 4, "t^2")])
    ctx = BranchContext(tower, BranchSpec([GaussianRational(1)], [1.0]), seed=0)
    d4 = TowerElement.from_delta(ctx, 0)
    assert abs(d4.evaluate([4.0]) - 2.0) < 1e-8
    assert branch_evaluate(d4, [4.0]) == d4.evaluate([4.0])


def test_surface_branch_value():
    tower = make_tower(["t1", "t2"], [("d", 2, "t1^10-4*t2^3*t1-4*t1")])
    ctx = BranchContext(
        tower, BranchSpec([GaussianRational(1), GaussianRational(-1)], [1.0]), seed=0
    )
    d = TowerElement.from_delta(ctx, 0)
    val = d.evaluate([4.0, 8.0])
    expected = 28 * (1327**0.5)
    assert abs(val - expected) <= 1e-8 * expected


def test_root_value_consistency_at_samples(circle_ctx):
    ctx = circle_ctx
    for pt in ctx.probe_points(5):
        dv = ctx.continue_deltas(pt)
        a, ok = ctx._eval_radicand(0, pt, [])
        assert ok
        assert abs(dv[0] ** 2 - a) <= 1e-8 * max(1.0, abs(a))


def test_jacobian_ranks(circle_ctx):
    P = RadicalParametrization(
        circle_ctx,
        [TowerElement.from_param(circle_ctx, "t"), TowerElement.from_delta(circle_ctx, 0)],
        check_rank=False,
    )
    assert jacobian_rank(P) == 1
    tower = make_tower(["t1", "t2"], [("d", 2, "t1^10-4*t2^3*t1-4*t1")])
    ctx = BranchContext(
        tower, BranchSpec([GaussianRational(1), GaussianRational(-1)], [1.0]), seed=0
    )
    t1 = TowerElement.from_param(ctx, "t1")
    t2 = TowerElement.from_param(ctx, "t2")
    d = TowerElement.from_delta(ctx, 0)
    den = TowerElement.from_ratfunc(
        ctx, ast_to_ratfunc(parse_expression("2*t2^3+2"), tower.joint)
    )
    x2 = (d - t1**5) * t2 / den
    P2 = RadicalParametrization(ctx, [t2, x2, t1], check_rank=False)
    assert jacobian_rank(P2) == 2


def test_constant_tuple_rejected(circle_ctx):
    c1 = TowerElement.from_const(circle_ctx, GaussianRational(1))
    c2 = TowerElement.from_const(circle_ctx, GaussianRational(2))
    with pytest.raises(JacobianRankError):
        RadicalParametrization(circle_ctx, [c1, c2])


def test_discovered_relations_vanish_numerically(sixth_root_ctx):
    ctx = sixth_root_ctx
    assert ctx.relations_joint
    for rel in ctx.relations_joint:
        for pt in ctx.probe_points(5):
            dv = ctx.continue_deltas(pt)
            env = {0: pt[0]}
            total = 0j
            scale = 0.0
            joint = ctx.tower.joint
            full_env = {joint.index("t"): pt[0]}
            for k, lv in enumerate(ctx.tower.levels):
                full_env[joint.index(lv.name)] = dv[k]
            val = rel.evaluate(full_env)
            sc = max(1.0, rel.eval_scale(full_env))
            assert abs(val) / sc <= 1e-8
