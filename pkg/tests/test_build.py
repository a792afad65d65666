import math

import pytest

from radtower.build import (
    BuildError,
    build_integrand,
    build_parametrization,
    build_tower,
    radical_key,
)
from radtower.expressions import parse_expression
from radtower.gaussian import GaussianRational
from radtower.tower import IdenticallyZeroOnBranch, JacobianRankError


def test_nested_tower_levels_and_radicands():
    comps = [
        "t + root(t^3+2*t,4)/sqrt(t^2-root(t-1,3))",
        "root(5*root(t-1,3)+1,4)/(t^3+5)",
    ]
    tower = build_tower([parse_expression(c) for c in comps], ["t"])
    assert tower.exponents() == (3, 2, 4, 4)
    rendered = [lv.radicand.render() for lv in tower.levels]
    assert rendered == ["t-1", "t^2-d1", "5*d1+1", "t^3+2*t"]


def test_shared_radical_becomes_one_level():
    comps = ["sqrt(1-t^2)", "t*sqrt(1-t^2)"]
    tower = build_tower([parse_expression(c) for c in comps], ["t"])
    assert tower.m == 1


def test_structurally_distinct_radicals_stay_distinct():
    comps = ["root(t,6)*root(t,3)", "sqrt(t)*t"]
    tower = build_tower([parse_expression(c) for c in comps], ["t"])
    assert tower.m == 3


def test_two_level_circle_tower():
    comps = ["root(t,3)", "sqrt(1-root(t,3)^2)"]
    tower = build_tower([parse_expression(c) for c in comps], ["t"])
    assert tower.exponents() == (3, 2)
    assert [lv.radicand.render() for lv in tower.levels] == ["t", "-d1^2+1"]


def test_build_nested_parametrization_evaluates():
    comps = [
        "t + root(t^3+2*t,4)/sqrt(t^2-root(t-1,3))",
        "root(5*root(t-1,3)+1,4)/(t^3+5)",
    ]
    values = {
        radical_key("root(t-1,3)"): 1.0,
        radical_key("sqrt(t^2-root(t-1,3))"): math.sqrt(3),
        radical_key("root(5*root(t-1,3)+1,4)"): 6**0.25,
        radical_key("root(t^3+2*t,4)"): 12**0.25,
    }
    P = build_parametrization(comps, ["t"], [GaussianRational(2)], values, seed=0)
    assert P.r == 2 and P.m == 4 and P.n == 1
    v1 = P.components[0].evaluate([2.0])
    assert abs(v1 - (2 + 12**0.25 / math.sqrt(3))) < 1e-9
    v2 = P.components[1].evaluate([2.0])
    assert abs(v2 - 6**0.25 / 13) < 1e-9
    # every component is finite at the base point
    for comp in P.components:
        comp.evaluate([2.0])


def test_missing_branch_value():
    with pytest.raises(BuildError):
        build_parametrization(["sqrt(t)", "t"], ["t"], [GaussianRational(1)], {}, seed=0)


def test_unknown_variable_rejected():
    with pytest.raises(BuildError):
        build_parametrization(["s+t", "t"], ["t"], [GaussianRational(1)], {}, seed=0)


def test_principal_branch_zero_denominator():
    comps = ["1/(root(t,6)*root(t,3)-sqrt(t))", "t"]
    values = {
        radical_key("root(t,6)"): 1.0,
        radical_key("root(t,3)"): 1.0,
        radical_key("sqrt(t)"): 1.0,
    }
    with pytest.raises(IdenticallyZeroOnBranch):
        build_parametrization(comps, ["t"], [GaussianRational(1)], values, seed=0)


def test_good_branch_reciprocal_builds():
    import cmath

    comps = ["1/(root(t,6)*root(t,3)-sqrt(t))", "t"]
    values = {
        radical_key("root(t,6)"): 1.0,
        radical_key("root(t,3)"): cmath.exp(2j * cmath.pi / 3),
        radical_key("sqrt(t)"): -1.0,
    }
    P = build_parametrization(comps, ["t"], [GaussianRational(1)], values, seed=0)
    val = P.components[0].evaluate([4.0])
    expected = cmath.exp(-1j * cmath.pi / 3) / 2
    assert abs(val - expected) <= 1e-8 * abs(expected)


def test_rank_deficient_rejected():
    with pytest.raises(JacobianRankError):
        build_parametrization(
            ["t1", "t1^2", "t1+1"], ["t1", "t2"],
            [GaussianRational(0), GaussianRational(0)], {}, seed=0,
        )


def test_build_integrand():
    f, aux = build_integrand(
        "1/(t+sqrt(t^2+1))", "t", [GaussianRational(0)],
        {radical_key("sqrt(t^2+1)"): 1.0}, seed=0,
    )
    assert aux.r == 2 and aux.n == 1
    assert abs(f.evaluate([0.0]) - 1.0) < 1e-12
    f2, aux2 = build_integrand("t^2/(t-1)", "t", [GaussianRational(0)], {}, seed=0)
    assert aux2 is None
