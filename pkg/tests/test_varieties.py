from fractions import Fraction

import pytest

from radtower.build import build_parametrization, radical_key
from radtower.gaussian import GaussianRational
from radtower.groebner import Ideal, ideals_equal
from radtower.varieties import (
    IncidenceSystem,
    sample_witnesses,
    variety_report,
)

from .helpers import poly


@pytest.fixture(scope="module")
def circle():
    return build_parametrization(
        ["t", "sqrt(1-t^2)"], ["t"], [GaussianRational(0)],
        {radical_key("sqrt(1-t^2)"): 1.0}, seed=0,
    )


@pytest.fixture(scope="module")
def parabolas():
    return build_parametrization(
        ["root(t^2,4)", "t"], ["t"], [GaussianRational(1)],
        {radical_key("root(t^2,4)"): 1.0}, seed=0,
    )


@pytest.fixture(scope="module")
def surface():
    return build_parametrization(
        ["t2", "(t2*(sqrt(t1^10-4*t2^3*t1-4*t1)-t1^5))/(2*t2^3+2)", "t1"],
        ["t1", "t2"], [GaussianRational(1), GaussianRational(-1)],
        {radical_key("sqrt(t1^10-4*t2^3*t1-4*t1)"): 1.0}, seed=0,
    )


def test_circle_incidence_system(circle):
    sys = IncidenceSystem(circle)
    rendered = [g.render() for g in sys.generators()]
    assert rendered == ["d1^2+t^2-1", "-t+x1", "-d1+x2", "z-1"]


def test_surface_incidence_system(surface):
    sys = IncidenceSystem(surface)
    tbl = sys.table
    E1 = poly(tbl, "d1^2-(t1^10-4*t2^3*t1-4*t1)")
    G1 = poly(tbl, "x1-t2")
    G2 = poly(tbl, "x2*(2*t2^3+2)-(d1-t1^5)*t2")
    G3 = poly(tbl, "x3-t1")
    GZ = poly(tbl, "z*(2*t2^3+2)-1")
    assert sys.E == [E1]
    assert (sys.G[0] - G1).is_zero() or (sys.G[0] + G1).is_zero()
    assert (sys.G[1] - G2).is_zero() or (sys.G[1] + G2).is_zero()
    assert (sys.G[2] - G3).is_zero() or (sys.G[2] + G3).is_zero()
    assert sys.GZ == GZ


def test_rational_incidence_system():
    P = build_parametrization(
        ["t^2", "t^3"], ["t"], [GaussianRational(1)], {}, seed=0
    )
    sys = IncidenceSystem(P)
    rendered = [g.render() for g in sys.generators()]
    assert rendered == ["-t^2+x1", "-t^3+x2", "z-1"]


def test_circle_pipeline(circle):
    rep = variety_report(circle, seed=0)
    sys = rep.system
    tbl = sys.table
    order = sys.pipeline_order
    ap_expected = [poly(tbl, "d1^2-1+t^2"), poly(tbl, "x1-t"), poly(tbl, "x2-d1")]
    assert ideals_equal(list(rep.generators_auxiliary), ap_expected, order)
    # incidence component coincides with the auxiliary ideal here
    assert ideals_equal(list(rep.generators_incidence), ap_expected, order)
    assert ideals_equal(
        list(rep.generators_variety), [poly(tbl, "x1^2+x2^2-1")], order
    )
    assert ideals_equal(
        list(rep.generators_tower), [poly(tbl, "d1^2+t^2-1")], order
    )


def test_parabola_pipeline(parabolas):
    rep = variety_report(parabolas, seed=0)
    tbl = rep.system.table
    order = rep.system.pipeline_order
    assert ideals_equal(
        list(rep.generators_auxiliary),
        [poly(tbl, "d1^4-t^2"), poly(tbl, "x1-d1"), poly(tbl, "x2-t")],
        order,
    )
    assert ideals_equal(
        list(rep.generators_incidence),
        [poly(tbl, "d1^2-t"), poly(tbl, "x1-d1"), poly(tbl, "x2-t")],
        order,
    )
    assert rep.flags["BP_certified"] is True
    assert ideals_equal(list(rep.generators_variety), [poly(tbl, "x1^2-x2")], order)
    assert rep.combinations_examined <= 4  # bounded by the tower degree product


def test_surface_pipeline(surface):
    rep = variety_report(surface, seed=0)
    tbl = rep.system.table
    order = rep.system.pipeline_order
    eq7 = [
        poly(tbl, "x1-t2"),
        poly(tbl, "x3-t1"),
        poly(tbl, "x2*t1^5+x2*d1+2*t2*t1"),
        poly(tbl, "t1^10-4*t1*t2^3-d1^2-4*t1"),
        poly(tbl, "x2^2*t2^3-x2*d1*t2-t1*t2^2+x2^2"),
        poly(tbl, "t2*t1^5+2*x2*t2^3-d1*t2+2*x2"),
    ]
    assert ideals_equal(list(rep.generators_auxiliary), eq7, order)
    assert ideals_equal(list(rep.generators_incidence), eq7, order)
    vp = [poly(tbl, "x1*x3^5*x2+x1^3*x2^2+x1^2*x3+x2^2")]
    assert ideals_equal(list(rep.generators_variety), vp, order)
    vt = [poly(tbl, "4*t1*t2^3+d1^2+4*t1-t1^10")]
    assert ideals_equal(list(rep.generators_tower), vt, order)


def test_two_level_tower_variety():
    P = build_parametrization(
        ["root(t,3)", "sqrt(1-root(t,3)^2)"], ["t"], [GaussianRational(Fraction(1, 8))],
        {
            radical_key("root(t,3)"): 0.5,
            radical_key("sqrt(1-root(t,3)^2)"): 0.8660254037844386,
        },
        seed=0,
    )
    rep = variety_report(P, seed=0)
    tbl = rep.system.table
    order = rep.system.pipeline_order
    vt = [poly(tbl, "d1^3-t"), poly(tbl, "d2^2-(1-d1^2)")]
    assert ideals_equal(list(rep.generators_tower), vt, order)
    assert ideals_equal(
        list(rep.generators_variety), [poly(tbl, "x1^2+x2^2-1")], order
    )


def test_rational_tower_variety_is_empty():
    P = build_parametrization(["t^2", "t^3"], ["t"], [GaussianRational(1)], {}, seed=0)
    rep = variety_report(P, seed=0)
    assert rep.generators_tower == []
    tbl = rep.system.table
    assert ideals_equal(
        list(rep.generators_variety),
        [poly(tbl, "x1^3-x2^2")],
        rep.system.pipeline_order,
    )


def test_report_invariants(circle, parabolas, surface):
    for P in (circle, parabolas, surface):
        rep = variety_report(P, seed=0)
        assert max(
            v for k, v in rep.residuals.items() if k.endswith("_max")
        ) <= 1e-6
        order = rep.system.pipeline_order
        bp_ideal = Ideal(list(rep.generators_incidence), order)
        # containment: variety and tower generators lie in the incidence ideal
        for g in rep.generators_variety:
            assert bp_ideal.contains(g)
        for g in rep.generators_tower:
            assert bp_ideal.contains(g)
        # every auxiliary generator reduces to zero modulo the component
        for g in rep.generators_auxiliary:
            assert bp_ideal.contains(g)


def test_witness_sampler_determinism(circle):
    sys = IncidenceSystem(circle)
    w1 = sample_witnesses(sys, 5, seed=3)
    w2 = sample_witnesses(sys, 5, seed=3)
    assert w1 == w2
    w3 = sample_witnesses(sys, 5, seed=4)
    assert w1 != w3
