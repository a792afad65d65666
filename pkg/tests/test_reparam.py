from fractions import Fraction

from radtower.build import build_parametrization, radical_key
from radtower.gaussian import GaussianRational
from radtower.poly import RatFunc, VarTable
from radtower.reparam import (
    Hypersurface,
    find_multiple_point,
    plane_curve_genus_naive,
    ratparam,
    ratparam_monoid,
    reparametrize,
)
from radtower.varieties import variety_report

from .helpers import poly, table


TD2 = table("t1", "t2", "d")


def _apply(F, ambient, comps):
    tbl = F.vars
    mapping = {tbl.index(nm): comps[i] for i, nm in enumerate(ambient)}
    return RatFunc.from_poly(F).subst_ratfuncs(mapping)


# -- multiple points ------------------------------------------------------------


def test_monoid_origin_point():
    # d^n = homogeneous degree n-1 form: (n-1)-fold point at the origin
    F = poly(TD2, "d^4-t1^2*t2")
    H = Hypersurface(F, ["t1", "t2", "d"])
    point, mult = find_multiple_point(H)
    assert all(not c for c in point)
    assert mult == 3


def test_quadric_origin():
    F = poly(TD2, "d^2-2*t1-2*t2")
    H = Hypersurface(F, ["t1", "t2", "d"])
    point, mult = find_multiple_point(H)
    assert mult == 1


def test_smooth_cubic_has_no_multiple_point():
    tbl = table("x", "y", "z", classes=["X", "X", "X"])
    F = poly(tbl, "x^3+y^3+z^3-1")
    assert find_multiple_point(Hypersurface(F, ["x", "y", "z"])) is None


# -- parametrization by lines ------------------------------------------------------


def test_monoid_parametrizes_quadric():
    F = poly(TD2, "d^2-2*t1-2*t2")
    H = Hypersurface(F, ["t1", "t2", "d"])
    point, mult = find_multiple_point(H)
    rmap = ratparam_monoid(H, point, mult)
    assert rmap.birational
    val = _apply(H.F, ["t1", "t2", "d"], rmap.components)
    assert val.num.is_zero()


def test_monoid_parametrizes_quartic():
    F = poly(TD2, "d^4-t1^2*t2")
    H = Hypersurface(F, ["t1", "t2", "d"])
    point, mult = find_multiple_point(H)
    rmap = ratparam_monoid(H, point, mult)
    assert rmap.birational
    val = _apply(H.F, ["t1", "t2", "d"], rmap.components)
    assert val.num.is_zero()
    # the displayed classical map lies on the same surface
    h = VarTable(("h1", "h2"), ("Aux", "Aux"))
    classical = [
        RatFunc.from_poly(poly(h, "h1^2")),
        RatFunc.from_poly(poly(h, "h2^4")),
        RatFunc.from_poly(poly(h, "h1*h2")),
    ]
    assert _apply(H.F, ["t1", "t2", "d"], classical).num.is_zero()


def test_circle_stereographic():
    tbl = table("x", "y", classes=["X", "X"])
    F = poly(tbl, "x^2+y^2-1")
    H = Hypersurface(F, ["x", "y"])
    point, mult = find_multiple_point(H)
    rmap = ratparam_monoid(H, point, mult)
    assert rmap.birational
    assert _apply(F, ["x", "y"], rmap.components).num.is_zero()
    # degree check: both coordinates are quadratic rational functions
    assert all(rf.num.total_degree() <= 2 and rf.den.total_degree() <= 2
               for rf in rmap.components)


def test_ratparam_driver_solves_linear_variable():
    rmap = ratparam([poly(TD2, "d^2-2*t1-2*t2")], ["t1", "t2", "d"], TD2)
    assert rmap is not None and rmap.birational
    assert _apply(poly(TD2, "d^2-2*t1-2*t2"), ["t1", "t2", "d"], rmap.components).num.is_zero()


# -- naive genus --------------------------------------------------------------------


def test_fermat_cubic_genus_one():
    tbl = table("t", "d")
    F = poly(tbl, "t^3+d^3-1")
    genus, valid = plane_curve_genus_naive(F, ["t", "d"])
    assert (genus, valid) == (1, True)


def test_conic_genus_zero():
    tbl = table("t", "d")
    F = poly(tbl, "d^2-2*t-3")
    genus, valid = plane_curve_genus_naive(F, ["t", "d"])
    assert (genus, valid) == (0, True)


def test_nodal_cubic_genus_zero():
    tbl = table("t", "d")
    F = poly(tbl, "d^2-t^2*(t+1)")
    genus, valid = plane_curve_genus_naive(F, ["t", "d"])
    assert (genus, valid) == (0, True)


def test_irrational_nodes_invalidate():
    # nodes at t = +-sqrt(2): the singular solver finds no rational points
    tbl = table("t", "d")
    F = poly(tbl, "d^2-(t^2-2)^2*(t+1)")
    genus, valid = plane_curve_genus_naive(F, ["t", "d"])
    assert valid is False


# -- the full algorithm ----------------------------------------------------------------


def _pipeline(comps, params, base, values, seed=0):
    P = build_parametrization(comps, params, base, values, seed=seed)
    rep = variety_report(P, seed=seed)
    return P, rep


def test_reparametrize_circle_cubicroot():
    P, rep = _pipeline(
        ["root(t,3)", "sqrt(1-root(t,3)^2)"], ["t"], [GaussianRational(Fraction(1, 8))],
        {
            radical_key("root(t,3)"): 0.5,
            radical_key("sqrt(1-root(t,3)^2)"): 0.8660254037844386,
        },
    )
    out = reparametrize(P, rep, seed=0)
    assert out.kind == "reparametrized"
    tbl = rep.system.table
    circle = poly(tbl, "x1^2+x2^2-1")
    mapping = {tbl.index("x1"): out.new_components[0], tbl.index("x2"): out.new_components[1]}
    assert RatFunc.from_poly(circle).subst_ratfuncs(mapping).num.is_zero()


def test_reparametrize_tubular_surface():
    P, rep = _pipeline(
        ["t1", "(1/4)*sqrt(2*t1+2*t2)*(t1-t2)", "t2"], ["t1", "t2"],
        [GaussianRational(1), GaussianRational(1)],
        {radical_key("sqrt(2*t1+2*t2)"): 2.0},
    )
    out = reparametrize(P, rep, seed=0)
    assert out.kind == "reparametrized"
    tbl = rep.system.table
    F = poly(tbl, "x1^3-x1^2*x3-x1*x3^2+x3^3-8*x2^2")
    mapping = {
        tbl.index(nm): out.new_components[j] for j, nm in enumerate(["x1", "x2", "x3"])
    }
    assert RatFunc.from_poly(F).subst_ratfuncs(mapping).num.is_zero()


def test_reparametrize_monoid_surface():
    P, rep = _pipeline(
        ["t1", "t2", "t1^3*t2*root(t1^2*t2,4)/(t2^2+t1)"], ["t1", "t2"],
        [GaussianRational(1), GaussianRational(1)],
        {radical_key("root(t1^2*t2,4)"): 1.0},
    )
    out = reparametrize(P, rep, seed=0)
    assert out.kind == "reparametrized"
    # the returned components satisfy every implicit equation exactly
    tbl = rep.system.table
    for g in rep.generators_variety:
        mapping = {
            tbl.index(nm): out.new_components[j]
            for j, nm in enumerate(rep.system.x_names)
        }
        assert RatFunc.from_poly(g).subst_ratfuncs(mapping).num.is_zero()


def test_not_rational_elliptic():
    P, rep = _pipeline(
        ["t", "sqrt(t^3-1)"], ["t"], [GaussianRational(2)],
        {radical_key("sqrt(t^3-1)"): 7**0.5},
    )
    out = reparametrize(P, rep, seed=0)
    assert out.kind == "not_rational"
    assert out.evidence == {"tracing_index": 1, "genus": 1, "genus_valid": True}


def test_no_answer_fermat_cubic_diagonal():
    P, rep = _pipeline(
        ["root(1-t^3,3)", "root(1-t^3,3)"], ["t"], [GaussianRational(0)],
        {radical_key("root(1-t^3,3)"): 1.0},
    )
    out = reparametrize(P, rep, seed=0)
    assert out.kind == "no_answer"
    assert out.evidence.get("tracing_index") == 3


def test_rational_input_reparametrizes_trivially():
    P, rep = _pipeline(["t^2", "t^3"], ["t"], [GaussianRational(1)], {})
    out = reparametrize(P, rep, seed=0)
    assert out.kind == "reparametrized"
    tbl = rep.system.table
    g = poly(tbl, "x1^3-x2^2")
    mapping = {tbl.index("x1"): out.new_components[0], tbl.index("x2"): out.new_components[1]}
    assert RatFunc.from_poly(g).subst_ratfuncs(mapping).num.is_zero()
