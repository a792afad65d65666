"""Build radical parametrizations from parsed component expressions.

Structurally distinct radical subtrees (after AST normalization) become
tower levels; identical radicands with identical index share a level.
Levels are emitted in dependency order: maximal radicals sorted by nesting
depth (deepest first) then first appearance, with each radical's inner
radicals emitted before it.  Structural (not semantic) identification is
deliberate: `root(t,6)*root(t,3)` does not merge with `sqrt(t)`; the
written structure is honored.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

from .expressions import (
    Div,
    Num,
    Pow,
    Root,
    Var,
    ast_to_ratfunc,
    ast_variables,
    iter_radicals,
    parse_expression,
    render_ast,
)
from .gaussian import GaussianRational
from .poly import MultiPoly, RatFunc, VarTable
from .tower import (
    BranchContext,
    BranchSpec,
    RadicalParametrization,
    RadicalTower,
    TowerElement,
    TowerLevel,
    tower_invert,
)


class BuildError(ValueError):
    pass


def _radical_depth(node) -> int:
    inner = list(iter_radicals(node.arg))
    if not inner:
        return 1
    return 1 + max(_radical_depth(r) for r in inner)


def _collect_radicals(asts) -> List:
    """All distinct radical subtrees with (depth, appearance) metadata."""
    seen: Dict[str, dict] = {}
    counter = 0

    def walk(node):
        nonlocal counter
        for r in iter_radicals(node):
            key = render_ast(r)
            if key not in seen:
                seen[key] = {
                    "node": r,
                    "key": key,
                    "depth": _radical_depth(r),
                    "appearance": counter,
                }
                counter += 1
            else:
                counter += 1
            walk(r.arg)

    for ast in asts:
        walk(ast)
    return list(seen.values())


def order_tower_levels(asts) -> List:
    """Radical nodes in tower-level order (dependencies first)."""
    infos = _collect_radicals(asts)
    infos.sort(key=lambda d: (-d["depth"], d["appearance"]))
    emitted: List[str] = []
    order: List = []

    def emit(info):
        if info["key"] in emitted:
            return
        for r in iter_radicals(info["node"].arg):
            key = render_ast(r)
            inner = next(i for i in infos if i["key"] == key)
            emit(inner)
        emitted.append(info["key"])
        order.append(info)

    for info in infos:
        emit(info)
    return order


def build_tower(component_asts, param_names: Sequence[str]) -> RadicalTower:
    """The structural radical tower of a tuple of expressions."""
    levels_info = order_tower_levels(component_asts)
    m = len(levels_info)
    delta_names = [f"d{i+1}" for i in range(m)]
    key_to_name = {info["key"]: delta_names[i] for i, info in enumerate(levels_info)}
    joint = VarTable(
        tuple(param_names) + tuple(delta_names),
        ["T"] * len(param_names) + ["Delta"] * m,
    )

    def hook(root_node):
        name = key_to_name[render_ast(root_node)]
        return RatFunc.from_poly(MultiPoly.variable(joint, name))

    levels = []
    for i, info in enumerate(levels_info):
        radicand = ast_to_ratfunc(info["node"].arg, joint, hook)
        levels.append(
            TowerLevel(delta_names[i], info["node"].index, radicand, info["key"])
        )
    return RadicalTower(param_names, levels)


def ast_to_tower_element(ast, ctx: BranchContext, key_to_level: Dict[str, int]) -> TowerElement:
    tower = ctx.tower

    def conv(node) -> TowerElement:
        if isinstance(node, Num):
            return TowerElement.from_const(ctx, node.value)
        if isinstance(node, Var):
            if node.name not in tower.param_names:
                raise BuildError(f"unknown variable {node.name!r} in a component")
            return TowerElement.from_param(ctx, node.name)
        if isinstance(node, Root):
            return TowerElement.from_delta(ctx, key_to_level[render_ast(node)])
        if isinstance(node, Div):
            return conv(node.num) / conv(node.den)
        if isinstance(node, Pow):
            base = conv(node.base)
            if node.exp < 0:
                return tower_invert(base) ** (-node.exp)
            return base**node.exp
        if node.__class__.__name__ == "Add":
            acc = TowerElement.from_const(ctx, GaussianRational(0))
            for a in node.args:
                acc = acc + conv(a)
            return acc
        if node.__class__.__name__ == "Mul":
            acc = TowerElement.from_const(ctx, GaussianRational(1))
            for a in node.args:
                acc = acc * conv(a)
            return acc
        raise BuildError(f"unsupported node in a component expression: {node!r}")

    return conv(ast)


def radical_key(text: str) -> str:
    """Canonical key of a radical expression as written by the user."""
    node = parse_expression(text)
    if not isinstance(node, Root):
        raise BuildError(f"branch value key is not a radical: {text!r}")
    return render_ast(node)


def build_parametrization(
    component_texts: Sequence[str],
    param_names: Sequence[str],
    base_point: Sequence[GaussianRational],
    radical_values: Dict[str, complex],
    tol: float = 1e-8,
    seed: int = 0,
    check_rank: bool = True,
):
    """Parse component expressions and assemble a branch-checked parametrization.

    `radical_values` maps the canonical rendering of each distinct radical
    subtree to its numeric value at the base point.
    """
    asts = [parse_expression(s) for s in component_texts]
    used = set()
    for a in asts:
        used |= ast_variables(a)
    unknown = used - set(param_names)
    if unknown:
        raise BuildError(f"unknown variables in components: {sorted(unknown)}")
    tower = build_tower(asts, param_names)
    key_to_level = {lv.radical_key: i for i, lv in enumerate(tower.levels)}
    values = []
    for lv in tower.levels:
        if lv.radical_key not in radical_values:
            raise BuildError(f"missing branch value for radical {lv.radical_key}")
        values.append(radical_values[lv.radical_key])
    extra = set(radical_values) - set(key_to_level)
    if extra:
        raise BuildError(f"branch values for unknown radicals: {sorted(extra)}")
    branch = BranchSpec(list(base_point), values)
    ctx = BranchContext(tower, branch, tol=tol, seed=seed)
    components = [ast_to_tower_element(a, ctx, key_to_level) for a in asts]
    return RadicalParametrization(ctx, components, check_rank=check_rank)


def build_integrand(
    integrand_text: str,
    param_name: str,
    base_point: Sequence[GaussianRational],
    radical_values: Dict[str, complex],
    tol: float = 1e-8,
    seed: int = 0,
):
    """Build a one-variable integrand and the auxiliary parametrization
    (t, d_1, ..., d_m) used to implicitize its tower variety."""
    ast = parse_expression(integrand_text)
    used = ast_variables(ast)
    if not used <= {param_name}:
        raise BuildError(f"integrand must use only {param_name!r}")
    tower = build_tower([ast], [param_name])
    key_to_level = {lv.radical_key: i for i, lv in enumerate(tower.levels)}
    values = []
    for lv in tower.levels:
        if lv.radical_key not in radical_values:
            raise BuildError(f"missing branch value for radical {lv.radical_key}")
        values.append(radical_values[lv.radical_key])
    branch = BranchSpec(list(base_point), values)
    ctx = BranchContext(tower, branch, tol=tol, seed=seed)
    f = ast_to_tower_element(ast, ctx, key_to_level)
    if tower.m == 0:
        return f, None
    aux_components = [TowerElement.from_param(ctx, param_name)] + [
        TowerElement.from_delta(ctx, i) for i in range(tower.m)
    ]
    aux = RadicalParametrization(ctx, aux_components, check_rank=False)
    return f, aux
