"""Arithmetic in radical towers with explicit branch choices.

A tower adjoins d_i with d_i^{e_i} = alpha_i, alpha_i a rational expression
in the parameters and earlier d's.  Elements live in the quotient algebra
Q(i)(t...)[d...]/(tower relations + discovered branch relations) and are
represented as fractions of reduced algebra representatives (polynomials in
the d variables, d_i-degree below e_i, with rational-function coefficients
in the parameters).

The branch is a base point with one numeric root value per level.  All
exact computation happens in the quotient algebra; the branch only selects
among zero-divisor factors, filters components downstream, and provides
numeric checks.  Zero divisors are discovered lazily: when inversion fails,
the kernel witness that vanishes numerically on the branch is appended to
the relation set and the algebra shrinks.

Branch evaluation is analytic continuation along the straight segment from
the base point, with adaptive stepping and seeded random detours around
radicand/denominator zeros.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

import numpy as np

from .gaussian import GR_ONE, GaussianRational
from .groebner import buchberger, normal_form
from .poly import MonomialOrder, MultiPoly, RatFunc, VarTable


class TowerError(Exception):
    pass


class BranchSpecError(TowerError):
    """Branch data inconsistent with the tower at the base point."""


class IdenticallyZeroOnBranch(TowerError):
    """An element (typically a denominator) vanishes identically on the branch."""


class ContinuationError(TowerError):
    """Branch continuation could not reach the target point."""


class InconclusiveNumeric(TowerError):
    """A numeric zero test stayed in the ambiguous band after re-evaluation."""


class JacobianRankError(TowerError):
    pass


class TowerLevel:
    __slots__ = ("name", "exponent", "radicand", "radical_key")

    def __init__(self, name: str, exponent: int, radicand: RatFunc, radical_key: str = ""):
        if exponent < 2:
            raise ValueError("root index must be >= 2")
        self.name = name
        self.exponent = exponent
        self.radicand = radicand  # over the joint (params, deltas) table
        self.radical_key = radical_key  # canonical source expression, if any

    def __repr__(self):
        return f"TowerLevel({self.name}^{self.exponent} = {self.radicand.render()})"


class RadicalTower:
    """Ordered tower levels over named parameters."""

    def __init__(self, param_names: Sequence[str], levels: Sequence[TowerLevel]):
        self.param_names = tuple(param_names)
        self.levels = list(levels)
        self.t_table = VarTable(self.param_names, ["T"] * len(self.param_names))
        delta_names = [lv.name for lv in levels]
        self.delta_table = VarTable(delta_names, ["Delta"] * len(levels))
        self.joint = VarTable(
            self.param_names + tuple(delta_names),
            ["T"] * len(self.param_names) + ["Delta"] * len(levels),
        )
        # highest level most significant so relations rewrite downwards
        self.delta_order = MonomialOrder("lex", list(reversed(range(len(levels)))))
        for i, lv in enumerate(self.levels):
            allowed = set(self.param_names) | {l.name for l in self.levels[:i]}
            for p in (lv.radicand.num, lv.radicand.den):
                for v in p.active_vars():
                    if p.vars.names[v] not in allowed:
                        raise ValueError(
                            f"radicand of {lv.name} uses {p.vars.names[v]}, "
                            "which is not an earlier level or parameter"
                        )

    @property
    def n(self) -> int:
        return len(self.param_names)

    @property
    def m(self) -> int:
        return len(self.levels)

    def exponents(self) -> tuple:
        return tuple(lv.exponent for lv in self.levels)


class BranchSpec:
    """Base point plus one numeric root value per tower level."""

    def __init__(self, base_point: Sequence[GaussianRational], root_values: Sequence[complex]):
        self.base_point = tuple(base_point)
        self.root_values = tuple(complex(v) for v in root_values)


# ---------------------------------------------------------------------------
# conversions between the joint polynomial ring and the quotient algebra
# ---------------------------------------------------------------------------


def joint_to_algebra(tower: RadicalTower, p: MultiPoly) -> MultiPoly:
    """Joint-table polynomial -> delta polynomial with RatFunc coefficients."""
    n = tower.n
    terms: dict = {}
    p = p.embed(tower.joint)
    for e, c in p.terms.items():
        te, de = e[:n], e[n:]
        mono = MultiPoly.monomial(tower.t_table, te, c)
        cur = terms.get(de)
        terms[de] = mono if cur is None else cur + mono
    out = {}
    for de, poly in terms.items():
        if poly.is_zero():
            continue
        out[de] = RatFunc.from_poly(poly)
    return MultiPoly(tower.delta_table, out)


def algebra_to_joint(tower: RadicalTower, a: MultiPoly):
    """Delta polynomial with RatFunc coefficients -> (num, den) joint polys.

    den is a parameter-only polynomial (the common coefficient denominator).
    """
    from .poly import exact_divide, gcd_multivariate

    n = tower.n
    den = MultiPoly.const(tower.t_table, GR_ONE)
    for c in a.terms.values():
        g = gcd_multivariate(den, c.den)
        den = den * exact_divide(c.den, g)
    num = MultiPoly.zero(tower.joint)
    for de, c in a.terms.items():
        scaled = c.num * exact_divide(den, c.den)
        for te, k in scaled.terms.items():
            full = te + de
            cur = num.terms.get(full)
            s = k if cur is None else cur + k
            if s:
                num.terms[full] = s
            elif cur is not None:
                del num.terms[full]
    return num, den.embed(tower.joint)


# ---------------------------------------------------------------------------
# branch context: relations, reduction, continuation
# ---------------------------------------------------------------------------


class BranchContext:
    """Tower + branch + lazily discovered branch relations.

    The relation set grows monotonically; operations on elements of one
    parametrization are serialized on this object.
    """

    def __init__(
        self,
        tower: RadicalTower,
        branch: BranchSpec,
        tol: float = 1e-8,
        seed: int = 0,
    ):
        self.tower = tower
        self.branch = branch
        self.tol = tol
        self.seed = seed
        self._detour_rng = random.Random(seed * 1000003 + 17)
        self.relations_joint: list = []  # discovered relations, joint polynomials
        if len(branch.base_point) != tower.n:
            raise BranchSpecError("base point arity mismatch")
        if len(branch.root_values) != tower.m:
            raise BranchSpecError("one root value per tower level required")
        self._algebra_alphas: list = []
        self.gb: list = []
        self._deriv_cache: dict = {}
        self._check_branch_consistency()
        self._rebuild_gb()

    # -- algebra structure -------------------------------------------------

    def _alpha_algebra(self, i: int) -> MultiPoly:
        """Radicand of level i as a reduced algebra element (delta-free den)."""
        lv = self.tower.levels[i]
        num_a = joint_to_algebra(self.tower, lv.radicand.num)
        den_a = joint_to_algebra(self.tower, lv.radicand.den)
        if all(not any(e) for e in den_a.terms):
            # parameter-only denominator: fold into the coefficients
            c = den_a.terms.get((0,) * self.tower.m)
            inv = RatFunc(c.den, c.num)
            return self.reduce(num_a.scale(inv))
        inv = self._invert_algebra(self.reduce(den_a))
        return self.reduce(num_a * inv)

    def _rebuild_gb(self):
        tower = self.tower
        rels = []
        self._algebra_alphas = []
        for i, lv in enumerate(tower.levels):
            e = [0] * tower.m
            e[i] = lv.exponent
            head = MultiPoly.monomial(
                tower.delta_table, tuple(e), RatFunc.one(tower.t_table)
            )
            self.gb = buchberger(rels, tower.delta_order) if rels else []
            alpha = self._alpha_algebra(i)
            if alpha.is_zero():
                # a zero radicand would make the level redundant (its root is 0)
                raise BranchSpecError(
                    f"radicand of {lv.name} is zero in the tower algebra"
                )
            self._algebra_alphas.append(alpha)
            rels.append(head - alpha)
        extra = [joint_to_algebra(tower, r) for r in self.relations_joint]
        self.gb = buchberger(rels + extra, tower.delta_order)
        self._deriv_cache = {}

    def reduce(self, p: MultiPoly) -> MultiPoly:
        if not self.gb:
            return p
        return normal_form(p, self.gb, self.tower.delta_order)

    def standard_monomials(self, missing_bound: Optional[int] = None) -> list:
        """Monomial basis below the relation leading terms.

        During tower construction later levels have no relations yet;
        `missing_bound=1` restricts to the subalgebra of defined levels.
        """
        lts = [g.leading(self.tower.delta_order)[0] for g in self.gb]
        bounds = []
        for v in range(self.tower.m):
            best = None
            for e in lts:
                if e[v] and all(k == 0 for i, k in enumerate(e) if i != v):
                    best = e[v] if best is None else min(best, e[v])
            if best is None:
                if missing_bound is None:
                    raise TowerError("tower algebra is not finite over the parameters")
                best = missing_bound
            bounds.append(best)
        from .poly import mono_divides

        out = []
        stack = [(0, [])]
        while stack:
            pos, expo = stack.pop()
            if pos == self.tower.m:
                full = tuple(expo)
                if not any(mono_divides(lt, full) for lt in lts):
                    out.append(full)
                continue
            for k in range(bounds[pos]):
                stack.append((pos + 1, expo + [k]))
        out.sort()
        return out

    # -- numeric branch machinery -------------------------------------------

    def _roots(self, value: complex, e: int) -> list:
        import cmath

        if value == 0:
            return [0j] * e
        r = abs(value) ** (1.0 / e)
        phi = cmath.phase(value)
        return [r * cmath.exp(1j * (phi + 2 * cmath.pi * k) / e) for k in range(e)]

    def _eval_radicand(self, i: int, tvals, dvals):
        """(value, ok) of alpha_i at numeric coordinates; ok=False near zeros."""
        lv = self.tower.levels[i]
        env = {}
        joint = self.tower.joint
        for k, name in enumerate(self.tower.param_names):
            env[joint.index(name)] = tvals[k]
        for k in range(i):
            env[joint.index(self.tower.levels[k].name)] = dvals[k]
        num = lv.radicand.num.evaluate(env)
        den = lv.radicand.den.evaluate(env)
        nscale = max(1.0, lv.radicand.num.eval_scale(env))
        dscale = max(1.0, lv.radicand.den.eval_scale(env))
        if abs(den) < 1e-6 * dscale or abs(num) < 1e-6 * nscale:
            return None, False
        return num / den, True

    def _alphas_at(self, tvals, dvals):
        alphas = []
        for i in range(self.tower.m):
            a, ok = self._eval_radicand(i, tvals, dvals)
            if not ok:
                return None
            alphas.append(a)
        return alphas

    def _step(self, tvals, prev, prev_alphas):
        """One continuation step: nearest-root update for every level.

        A step is only accepted when it resolves the radicand's variation
        (bounded argument rotation and relative magnitude change), which
        keeps nearest-root tracking on the analytic sheet.
        """
        import cmath

        vals = []
        alphas = []
        for i, lv in enumerate(self.tower.levels):
            a, ok = self._eval_radicand(i, tvals, vals)
            if not ok:
                return None, None, "near-discriminant"
            ap = prev_alphas[i]
            if abs(a - ap) > 0.6 * max(abs(a), abs(ap)):
                return None, None, "resolve"
            if abs(cmath.phase(a / ap)) > 0.6:
                return None, None, "resolve"
            roots = self._roots(a, lv.exponent)
            dists = sorted(range(len(roots)), key=lambda k: abs(roots[k] - prev[i]))
            nearest = roots[dists[0]]
            if len(roots) > 1:
                margin = abs(roots[dists[0]] - prev[i]) / max(
                    abs(roots[dists[1]] - prev[i]), 1e-300
                )
                if margin > 0.5:
                    return None, None, "margin"
            vals.append(nearest)
            alphas.append(a)
        return vals, alphas, None

    def _segment_hits_zero(self, t_from, t_to) -> bool:
        """Exact proximity scan: does a parameter-only radicand numerator or
        any denominator vanish on or near the straight segment?

        Radicands that involve earlier roots are algebraic along the segment
        and cannot be scanned this way; those rely on the stepping checks.
        """
        n = self.tower.n
        dir_ = [b - a for a, b in zip(t_from, t_to)]
        if all(abs(d) == 0 for d in dir_):
            return False
        polys = []
        for lv in self.tower.levels:
            for p in (lv.radicand.num, lv.radicand.den):
                if p.is_constant():
                    continue
                if any(any(e[n:]) for e in p.terms):
                    continue
                polys.append(p)
        for p in polys:
            deg = p.total_degree()
            coeffs = np.zeros(deg + 1, dtype=complex)
            for e, c in p.terms.items():
                arr = np.array([complex(c)], dtype=complex)
                for k in range(n):
                    for _ in range(e[k]):
                        arr = np.convolve(arr, np.array([t_from[k], dir_[k]]))
                coeffs[: len(arr)] += arr
            # strip leading (high-order) zeros; coeffs are low-first
            nz = np.nonzero(np.abs(coeffs) > 1e-14 * (np.abs(coeffs).max() or 1.0))[0]
            if len(nz) == 0 or nz[-1] == 0:
                continue
            roots = np.roots(coeffs[: nz[-1] + 1][::-1])
            for rt in roots:
                re = min(max(rt.real, 0.0), 1.0)
                if abs(rt - re) <= 0.02:
                    return True
        return False

    def _run_segment(self, t_from, vals_from, t_to, depth):
        if depth > 6:
            raise ContinuationError("detour recursion limit reached")
        if self._segment_hits_zero(t_from, t_to):
            raise _NearDiscriminant()
        s = 0.0
        step = 0.25
        vals = list(vals_from)
        alphas = self._alphas_at(t_from, vals)
        if alphas is None:
            raise _NearDiscriminant()
        while s < 1.0 - 1e-15:
            ds = min(step, 1.0 - s)
            while True:
                tnew = [a + (b - a) * (s + ds) for a, b in zip(t_from, t_to)]
                tmid = [a + (b - a) * (s + ds / 2) for a, b in zip(t_from, t_to)]
                cand, calphas, reason = self._step(tnew, vals, alphas)
                if cand is not None:
                    mid, _, mreason = self._step(tmid, vals, alphas)
                    if mid is None and mreason == "near-discriminant":
                        raise _NearDiscriminant()
                    break
                if reason == "near-discriminant":
                    raise _NearDiscriminant()
                ds /= 2
                if ds < 1e-10:
                    # stalling is evidence of a branch point on the segment
                    raise _NearDiscriminant()
            vals = cand
            alphas = calphas
            s += ds
            step = min(0.25, ds * 2)
        return vals

    def continue_deltas(self, target: Sequence[complex]) -> list:
        """Branch values of all levels at the target parameter point."""
        base_t = [complex(c) for c in self.branch.base_point]
        target = [complex(v) for v in target]
        for attempt in range(6):
            try:
                return self._continue_path(base_t, list(self.branch.root_values), target, 0)
            except _NearDiscriminant:
                continue
        raise ContinuationError(
            f"could not continue branch to {target} after detour retries"
        )

    def _continue_path(self, t_from, vals, t_to, depth):
        try:
            return self._run_segment(t_from, vals, t_to, depth)
        except _NearDiscriminant:
            if depth >= 5:
                raise
            span = max(abs(a - b) for a, b in zip(t_from, t_to))
            if span == 0:
                raise ContinuationError("base point on the discriminant set")
            rng = self._detour_rng
            mid = [
                (a + b) / 2 + span * complex(rng.uniform(-0.6, 0.6), rng.uniform(0.2, 0.8))
                for a, b in zip(t_from, t_to)
            ]
            half = self._continue_path(t_from, vals, mid, depth + 1)
            return self._continue_path(mid, half, t_to, depth + 1)

    def probe_points(self, count: int) -> list:
        """Deterministic pseudo-random targets near the base point."""
        rng = random.Random(self.seed * 1000003 + 29)
        base = [complex(c) for c in self.branch.base_point]
        pts = []
        while len(pts) < count:
            pt = [
                b + complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)) for b in base
            ]
            pts.append(pt)
        return pts

    def eval_algebra(self, p: MultiPoly, tvals, dvals):
        """(value, scale) of a delta polynomial at numeric coordinates."""
        env = {i: tvals[i] for i in range(self.tower.n)}
        total = 0j
        scale = 0.0
        for e, c in p.terms.items():
            num = c.num.evaluate(env)
            den = c.den.evaluate(env)
            v = num / den
            mag = abs(v)
            for i, k in enumerate(e):
                if k:
                    v *= dvals[i] ** k
                    mag *= abs(dvals[i]) ** k
            total += v
            scale += mag
        return total, max(1.0, scale)

    def is_zero_on_branch(self, p: MultiPoly, extra_points: int = 3) -> bool:
        """Numeric identically-zero test at the base plus continuation points."""
        if p.is_zero():
            return True
        samples = []
        base_t = [complex(c) for c in self.branch.base_point]
        samples.append((base_t, list(self.branch.root_values)))
        probes = self.probe_points(extra_points + 4)
        got = 0
        for pt in probes:
            if got >= extra_points:
                break
            try:
                dv = self.continue_deltas(pt)
            except (ContinuationError, ZeroDivisionError):
                continue
            samples.append((pt, dv))
            got += 1
        if got < extra_points:
            raise ContinuationError("not enough probe points for a zero test")
        ratios = []
        for tv, dv in samples:
            try:
                v, scale = self.eval_algebra(p, tv, dv)
            except ZeroDivisionError:
                continue
            ratios.append(abs(v) / scale)
        if not ratios:
            raise InconclusiveNumeric("zero test had no evaluable samples")
        if all(r <= self.tol for r in ratios):
            return True
        if all(r >= 1e-4 for r in ratios):
            return False
        # ambiguous band: re-evaluate at fresh points, then give up
        fresh = []
        for pt in self.probe_points(extra_points * 2 + 8)[::-1]:
            try:
                dv = self.continue_deltas(pt)
                v, scale = self.eval_algebra(p, pt, dv)
                fresh.append(abs(v) / scale)
            except (ContinuationError, ZeroDivisionError):
                continue
        if fresh and all(r <= self.tol for r in fresh):
            return True
        if fresh and all(r >= 1e-4 for r in fresh):
            return False
        raise InconclusiveNumeric("numeric zero decision in the ambiguous band")

    def _check_branch_consistency(self):
        tvals = [complex(c) for c in self.branch.base_point]
        dvals = []
        for i, lv in enumerate(self.tower.levels):
            a, ok = self._eval_radicand(i, tvals, dvals)
            if not ok:
                raise BranchSpecError(
                    f"radicand or denominator of {lv.name} vanishes at the base point"
                )
            v = self.branch.root_values[i]
            scale = max(1.0, abs(a))
            if abs(v ** lv.exponent - a) > max(self.tol, 1e-6) * scale:
                raise BranchSpecError(
                    f"branch value for {lv.name} is not an {lv.exponent}-th root "
                    f"of its radicand at the base point"
                )
            dvals.append(v)

    # -- relation discovery ---------------------------------------------------

    def add_relation(self, w: MultiPoly):
        """Append a verified branch relation and shrink the algebra."""
        _, lc = w.leading(self.tower.delta_order)
        w = w.scale_div(lc)
        # verify at fresh continuation points
        checked = 0
        for pt in self.probe_points(10):
            try:
                dv = self.continue_deltas(pt)
                v, scale = self.eval_algebra(w, pt, dv)
            except (ContinuationError, ZeroDivisionError):
                continue
            if abs(v) / scale > self.tol:
                raise InconclusiveNumeric(
                    "candidate branch relation does not vanish numerically"
                )
            checked += 1
            if checked >= 5:
                break
        if checked < 3:
            raise ContinuationError("could not verify a branch relation numerically")
        num, _den = algebra_to_joint(self.tower, w)
        self.relations_joint.append(num.normalized())
        self.gb = buchberger(self.gb + [w], self.tower.delta_order)
        self._deriv_cache = {}

    def _invert_algebra(self, u: MultiPoly) -> MultiPoly:
        """Inverse of a reduced algebra element, discovering relations as needed."""
        one = RatFunc.one(self.tower.t_table)
        zero = RatFunc.zero(self.tower.t_table)
        for _round in range(16):
            if u.is_zero():
                raise IdenticallyZeroOnBranch("cannot invert zero")
            basis = self.standard_monomials(missing_bound=1)
            basis_set = set(basis)
            for e in u.terms:
                if e not in basis_set:
                    raise TowerError(
                        "element to invert is not reduced to the current basis"
                    )
            index = {m: k for k, m in enumerate(basis)}
            cols = []
            for mono in basis:
                prod = self.reduce(u.mul_monomial(mono, one))
                vec = [zero] * len(basis)
                for e, c in prod.terms.items():
                    vec[index[e]] = vec[index[e]] + c
                cols.append(vec)
            rhs = [zero] * len(basis)
            rhs[index[(0,) * self.tower.m]] = one
            kind, vec = _field_solve(cols, rhs, zero, one)
            if kind == "unique":
                terms = {}
                for k, mono in enumerate(basis):
                    if vec[k]:
                        terms[mono] = vec[k]
                return MultiPoly(self.tower.delta_table, terms)
            witness = MultiPoly(
                self.tower.delta_table,
                {basis[k]: c for k, c in enumerate(vec) if c},
            )
            if self.is_zero_on_branch(u):
                raise IdenticallyZeroOnBranch(
                    "element vanishes identically on the chosen branch"
                )
            if not self.is_zero_on_branch(witness):
                raise InconclusiveNumeric(
                    "zero divisor found but neither factor vanishes on the branch"
                )
            self.add_relation(witness)
            u = self.reduce(u)
        raise TowerError("relation discovery did not stabilize")


class _NearDiscriminant(Exception):
    pass


def _field_solve(cols, rhs, zero, one):
    """Solve sum_k x_k cols[k] = rhs over a field.

    Returns ("unique", x) when the matrix is nonsingular, otherwise
    ("kernel", z) with a nonzero kernel vector (columns as unknowns).
    """
    n = len(rhs)
    m = len(cols)
    rows = [[cols[k][r] for k in range(m)] + [rhs[r]] for r in range(n)]
    piv_of_col = [-1] * m
    r = 0
    for c in range(m):
        piv = None
        for rr in range(r, n):
            if rows[rr][c]:
                piv = rr
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = one / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for rr in range(n):
            if rr != r and rows[rr][c]:
                f = rows[rr][c]
                rows[rr] = [a - f * b for a, b in zip(rows[rr], rows[r])]
        piv_of_col[c] = r
        r += 1
    free = [c for c in range(m) if piv_of_col[c] < 0]
    if not free:
        x = [zero] * m
        for c in range(m):
            x[c] = rows[piv_of_col[c]][m]
        return "unique", x
    # kernel vector: set the first free column to 1
    cf = free[0]
    z = [zero] * m
    z[cf] = one
    for c in range(m):
        if piv_of_col[c] >= 0:
            z[c] = zero - rows[piv_of_col[c]][cf]
    return "kernel", z


# ---------------------------------------------------------------------------
# tower elements
# ---------------------------------------------------------------------------


class TowerElement:
    """Fraction of reduced algebra representatives over a branch context."""

    __slots__ = ("ctx", "num", "den")

    def __init__(self, ctx: BranchContext, num: MultiPoly, den: Optional[MultiPoly] = None):
        self.ctx = ctx
        self.num = num
        if den is None:
            den = MultiPoly.const_coeff(
                ctx.tower.delta_table, RatFunc.one(ctx.tower.t_table)
            )
        self.den = den

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_const(ctx: BranchContext, c) -> "TowerElement":
        rf = RatFunc.const(ctx.tower.t_table, c)
        return TowerElement(ctx, MultiPoly.const_coeff(ctx.tower.delta_table, rf))

    @staticmethod
    def from_param(ctx: BranchContext, name: str) -> "TowerElement":
        rf = RatFunc.from_poly(MultiPoly.variable(ctx.tower.t_table, name))
        return TowerElement(ctx, MultiPoly.const_coeff(ctx.tower.delta_table, rf))

    @staticmethod
    def from_delta(ctx: BranchContext, i: int) -> "TowerElement":
        e = [0] * ctx.tower.m
        e[i] = 1
        return TowerElement(
            ctx,
            ctx.reduce(
                MultiPoly.monomial(
                    ctx.tower.delta_table, tuple(e), RatFunc.one(ctx.tower.t_table)
                )
            ),
        )

    @staticmethod
    def from_ratfunc(ctx: BranchContext, rf: RatFunc) -> "TowerElement":
        """From a rational function over the parameter or joint table."""
        num = ctx.reduce(joint_to_algebra(ctx.tower, rf.num.embed(ctx.tower.joint)))
        den = ctx.reduce(joint_to_algebra(ctx.tower, rf.den.embed(ctx.tower.joint)))
        return TowerElement(ctx, num, den)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other: "TowerElement") -> "TowerElement":
        if self.den == other.den:
            return TowerElement(self.ctx, self.ctx.reduce(self.num + other.num), self.den)
        num = self.num * other.den + other.num * self.den
        return TowerElement(
            self.ctx, self.ctx.reduce(num), self.ctx.reduce(self.den * other.den)
        )

    def __sub__(self, other: "TowerElement") -> "TowerElement":
        if self.den == other.den:
            return TowerElement(self.ctx, self.ctx.reduce(self.num - other.num), self.den)
        num = self.num * other.den - other.num * self.den
        return TowerElement(
            self.ctx, self.ctx.reduce(num), self.ctx.reduce(self.den * other.den)
        )

    def __neg__(self) -> "TowerElement":
        return TowerElement(self.ctx, -self.num, self.den)

    def __mul__(self, other: "TowerElement") -> "TowerElement":
        return TowerElement(
            self.ctx,
            self.ctx.reduce(self.num * other.num),
            self.ctx.reduce(self.den * other.den),
        )

    def __truediv__(self, other: "TowerElement") -> "TowerElement":
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero tower element")
        delta_free = all(not any(e) for e in other.num.terms)
        if not delta_free and other.ctx.is_zero_on_branch(other.num):
            raise IdenticallyZeroOnBranch(
                "denominator vanishes identically on the chosen branch"
            )
        return TowerElement(
            self.ctx,
            self.ctx.reduce(self.num * other.den),
            self.ctx.reduce(self.den * other.num),
        )

    def __pow__(self, k: int) -> "TowerElement":
        if k < 0:
            return tower_invert(self) ** (-k)
        out = TowerElement.from_const(self.ctx, GR_ONE)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def semantically_equal(self, other: "TowerElement") -> bool:
        d = self.num * other.den - other.num * self.den
        return self.ctx.reduce(d).is_zero()

    # -- numerics ----------------------------------------------------------------

    def evaluate(self, target: Sequence[complex]) -> complex:
        dv = self.ctx.continue_deltas(target)
        tv = [complex(v) for v in target]
        nv, _ = self.ctx.eval_algebra(self.num, tv, dv)
        dvv, dscale = self.ctx.eval_algebra(self.den, tv, dv)
        if abs(dvv) < 1e-12 * dscale:
            raise ZeroDivisionError("denominator numerically zero at the target")
        return nv / dvv

    # -- joint representation ------------------------------------------------------

    def joint_fraction(self):
        """(num, den) as coprime joint-table polynomials with normalized den."""
        from .poly import exact_divide, gcd_multivariate

        n1, d1 = algebra_to_joint(self.ctx.tower, self.num)
        n2, d2 = algebra_to_joint(self.ctx.tower, self.den)
        num = n1 * d2
        den = n2 * d1
        rf = RatFunc(num, den)
        return rf.num, rf.den

    def render(self) -> str:
        num, den = self.joint_fraction()
        rf = RatFunc(num, den, reduce=False)
        return rf.render()

    def __repr__(self):
        return f"TowerElement<{self.render()}>"


def tower_add(x: TowerElement, y: TowerElement) -> TowerElement:
    return x + y


def tower_mul(x: TowerElement, y: TowerElement) -> TowerElement:
    return x * y


def tower_invert(x: TowerElement) -> TowerElement:
    """Inverse via the linear system on the reduced monomial basis.

    Requires x nonzero on the branch; may discover branch relations.
    """
    ctx = x.ctx
    if x.num.is_zero():
        raise ZeroDivisionError("cannot invert zero")
    if ctx.is_zero_on_branch(x.num):
        raise IdenticallyZeroOnBranch("element vanishes identically on the chosen branch")
    inv_num = ctx._invert_algebra(ctx.reduce(x.num))
    return TowerElement(ctx, ctx.reduce(x.den * inv_num))


def tower_derive(x: TowerElement, j: int) -> TowerElement:
    """Partial derivative with respect to parameter j (0-based)."""
    ctx = x.ctx
    dn = _algebra_derivative(ctx, x.num, j)
    den_el = TowerElement(ctx, x.den)
    if all(not any(e) for e in x.den.terms) and all(
        c.den.is_constant() and c.num.is_constant() for c in x.den.terms.values()
    ):
        # constant denominator: derivative passes straight through
        return TowerElement(ctx, dn.num, ctx.reduce(dn.den * x.den))
    dd = _algebra_derivative(ctx, x.den, j)
    num_el = TowerElement(ctx, x.num)
    # (n/d)' = (n'd - nd')/d^2
    top = dn * den_el - num_el * dd
    return TowerElement(
        ctx, top.num, ctx.reduce(top.den * x.den * x.den)
    )


def _delta_derivative(ctx: BranchContext, i: int, j: int) -> TowerElement:
    key = (i, j)
    cached = ctx._deriv_cache.get(key)
    if cached is not None:
        return cached
    lv = ctx.tower.levels[i]
    alpha = ctx._algebra_alphas[i]
    dalpha = _algebra_derivative(ctx, alpha, j)
    e = [0] * ctx.tower.m
    e[i] = lv.exponent - 1
    denom = MultiPoly.monomial(
        ctx.tower.delta_table,
        tuple(e),
        RatFunc.const(ctx.tower.t_table, GaussianRational(lv.exponent)),
    )
    result = TowerElement(ctx, dalpha.num, ctx.reduce(dalpha.den * denom))
    ctx._deriv_cache[key] = result
    return result


def _algebra_derivative(ctx: BranchContext, p: MultiPoly, j: int) -> TowerElement:
    tower = ctx.tower
    acc = TowerElement.from_const(ctx, GaussianRational(0))
    for e, c in p.terms.items():
        dc = c.derivative(j)
        if dc:
            acc = acc + TowerElement(
                ctx, ctx.reduce(MultiPoly.monomial(tower.delta_table, e, dc))
            )
        for i, k in enumerate(e):
            if not k:
                continue
            ne = list(e)
            ne[i] = k - 1
            coeff = c * RatFunc.const(tower.t_table, GaussianRational(k))
            mono = MultiPoly.monomial(tower.delta_table, tuple(ne), coeff)
            acc = acc + TowerElement(ctx, ctx.reduce(mono)) * _delta_derivative(ctx, i, j)
    return acc


# ---------------------------------------------------------------------------
# radical parametrizations
# ---------------------------------------------------------------------------


class RadicalParametrization:
    """Component tuple over a branch context; r > n with Jacobian rank n."""

    def __init__(self, ctx: BranchContext, components: Sequence[TowerElement],
                 check_rank: bool = True):
        self.ctx = ctx
        self.components = list(components)
        if len(self.components) <= ctx.tower.n:
            raise ValueError("a radical parametrization needs more components than parameters")
        if check_rank:
            rank = jacobian_rank(self)
            if rank < ctx.tower.n:
                raise JacobianRankError(
                    f"Jacobian rank {rank} below the parameter count {ctx.tower.n}"
                )

    @property
    def n(self):
        return self.ctx.tower.n

    @property
    def m(self):
        return self.ctx.tower.m

    @property
    def r(self):
        return len(self.components)

    def evaluate(self, target):
        return [c.evaluate(target) for c in self.components]


def jacobian_rank(P: RadicalParametrization, samples: int = 3) -> int:
    """Max numeric rank of the derivative matrix over sampled branch points."""
    ctx = P.ctx
    derivs = [
        [tower_derive(c, j) for j in range(ctx.tower.n)] for c in P.components
    ]
    best = 0
    tried = 0
    for pt in ctx.probe_points(samples + 10):
        if tried >= samples:
            break
        try:
            rows = []
            for drow in derivs:
                rows.append([d.evaluate(pt) for d in drow])
            tried += 1
        except (ContinuationError, ZeroDivisionError):
            continue
        mat = np.array(rows, dtype=complex)
        sv = np.linalg.svd(mat, compute_uv=False)
        if len(sv) and sv[0] > 0:
            best = max(best, int(np.sum(sv > 1e-8 * sv[0])))
        if best >= ctx.tower.n:
            return best
    if tried == 0:
        raise JacobianRankError("all Jacobian sample points failed to evaluate")
    return best


def branch_evaluate(x, target):
    """Evaluate a TowerElement, or all tower levels when given a context."""
    if isinstance(x, TowerElement):
        return x.evaluate(target)
    if isinstance(x, BranchContext):
        return x.continue_deltas(target)
    raise TypeError("branch_evaluate expects a TowerElement or BranchContext")
