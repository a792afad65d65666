"""Buchberger engine: reduced Groebner bases, elimination ideals, membership,
and zero-dimensional quotient counting.

Polynomials are reduced monic over their coefficient field during
computation (Q(i), or rational functions when used by the tower algebra);
reported generator lists are rendered integer-primitive by the callers.

Pair selection follows the normal strategy (smallest lcm under the order),
ties broken lexicographically on (lcm, generator indices); Buchberger's
coprimality and chain criteria prune pairs.  A configurable step budget
bounds runaway computations.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .gaussian import GaussianRational
from .poly import MonomialOrder, MultiPoly, VarTable, mono_divides, mono_lcm, mono_mul, mono_sub

DEFAULT_STEP_BUDGET = 200_000


class BudgetExceeded(RuntimeError):
    """Raised when a Groebner computation exceeds its pair-reduction budget."""


def s_polynomial(f: MultiPoly, g: MultiPoly, order: MonomialOrder) -> MultiPoly:
    ef, cf = f.leading(order)
    eg, cg = g.leading(order)
    lcm = mono_lcm(ef, eg)
    mf = f.mul_monomial(mono_sub(lcm, ef), cf / cf)
    mg = g.mul_monomial(mono_sub(lcm, eg), cf / cg)
    return mf - mg


def normal_form(
    f: MultiPoly,
    basis: Iterable[MultiPoly],
    order: MonomialOrder,
    counter: Optional[list] = None,
    budget: Optional[int] = None,
) -> MultiPoly:
    """Remainder of multivariate division: no term divisible by a basis lt.

    `counter`/`budget` meter reduction work for runaway-computation control.
    """
    import heapq

    basis = [b for b in basis if not b.is_zero()]
    if not basis or f.is_zero():
        return f
    lts = [b.leading(order) for b in basis]
    key = order.key
    rem: dict = {}
    work = dict(f.terms)
    # max-order heap via negated keys; entries may be stale (lazy deletion)
    heap = [tuple(-x for x in key(e)) + (e,) for e in work]
    heapq.heapify(heap)
    nvars = len(f.vars)
    while heap:
        entry = heapq.heappop(heap)
        e = entry[-1]
        c = work.get(e)
        if c is None:
            continue
        del work[e]
        hit = None
        for i, (eb, cb) in enumerate(lts):
            if mono_divides(eb, e):
                hit = i
                break
        if hit is None:
            rem[e] = c
            continue
        b = basis[hit]
        eb, cb = lts[hit]
        shift = mono_sub(e, eb)
        factor = c / cb
        if counter is not None:
            # work is metered by terms touched plus coefficient size, so
            # runaway reductions with huge intermediate polynomials or
            # exploding rationals exhaust the budget in bounded time
            work = 1 + len(b.terms) // 4
            if isinstance(factor, GaussianRational):
                work += (
                    factor.re.numerator.bit_length()
                    + factor.re.denominator.bit_length()
                    + factor.im.numerator.bit_length()
                    + factor.im.denominator.bit_length()
                ) // 16
            counter[0] += work
            if budget is not None and counter[0] > budget:
                raise BudgetExceeded(f"Groebner step budget {budget} exceeded")
        for e2, c2 in b.terms.items():
            if e2 == eb:
                continue
            ke = mono_mul(e2, shift)
            s = work.get(ke)
            d = factor * c2
            if s is None:
                if d:
                    work[ke] = -d
                    heapq.heappush(heap, tuple(-x for x in key(ke)) + (ke,))
            else:
                s = s - d
                if s:
                    work[ke] = s
                else:
                    del work[ke]
    return MultiPoly(f.vars, rem)


class Ideal:
    """Generator set with a monomial order and a cached reduced basis."""

    def __init__(self, generators, order: MonomialOrder, step_budget: int = DEFAULT_STEP_BUDGET):
        gens = [g for g in generators if not g.is_zero()]
        self.generators = gens
        self.order = order
        self.step_budget = step_budget
        self.reduced_gb: Optional[list] = None

    @property
    def vars(self) -> VarTable:
        return self.generators[0].vars

    def groebner(self) -> list:
        if self.reduced_gb is None:
            self.reduced_gb = buchberger(self.generators, self.order, self.step_budget)
        return self.reduced_gb

    def contains(self, f: MultiPoly) -> bool:
        return normal_form(f, self.groebner(), self.order).is_zero()


def _interreduce(basis: list, order: MonomialOrder, counter=None, budget=None) -> list:
    """Minimalize and tail-reduce a Groebner basis; output monic, sorted."""
    basis = [b.monic(order) for b in basis if not b.is_zero()]
    # drop elements whose lt is divisible by another lt
    minimal = []
    lts = [b.leading(order)[0] for b in basis]
    for i, b in enumerate(basis):
        ei = lts[i]
        keep = True
        for j, ej in enumerate(lts):
            if i == j:
                continue
            if mono_divides(ej, ei) and (ei != ej or j < i):
                keep = False
                break
        if keep:
            minimal.append(b)
    reduced = []
    for i, b in enumerate(minimal):
        others = minimal[:i] + minimal[i + 1 :]
        r = normal_form(b, others, order, counter, budget)
        if not r.is_zero():
            reduced.append(r.monic(order))
    reduced.sort(key=lambda p: order.key(p.leading(order)[0]))
    return reduced


def buchberger(
    generators: Iterable[MultiPoly],
    order: MonomialOrder,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> list:
    """Reduced Groebner basis; deterministic for fixed input and order.

    The budget meters reduction work (pair handling plus division steps)
    and raises BudgetExceeded on runaway computations.
    """
    import heapq

    counter = [0]
    basis = []
    for g in generators:
        if g.is_zero():
            continue
        r = normal_form(g, basis, order, counter, step_budget)
        if not r.is_zero():
            basis.append(r.monic(order))
    if not basis:
        return []
    key = order.key
    lts = [b.leading(order)[0] for b in basis]

    heap: list = []
    done = set()

    def add_pairs(k):
        for i in range(k):
            heapq.heappush(heap, (key(mono_lcm(lts[i], lts[k])), i, k))

    for k in range(1, len(basis)):
        add_pairs(k)

    while heap:
        # normal strategy: smallest lcm under the order, then index order
        _, i, j = heapq.heappop(heap)
        ei, ej = lts[i], lts[j]
        lcm = mono_lcm(ei, ej)
        done.add((i, j))
        counter[0] += 1
        if counter[0] > step_budget:
            raise BudgetExceeded(f"Groebner step budget {step_budget} exceeded")
        # criterion 1: coprime leading terms
        if lcm == mono_mul(ei, ej):
            continue
        # criterion 2 (chain): some k with lt_k | lcm and both pairs handled
        skip = False
        for k in range(len(basis)):
            if k == i or k == j:
                continue
            if mono_divides(lts[k], lcm):
                p1 = (min(i, k), max(i, k))
                p2 = (min(j, k), max(j, k))
                if p1 in done and p2 in done:
                    skip = True
                    break
        if skip:
            continue
        s = s_polynomial(basis[i], basis[j], order)
        r = normal_form(s, basis, order, counter, step_budget)
        if r.is_zero():
            continue
        basis.append(r.monic(order))
        lts.append(r.leading(order)[0])
        add_pairs(len(basis) - 1)
    return _interreduce(basis, order, counter, step_budget)


def eliminate(ideal: Ideal, drop_vars: Iterable[str]) -> list:
    """Generators of the elimination ideal with `drop_vars` removed.

    Uses a block order with the dropped variables in the leading block
    (table order inside each block), then filters the reduced basis.
    """
    table = ideal.vars
    drop_idx = [table.index(v) for v in drop_vars]
    keep_idx = [i for i in range(len(table)) if i not in set(drop_idx)]
    order = MonomialOrder.block(table, [drop_idx, keep_idx]) if drop_idx else ideal.order
    gb = buchberger(ideal.generators, order, ideal.step_budget)
    out = []
    dropset = set(drop_idx)
    for g in gb:
        if all(not any(e[i] for i in dropset) for e in g.terms):
            out.append(g)
    return out


def quotient_dimension(ideal: Ideal, fiber_vars: Iterable[str]):
    """Number of standard monomials in the fiber variables, or None (infinite).

    Requires the reduced basis to contain, for every fiber variable, an
    element whose leading term is a pure power of it; all other variables
    are expected to have been specialized beforehand.
    """
    gb = ideal.groebner()
    table = ideal.vars
    fiber = [table.index(v) for v in fiber_vars]
    if not fiber:
        return 1
    if not gb:
        return None
    lts = [g.leading(ideal.order)[0] for g in gb]
    if any(not any(e) for e in lts):
        return 0
    bounds = {}
    for v in fiber:
        best = None
        for e in lts:
            if e[v] and all(k == 0 for i, k in enumerate(e) if i != v):
                best = e[v] if best is None else min(best, e[v])
        if best is None:
            return None
        bounds[v] = best
    fiber_lts = [e for e in lts if all(k == 0 for i, k in enumerate(e) if i not in bounds)]

    count = 0
    stack = [(0, {})]
    fiber_list = list(bounds)
    while stack:
        pos, expo = stack.pop()
        if pos == len(fiber_list):
            full = tuple(expo.get(i, 0) for i in range(len(table)))
            if not any(mono_divides(lt, full) for lt in fiber_lts):
                count += 1
            continue
        v = fiber_list[pos]
        for k in range(bounds[v]):
            ne = dict(expo)
            ne[v] = k
            stack.append((pos + 1, ne))
    return count


def ideal_membership(f: MultiPoly, ideal: Ideal) -> bool:
    return ideal.contains(f)


def ideals_equal(gens_a: list, gens_b: list, order: MonomialOrder, budget=DEFAULT_STEP_BUDGET) -> bool:
    """Mutual membership of two generator lists (ideal equality)."""
    a = Ideal(gens_a, order, budget)
    b = Ideal(gens_b, order, budget)
    if not a.generators and not b.generators:
        return True
    if not a.generators or not b.generators:
        return False
    return all(b.contains(g) for g in a.generators) and all(a.contains(g) for g in b.generators)


def minimal_polynomial(ideal: Ideal, var: str, field_one, support_vars=None):
    """Univariate minimal polynomial of `var` in the quotient algebra.

    The quotient must be finite-dimensional over the coefficient field in
    the `support_vars` (default: all variables).  Returns the coefficient
    list c_0..c_d of a monic polynomial sum c_k * var^k with c_d = 1.
    Used for square-freeness guards.
    """
    gb = ideal.groebner()
    order = ideal.order
    table = ideal.vars
    support = (
        list(range(len(table)))
        if support_vars is None
        else [table.index(nm) for nm in support_vars]
    )
    lts = [g.leading(order)[0] for g in gb]
    # enumerate the standard monomial basis over the support variables
    bounds = {}
    for v in support:
        best = None
        for e in lts:
            if e[v] and all(k == 0 for i, k in enumerate(e) if i != v):
                best = e[v] if best is None else min(best, e[v])
        if best is None:
            return None
        bounds[v] = best
    basis_monos = []
    stack = [(0, {})]
    while stack:
        pos, expo = stack.pop()
        if pos == len(support):
            full = tuple(expo.get(i, 0) for i in range(len(table)))
            if not any(mono_divides(lt, full) for lt in lts):
                basis_monos.append(full)
            continue
        v = support[pos]
        for k in range(bounds[v]):
            ne = dict(expo)
            ne[v] = k
            stack.append((pos + 1, ne))
    basis_monos.sort()
    index = {m: i for i, m in enumerate(basis_monos)}
    zero = field_one - field_one

    def to_vec(p: MultiPoly):
        vec = [zero] * len(basis_monos)
        for e, c in p.terms.items():
            vec[index[e]] = vec[index[e]] + c
        return vec

    vidx = table.index(var)
    vpoly = MultiPoly.variable(table, var)
    # powers of var reduced to the quotient until linear dependence
    powers = [MultiPoly.const_coeff(table, field_one)]
    vectors = [to_vec(powers[0])]
    while True:
        nxt = normal_form(powers[-1] * vpoly, gb, order)
        vec = to_vec(nxt)
        dep = _solve_dependency(vectors, vec, zero, field_one)
        if dep is not None:
            # nxt = sum dep_k * powers[k]  =>  min poly = x^d - sum dep_k x^k
            coeffs = [-c for c in dep] + [field_one]
            return coeffs
        powers.append(nxt)
        vectors.append(vec)
        if len(powers) > len(basis_monos) + 1:
            raise RuntimeError("minimal polynomial search exceeded quotient dimension")


def _solve_dependency(vectors, target, zero, one):
    """Solve sum x_k vectors[k] = target by Gaussian elimination, or None."""
    n = len(target)
    m = len(vectors)
    rows = [[vectors[k][r] for k in range(m)] + [target[r]] for r in range(n)]
    piv_cols = []
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
        piv_cols.append(c)
        r += 1
    # consistency: rows beyond rank must have zero rhs
    for rr in range(r, n):
        if rows[rr][m]:
            return None
    sol = [zero] * m
    for rr, c in enumerate(piv_cols):
        sol[c] = rows[rr][m]
    # verify against the original vectors (free columns stay zero)
    for r0 in range(n):
        acc = zero
        for k in range(m):
            acc = acc + vectors[k][r0] * sol[k]
        if acc != target[r0]:
            return None
    return sol
