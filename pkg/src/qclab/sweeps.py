"""Exhaustive small-case sweeps of the bias claims.

These sweeps cover every Boolean function on up to 3 bits, a rational grid
of distributions, and (where relevant) every canonical read-once tree of
bounded depth.  Distribution masses are carried as integer numerators over
one common total and all comparisons are integer comparisons (via numpy
int64, whose products stay far below overflow here), so the verdicts are
exact; irrational square-root thresholds are compared through squares.

The single-instance verifiers in :mod:`qclab.simulate` recheck samples of
these sweeps with Fraction arithmetic; the two routes are independent.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

# grid denominator per arity: the 3-bit cube already has 3^3 subcubes and
# 256 functions, so its grid is coarser to keep sweeps in budget
GRID_DENOMINATOR = {1: 6, 2: 5, 3: 4}
UNBIAS_DENOMINATOR = 6


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_weight_vectors(points: int, max_denominator: int) -> tuple[list[tuple[int, ...]], int]:
    """All distributions on ``points`` outcomes whose probabilities have
    denominator at most ``max_denominator``, as unique integer weight
    vectors over the common total lcm(1..max_denominator)."""
    total = lcm(*range(1, max_denominator + 1))
    seen = set()
    out = []
    for q in range(1, max_denominator + 1):
        scale = total // q
        for comp in _compositions(q, points):
            w = tuple(c * scale for c in comp)
            if w not in seen:
                seen.add(w)
                out.append(w)
    return out, total


def all_output_tables(m: int) -> list[tuple[int, ...]]:
    size = 1 << m
    return [tuple((g >> x) & 1 for x in range(size)) for g in range(1 << size)]


def readonce_shapes(m: int, depth: int) -> list:
    """Canonical read-once tree shapes (labels irrelevant): ``None`` is a
    leaf, ``(var, shape0, shape1)`` an internal node."""

    def rec(avail: tuple, d: int):
        shapes = [None]
        if d > 0:
            for i, v in enumerate(avail):
                rest = avail[:i] + avail[i + 1:]
                subs = rec(rest, d - 1)
                for s0 in subs:
                    for s1 in subs:
                        shapes.append((v, s0, s1))
        return shapes

    return rec(tuple(range(m)), min(depth, m))


def shape_leaves(shape, m: int) -> list[tuple[int, tuple[int, ...]]]:
    """Leaf subcubes of a shape as (codim, tuple of member points)."""
    out = []

    def rec(node, fixed: dict):
        if node is None:
            pts = tuple(
                x for x in range(1 << m)
                if all((x >> v) & 1 == b for v, b in fixed.items())
            )
            out.append((len(fixed), pts))
            return
        var, s0, s1 = node
        rec(s0, {**fixed, var: 0})
        rec(s1, {**fixed, var: 1})

    rec(shape, {})
    return out


def depth_successes(outputs: tuple[int, ...], weights: tuple[int, ...], m: int) -> list[int]:
    """Best depth-d success numerators (over the weight total) of the
    function ``outputs`` for every d in 0..m.  Lean integer twin of the
    general tree DP, for sweep-scale workloads."""
    memo: dict = {}

    def val(fixed: frozenset, points: tuple, d: int) -> int:
        d = min(d, m - len(fixed))
        key = (fixed, d)
        hit = memo.get(key)
        if hit is not None:
            return hit
        s1 = sum(weights[x] for x in points if outputs[x])
        s0 = sum(weights[x] for x in points) - s1
        best = s0 if s0 >= s1 else s1
        if d > 0:
            fixed_vars = {v for v, _ in fixed}
            for var in range(m):
                if var in fixed_vars:
                    continue
                p0 = tuple(x for x in points if not (x >> var) & 1)
                p1 = tuple(x for x in points if (x >> var) & 1)
                v = val(fixed | {(var, 0)}, p0, d - 1) + val(fixed | {(var, 1)}, p1, d - 1)
                if v > best:
                    best = v
        memo[key] = best
        return best

    all_points = tuple(range(1 << m))
    return [val(frozenset(), all_points, d) for d in range(m + 1)]


def complexity_from_successes(successes: list[int], total: int, eps: Fraction) -> int:
    """Smallest depth with success >= 1 - eps, from numerators over total."""
    num, den = (1 - eps).numerator, (1 - eps).denominator
    for d, s in enumerate(successes):
        if s * den >= num * total:
            return d
    raise AssertionError("full-depth success below target")  # unreachable


def _all_subcube_matrix(m: int) -> tuple[np.ndarray, np.ndarray, list]:
    """Membership matrix of all 3^m subcubes, their codims, and their
    fixed-assignment descriptions."""
    from itertools import product

    rows = []
    codims = []
    descs = []
    for choice in product((None, 0, 1), repeat=m):
        fixed = {v: b for v, b in enumerate(choice) if b is not None}
        rows.append([
            1 if all((x >> v) & 1 == b for v, b in fixed.items()) else 0
            for x in range(1 << m)
        ])
        codims.append(len(fixed))
        descs.append(tuple(sorted(fixed.items())))
    return np.array(rows, dtype=np.int64), np.array(codims, dtype=np.int64), descs


@dataclass(frozen=True)
class SweepReport:
    name: str
    cases: int
    violations: tuple

    @property
    def passed(self) -> bool:
        return not self.violations


def sweep_unbias(
    deltas=(Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)),
    max_denominator: int = UNBIAS_DENOMINATOR,
    sampled_m4: int = 200,
    seed: int = 20240811,
) -> SweepReport:
    """Both restriction-mass inequalities over every subcube, exhaustively
    for all functions on up to 3 bits, plus sampled 4-bit fixtures."""
    violations = []
    cases = 0

    def run(m: int, g_rows: np.ndarray, mus: list[tuple[int, ...]], total: int):
        nonlocal cases
        S, _, descs = _all_subcube_matrix(m)
        for w in mus:
            wv = np.array(w, dtype=np.int64)
            mt = S @ wv                       # subcube masses
            M1 = g_rows @ wv                  # g=1 masses, per function
            M0 = total - M1
            W = S * wv                        # per-subcube masked weights
            m1 = g_rows @ W.T                 # (n_g, n_cubes)
            m0 = mt[None, :] - m1
            for delta in deltas:
                nd, dd = delta.numerator, delta.denominator
                hyp = np.abs(M0 - M1) * dd <= nd * total
                if not hyp.any():
                    continue
                low_bias = (np.abs(m0 - m1) * dd <= nd * mt[None, :]) & (mt[None, :] > 0)
                active = low_bias & hyp[:, None]
                cases += int(active.sum())
                for mb_cube, Mb in ((m0, M0), (m1, M1)):
                    # Pr_mu[C] <= (1 + 4 delta) Pr_mu_b[C], and the lower twin
                    lhs = mt[None, :] * Mb[:, None] * dd
                    rhs = mb_cube * total
                    up_ok = lhs <= (dd + 4 * nd) * rhs
                    lo_ok = lhs >= (dd - 4 * nd) * rhs
                    bad = active & ~(up_ok & lo_ok)
                    if bad.any():
                        for gi, ci in zip(*np.nonzero(bad)):
                            violations.append(
                                (m, tuple(int(v) for v in g_rows[gi]), w, str(delta), descs[ci])
                            )

    for m in (1, 2, 3):
        g_rows = np.array(all_output_tables(m), dtype=np.int64)
        mus, total = grid_weight_vectors(1 << m, max_denominator)
        run(m, g_rows, mus, total)

    rng = _random.Random(seed)
    total4 = lcm(*range(1, max_denominator + 1))
    fixtures = []
    for _ in range(sampled_m4):
        g = tuple(rng.randrange(2) for _ in range(16))
        q = rng.randrange(1, max_denominator + 1)
        cuts = sorted(rng.randrange(q + 1) for _ in range(15))
        comp = [b - a for a, b in zip([0] + cuts, cuts + [q])]
        fixtures.append((g, tuple(c * (total4 // q) for c in comp)))
    for g, w in fixtures:
        run(4, np.array([g], dtype=np.int64), [w], total4)

    return SweepReport("unbias", cases, tuple(violations))


def sweep_rbias(
    eps_list=(Fraction(1, 4), Fraction(1, 2) - Fraction(1, 16)),
    max_m: int = 3,
    tree_depth: int = 3,
) -> SweepReport:
    """Both shallow-high-bias-leaf mass bounds, over every function with
    positive complexity, the distribution grid, and every canonical
    read-once tree of bounded depth."""
    violations = []
    cases = 0
    for m in range(1, max_m + 1):
        tables = all_output_tables(m)
        g_rows = np.array(tables, dtype=np.int64)
        mus, total = grid_weight_vectors(1 << m, GRID_DENOMINATOR[m])
        shapes = [shape_leaves(s, m) for s in readonce_shapes(m, tree_depth)]
        shape_data = []
        for leaves in shapes:
            codims = np.array([cd for cd, _ in leaves], dtype=np.int64)
            members = np.array(
                [[1 if x in pts else 0 for x in range(1 << m)] for _, pts in leaves],
                dtype=np.int64,
            )
            shape_data.append((codims, members))
        for w in mus:
            wv = np.array(w, dtype=np.int64)
            M1 = g_rows @ wv
            M0 = total - M1
            maxM = np.maximum(M0, M1)
            c_by_eps = {}
            for eps in eps_list:
                ne, de = (1 - eps).numerator, (1 - eps).denominator
                # positive complexity iff the best constant answer misses 1-eps
                surv = maxM * de < ne * total
                c_arr = np.zeros(len(tables), dtype=np.int64)
                for gi in np.nonzero(surv)[0]:
                    succ = depth_successes(tables[gi], w, m)
                    c_arr[gi] = complexity_from_successes(succ, total, eps)
                c_by_eps[eps] = c_arr
            for codims, members in shape_data:
                Wl = members * wv
                mt = Wl.sum(axis=1)
                m1 = g_rows @ Wl.T            # (n_g, n_leaves)
                diff = mt[None, :] - 2 * m1   # m0 - m1 within each leaf
                for eps in eps_list:
                    c_arr = c_by_eps[eps]
                    if not c_arr.any():
                        continue
                    delta = Fraction(1, 2) - eps
                    nd, dd = delta.numerator, delta.denominator
                    shallow = codims[None, :] < c_arr[:, None]
                    high_bias = diff * diff * dd >= 4 * nd * mt[None, :] ** 2
                    active = shallow & high_bias & (mt[None, :] > 0)
                    event_mu = (active * mt[None, :]).sum(axis=1)
                    event_1 = (active * m1).sum(axis=1)
                    event_0 = (active * (mt[None, :] - m1)).sum(axis=1)
                    live = c_arr > 0
                    cases += int(live.sum())
                    ok_a = event_mu**2 * dd < nd * total**2
                    ok_b0 = event_0**2 * dd < 16 * nd * M0**2
                    ok_b1 = event_1**2 * dd < 16 * nd * M1**2
                    bad = live & ~(ok_a & ok_b0 & ok_b1)
                    if bad.any():
                        for gi in np.nonzero(bad)[0]:
                            violations.append((m, tables[gi], w, str(eps), int(c_arr[gi])))
    return SweepReport("rbias", cases, tuple(violations))


def sweep_fullbias(
    eps_list=(Fraction(1, 4), Fraction(1, 3), Fraction(5, 12)),
    max_m: int = 3,
) -> SweepReport:
    """Whenever the distributional complexity is positive, the minority
    value mass must exceed eps and the full-cube bias stay below 1-2*eps."""
    violations = []
    cases = 0
    for m in range(1, max_m + 1):
        tables = all_output_tables(m)
        g_rows = np.array(tables, dtype=np.int64)
        mus, total = grid_weight_vectors(1 << m, GRID_DENOMINATOR[m])
        for w in mus:
            wv = np.array(w, dtype=np.int64)
            M1 = g_rows @ wv
            M0 = total - M1
            for eps in eps_list:
                ne, de = (1 - eps).numerator, (1 - eps).denominator
                positive_c = np.maximum(M0, M1) * de < ne * total
                cases += int(positive_c.sum())
                nn, nd = eps.numerator, eps.denominator
                min_ok = np.minimum(M0, M1) * nd > nn * total
                bd_num, bd_den = (1 - 2 * eps).numerator, (1 - 2 * eps).denominator
                bias_ok = np.abs(M0 - M1) * bd_den < bd_num * total
                bad = positive_c & ~(min_ok & bias_ok)
                if bad.any():
                    for gi in np.nonzero(bad)[0]:
                        violations.append((m, tables[gi], w, str(eps)))
    return SweepReport("fullbias", cases, tuple(violations))
