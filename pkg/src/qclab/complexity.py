"""Exact distributional query complexity by dynamic programming over
subcubes, and randomized query complexity via best-response dynamics on the
input-vs-algorithm zero-sum game.

The DP is exact: distribution masses are carried as integer numerators over
one common denominator, so every comparison is integer arithmetic.  The game
solver is approximate but bracketed, and every accept/reject decision it
makes is backed by an exact quantity (a best-response value below the target
rejects a depth; the rejecting distribution is an exact certificate for the
next depth).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Union

from .core import (
    CapExceeded,
    Dist,
    HypothesisViolated,
    QclabError,
    Relation,
    TruthTable,
    Unachievable,
    caps,
)
from .dtree import DecisionTree, InternalNode, Leaf

Problem = Union[Relation, TruthTable]

WEIGHT_DENOM_LIMIT = 10**6


def _as_relation(h: Problem) -> Relation:
    if isinstance(h, TruthTable):
        return Relation.from_function(h)
    return h


def _int_weights(mu: Dist) -> tuple[list[int], int]:
    den = lcm(*(p.denominator for p in mu.probs))
    return [p.numerator * (den // p.denominator) for p in mu.probs], den


@dataclass(frozen=True)
class DPResult:
    success: Fraction
    witness: DecisionTree


class _TreeDP:
    """Memoized optimum of depth-bounded trees for a fixed (h, mu).

    Tie-breaking is deterministic: answering beats querying at equal value,
    lower variable index beats higher, lower label beats higher.
    """

    def __init__(self, h: Relation, mu: Dist):
        if h.arity != mu.arity:
            raise QclabError("relation and distribution arity mismatch")
        if h.arity > caps()["dp"]:
            raise CapExceeded(f"arity {h.arity} exceeds the DP cap")
        self.h = h
        self.arity = h.arity
        self.nums, self.den = _int_weights(mu)
        self.memo: dict = {}

    def _best_answer(self, points) -> tuple[int, int]:
        counts = [0] * self.h.alphabet_size
        acc = self.h.accepted
        nums = self.nums
        for x in points:
            w = nums[x]
            if w:
                for r in acc[x]:
                    counts[r] += w
        best = max(counts)
        return best, counts.index(best)

    def value(self, fixed: frozenset, points: tuple, depth: int) -> tuple[int, tuple]:
        free = self.arity - len(fixed)
        depth = min(depth, free)
        key = (fixed, depth)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        best, label = self._best_answer(points)
        action = ("answer", label)
        if depth > 0:
            fixed_vars = {var for var, _ in fixed}
            for var in range(self.arity):
                if var in fixed_vars:
                    continue
                pts0 = tuple(x for x in points if not (x >> var) & 1)
                pts1 = tuple(x for x in points if (x >> var) & 1)
                v0, _ = self.value(fixed | {(var, 0)}, pts0, depth - 1)
                v1, _ = self.value(fixed | {(var, 1)}, pts1, depth - 1)
                if v0 + v1 > best:
                    best = v0 + v1
                    action = ("query", var)
        self.memo[key] = (best, action)
        return best, action

    def witness(self, depth: int) -> DecisionTree:
        counter = [0]

        def build(fixed: frozenset, points: tuple, d: int):
            _, action = self.value(fixed, points, d)
            if action[0] == "answer":
                leaf = Leaf(action[1], counter[0])
                counter[0] += 1
                return leaf
            var = action[1]
            pts0 = tuple(x for x in points if not (x >> var) & 1)
            pts1 = tuple(x for x in points if (x >> var) & 1)
            return InternalNode(
                var,
                build(fixed | {(var, 0)}, pts0, d - 1),
                build(fixed | {(var, 1)}, pts1, d - 1),
            )

        free = self.arity
        depth = min(depth, free)
        return DecisionTree(self.arity, build(frozenset(), tuple(range(1 << self.arity)), depth))


def best_success(h: Problem, mu: Dist, depth: int, with_witness: bool = True) -> DPResult:
    """Exact maximum success probability of depth-bounded deterministic trees
    on ``h`` under ``mu``, with an optimal witness tree."""
    if depth < 0:
        raise QclabError("depth must be >= 0")
    rel = _as_relation(h)
    dp = _TreeDP(rel, mu)
    depth = min(depth, rel.arity)
    value, _ = dp.value(frozenset(), tuple(range(1 << rel.arity)), depth)
    witness = dp.witness(depth) if with_witness else None
    return DPResult(success=Fraction(value, dp.den), witness=witness)


def dist_complexity(h: Problem, mu: Dist, eps) -> int:
    """Smallest depth whose best depth-bounded success is >= 1 - eps."""
    eps = Fraction(eps)
    if not 0 <= eps < Fraction(1, 2):
        raise HypothesisViolated("eps must lie in [0, 1/2)")
    rel = _as_relation(h)
    dp = _TreeDP(rel, mu)
    target_num = (1 - eps).numerator * dp.den
    target_den = (1 - eps).denominator
    all_points = tuple(range(1 << rel.arity))
    for d in range(rel.arity + 1):
        value, _ = dp.value(frozenset(), all_points, d)
        if value * target_den >= target_num:
            return d
    raise Unachievable("full-depth success below 1 - eps")


@dataclass(frozen=True)
class GameResult:
    depth: int
    lower_value: Fraction
    upper_value: Fraction
    hard_dist: Dist
    best_tree: DecisionTree
    iterations: int
    limit_hit: bool = False


@dataclass(frozen=True)
class _GameStatus:
    accepted: bool
    decided: bool
    lower: Fraction
    upper: Fraction
    iterations: int
    tree: DecisionTree
    reject_mu: Dist | None  # exact witness: every depth-d tree fails on it
    final_mu: Dist


def _limited_dist(weights: list[Fraction]) -> Dist:
    """Snap weights to bounded denominators, then normalize exactly.  The
    result is a genuine distribution, which is all soundness needs."""
    total = sum(weights)
    approx = [(w / total).limit_denominator(WEIGHT_DENOM_LIMIT) for w in weights]
    s = sum(approx)
    if s == 0:
        n = len(weights)
        return Dist(n.bit_length() - 1, tuple([Fraction(1, n)] * n))
    probs = [a / s for a in approx]
    return Dist((len(weights)).bit_length() - 1, tuple(probs))


def _solve_game(
    rel: Relation,
    depth: int,
    target: Fraction,
    tol: Fraction,
    eta: Fraction,
    max_iter: int,
) -> _GameStatus:
    n_inputs = 1 << rel.arity
    weights = [Fraction(1)] * n_inputs
    payoff_sums = [0] * n_inputs
    br_value_sum = Fraction(0)
    shrink = 1 - eta
    mu_t = Dist.uniform(rel.arity)
    tree = None
    for t in range(1, max_iter + 1):
        dp = best_success(rel, mu_t, depth)
        tree = dp.witness
        br_value_sum += dp.success
        upper = br_value_sum / t
        correct = [1 if rel.accepts(x, tree.output(x)) else 0 for x in range(n_inputs)]
        for x in range(n_inputs):
            payoff_sums[x] += correct[x]
        lower = Fraction(min(payoff_sums), t)
        if dp.success < target:
            # exact rejection: even the best depth-d tree fails under mu_t
            return _GameStatus(False, True, lower, upper, t, tree, mu_t, mu_t)
        if lower >= target - tol:
            return _GameStatus(True, True, lower, upper, t, tree, None, mu_t)
        for x in range(n_inputs):
            if correct[x]:
                weights[x] *= shrink
        top = max(weights)
        weights = [(w / top).limit_denominator(WEIGHT_DENOM_LIMIT) for w in weights]
        mu_t = _limited_dist(weights)
    lower = Fraction(min(payoff_sums), max_iter)
    upper = br_value_sum / max_iter
    return _GameStatus(False, False, lower, upper, max_iter, tree, None, mu_t)


def rand_complexity(
    h: Problem,
    eps,
    tol=Fraction(1, 100),
    max_iter: int = 5000,
    eta=Fraction(1, 8),
) -> GameResult:
    """Approximate randomized query complexity via the minimax principle.

    Depths are searched from 0 upward.  A depth is rejected only on an exact
    witness distribution under which every depth-bounded tree has success
    strictly below 1 - eps; that witness then certifies, exactly, that the
    complexity exceeds the rejected depth.  A depth is accepted once the
    averaged best-response mixture achieves at least 1 - eps - tol on every
    input.  If neither happens within ``max_iter`` rounds the depth is
    accepted with ``limit_hit`` set.
    """
    eps = Fraction(eps)
    tol = Fraction(tol)
    eta = Fraction(eta)
    if not 0 <= eps < Fraction(1, 2):
        raise HypothesisViolated("eps must lie in [0, 1/2)")
    if tol <= 0 or not 0 < eta < 1:
        raise QclabError("tol must be positive and eta in (0, 1)")
    rel = _as_relation(h)
    target = 1 - eps
    cert_mu: Dist | None = None
    for depth in range(rel.arity + 1):
        status = _solve_game(rel, depth, target, tol, eta, max_iter)
        if status.accepted or not status.decided:
            hard = cert_mu if cert_mu is not None else status.final_mu
            return GameResult(
                depth=depth,
                lower_value=status.lower,
                upper_value=status.upper,
                hard_dist=hard,
                best_tree=status.tree,
                iterations=status.iterations,
                limit_hit=not status.decided,
            )
        cert_mu = status.reject_mu
    raise Unachievable("no depth accepted up to the full arity")


def hard_distribution(g: Problem, eps, tol=Fraction(1, 100), max_iter: int = 5000) -> Dist:
    """Adversary distribution whose exact distributional complexity certifies
    the depth reported by :func:`rand_complexity`."""
    result = rand_complexity(g, eps, tol, max_iter)
    certified = dist_complexity(g, result.hard_dist, eps)
    if certified < result.depth:
        raise QclabError(
            f"certificate failed: distributional complexity {certified} "
            f"below game depth {result.depth}"
        )
    return result.hard_dist
