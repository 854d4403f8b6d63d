"""Independent brute-force oracles used to pin down exact expected values.

These deliberately avoid the library's own algorithms: tree optimization is
done by explicit enumeration of tree shapes, and the simulation law by
walking the tree while multiplying stepwise branch probabilities.
"""

from __future__ import annotations

from fractions import Fraction

from qclab.core import Dist, Relation, Subcube, TruthTable, subcube_prob
from qclab.dtree import DecisionTree, InternalNode, Leaf


def enumerate_shapes(arity: int, depth: int, used: frozenset = frozenset()):
    """Every read-once tree shape of bounded depth: ``None`` is a leaf,
    otherwise ``(var, shape0, shape1)``."""
    yield None
    if depth > 0:
        for var in range(arity):
            if var in used:
                continue
            for s0 in enumerate_shapes(arity, depth - 1, used | {var}):
                for s1 in enumerate_shapes(arity, depth - 1, used | {var}):
                    yield (var, s0, s1)


def _shape_success(h: Relation, mu: Dist, shape, points) -> Fraction:
    if shape is None:
        best = Fraction(0)
        for r in range(h.alphabet_size):
            mass = sum((mu.probs[x] for x in points if r in h.accepted[x]), Fraction(0))
            if mass > best:
                best = mass
        return best
    var, s0, s1 = shape
    pts0 = [x for x in points if not (x >> var) & 1]
    pts1 = [x for x in points if (x >> var) & 1]
    return _shape_success(h, mu, s0, pts0) + _shape_success(h, mu, s1, pts1)


def brute_best_success(h, mu: Dist, depth: int) -> Fraction:
    """Maximum success of any depth-bounded tree, by enumerating every tree
    shape and giving each leaf its best label."""
    if isinstance(h, TruthTable):
        h = Relation.from_function(h)
    points = list(range(1 << h.arity))
    best = Fraction(0)
    for shape in enumerate_shapes(h.arity, min(depth, h.arity)):
        value = _shape_success(h, mu, shape, points)
        if value > best:
            best = value
    return best


def brute_reach_probs(tree: DecisionTree, dist: Dist) -> dict[int, Fraction]:
    """Leaf-reach probabilities by summing the distribution point by point."""
    out: dict[int, Fraction] = {}
    for leaf, path in tree.leaf_paths():
        cube = Subcube.from_mapping(tree.arity, dict(path))
        out[leaf.leaf_id] = subcube_prob(dist, cube)
    return out


def brute_simulation_law(inst, tree: DecisionTree, z: int) -> dict[int, Fraction]:
    """Leaf law of the simulation by enumerating its branch choices one
    query at a time, multiplying stepwise conditional probabilities."""
    c = inst.inner_complexity
    mu_z = [inst.mu_z((z >> i) & 1) for i in range(inst.n)]
    out: dict[int, Fraction] = {}

    def cube_mass(dist: Dist, assigns: dict) -> Fraction:
        return subcube_prob(dist, Subcube.from_mapping(inst.m, assigns))

    def walk(node, assigns, counts, prob):
        if isinstance(node, Leaf):
            out[node.leaf_id] = out.get(node.leaf_id, Fraction(0)) + prob
            return
        i, j = inst.block.copy_of(node.query_var)
        regime = inst.mu if counts[i] + 1 <= c - 1 else mu_z[i]
        denom = cube_mass(regime, assigns[i])
        for b, child in ((0, node.child0), (1, node.child1)):
            ext = dict(assigns[i])
            ext[j] = b
            step = cube_mass(regime, ext) / denom
            if step == 0:
                continue
            sub = [dict(a) for a in assigns]
            sub[i][j] = b
            sub_counts = list(counts)
            sub_counts[i] += 1
            walk(child, sub, sub_counts, prob * step)

    walk(tree.root, [dict() for _ in range(inst.n)], [0] * inst.n, Fraction(1))
    return out


def random_tree(rng, arity: int, depth: int, labels: int) -> DecisionTree:
    """A random valid tree with leaves labeled uniformly from ``range(labels)``."""
    counter = [0]

    def build(d, used):
        avail = [v for v in range(arity) if v not in used]
        if d == 0 or not avail or rng.random() < 0.3:
            leaf = Leaf(rng.randrange(labels), counter[0])
            counter[0] += 1
            return leaf
        var = rng.choice(avail)
        return InternalNode(var, build(d - 1, used | {var}), build(d - 1, used | {var}))

    return DecisionTree(arity, build(depth, frozenset())).require_valid()


def random_dist(rng, arity: int, max_denominator: int = 8) -> Dist:
    """A random rational distribution with small denominators."""
    n = 1 << arity
    weights = [rng.randrange(0, max_denominator + 1) for _ in range(n)]
    if sum(weights) == 0:
        weights[rng.randrange(n)] = 1
    return Dist.from_weights([Fraction(w) for w in weights])


def random_full_support_dist(rng, arity: int, max_weight: int = 8) -> Dist:
    n = 1 << arity
    weights = [rng.randrange(1, max_weight + 1) for _ in range(n)]
    return Dist.from_weights([Fraction(w) for w in weights])


def random_relation(rng, arity: int, alphabet: int) -> Relation:
    accepted = []
    for _ in range(1 << arity):
        labels = [r for r in range(alphabet) if rng.random() < 0.5]
        if not labels:
            labels = [rng.randrange(alphabet)]
        accepted.append(frozenset(labels))
    return Relation(arity, alphabet, tuple(accepted))


def random_truth_table(rng, arity: int) -> TruthTable:
    return TruthTable(arity, tuple(rng.randrange(2) for _ in range(1 << arity)))
