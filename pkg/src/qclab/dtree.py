"""Deterministic decision trees as explicit binary trees.

Trees are immutable after validation.  Paths are read-once: no variable is
queried twice on a root-to-leaf path, so the codimension of a path subcube
always equals the path length.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

from .core import (
    ArityMismatch,
    Dist,
    QclabError,
    Subcube,
    subcube_prob,
)


@dataclass(frozen=True)
class Leaf:
    label: int
    leaf_id: int


@dataclass(frozen=True)
class InternalNode:
    query_var: int  # 0-based flat variable index
    child0: "Node"
    child1: "Node"


Node = Union[Leaf, InternalNode]


@dataclass(frozen=True)
class Validation:
    ok: bool
    violation: str | None = None


@dataclass(frozen=True)
class DecisionTree:
    arity: int
    root: Node

    def validate(self) -> Validation:
        """Check read-once paths, unique leaf ids and the depth bound."""
        seen_ids = set()

        def walk(node: Node, path_vars: frozenset) -> str | None:
            if isinstance(node, Leaf):
                if node.leaf_id in seen_ids:
                    return f"DuplicateLeafId:{node.leaf_id}"
                seen_ids.add(node.leaf_id)
                return None
            if not 0 <= node.query_var < self.arity:
                return f"VariableOutOfRange:{node.query_var}"
            if node.query_var in path_vars:
                return f"ReadOnce:{node.query_var}"
            extended = path_vars | {node.query_var}
            return walk(node.child0, extended) or walk(node.child1, extended)

        violation = walk(self.root, frozenset())
        return Validation(ok=violation is None, violation=violation)

    def require_valid(self) -> "DecisionTree":
        v = self.validate()
        if not v.ok:
            raise QclabError(f"invalid decision tree: {v.violation}")
        return self

    def evaluate(self, x: int) -> tuple[int, int, int]:
        """Follow ``x`` to a leaf; returns (label, leaf_id, queries made)."""
        if not 0 <= x < (1 << self.arity):
            raise ArityMismatch(f"point {x} out of range for arity {self.arity}")
        node = self.root
        queries = 0
        while isinstance(node, InternalNode):
            queries += 1
            node = node.child1 if (x >> node.query_var) & 1 else node.child0
        return node.label, node.leaf_id, queries

    def output(self, x: int) -> int:
        return self.evaluate(x)[0]

    def depth(self) -> int:
        def d(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(d(node.child0), d(node.child1))

        return d(self.root)

    def leaves(self) -> Iterator[Leaf]:
        for leaf, _ in self.leaf_paths():
            yield leaf

    def leaf_paths(self) -> Iterator[tuple[Leaf, tuple[tuple[int, int], ...]]]:
        """Yield each leaf with its root-to-leaf assignment sequence, in
        path order as ``(query_var, branch_bit)`` pairs."""

        def walk(node: Node, path: tuple):
            if isinstance(node, Leaf):
                yield node, path
            else:
                yield from walk(node.child0, path + ((node.query_var, 0),))
                yield from walk(node.child1, path + ((node.query_var, 1),))

        yield from walk(self.root, ())

    def path_to(self, target: Node) -> tuple[tuple[int, int], ...]:
        """Assignment sequence leading to ``target`` (matched by identity)."""

        def walk(node: Node, path: tuple):
            if node is target:
                return path
            if isinstance(node, InternalNode):
                found = walk(node.child0, path + ((node.query_var, 0),))
                if found is not None:
                    return found
                return walk(node.child1, path + ((node.query_var, 1),))
            return None

        path = walk(self.root, ())
        if path is None:
            raise QclabError("node does not belong to this tree")
        return path


def make_tree(arity: int, root_spec) -> DecisionTree:
    """Build a tree from a nested spec: a leaf label ``int`` or a triple
    ``(var, spec0, spec1)``.  Leaf ids are assigned in depth-first order."""
    counter = [0]

    def build(spec) -> Node:
        if isinstance(spec, int):
            leaf = Leaf(spec, counter[0])
            counter[0] += 1
            return leaf
        var, s0, s1 = spec
        return InternalNode(var, build(s0), build(s1))

    return DecisionTree(arity, build(root_spec)).require_valid()


def path_subcube(tree: DecisionTree, node: Node) -> Subcube:
    """Subcube of inputs routed through ``node``."""
    path = tree.path_to(node)
    return Subcube.from_mapping(tree.arity, dict(path))


@dataclass(frozen=True)
class BlockStructure:
    """Partition of ``blocks * block_width`` flat variables into contiguous
    copies: flat variable v belongs to copy ``v // block_width``."""

    blocks: int
    block_width: int

    @property
    def total_arity(self) -> int:
        return self.blocks * self.block_width

    def copy_of(self, flat_var: int) -> tuple[int, int]:
        if not 0 <= flat_var < self.total_arity:
            raise ArityMismatch(f"flat variable {flat_var} out of range")
        return divmod(flat_var, self.block_width)

    def flat_var(self, copy: int, within: int) -> int:
        return copy * self.block_width + within

    def extract(self, x: int, copy: int) -> int:
        """Copy-local point of the flat point ``x``."""
        return (x >> (copy * self.block_width)) & ((1 << self.block_width) - 1)

    def split_assignments(self, path) -> list[list[tuple[int, int]]]:
        """Split a flat assignment sequence into per-copy sequences of
        ``(within_var, bit)`` pairs, preserving order."""
        per_copy: list[list[tuple[int, int]]] = [[] for _ in range(self.blocks)]
        for var, b in path:
            i, j = self.copy_of(var)
            per_copy[i].append((j, b))
        return per_copy


def block_subcubes(tree: DecisionTree, node: Node, block: BlockStructure) -> list[Subcube]:
    """Per-copy factors of the path subcube of ``node``."""
    if tree.arity != block.total_arity:
        raise ArityMismatch("tree arity does not match block structure")
    path = tree.path_to(node)
    return [
        Subcube.from_mapping(block.block_width, dict(assigns))
        for assigns in block.split_assignments(path)
    ]


def reach_probs_product(
    tree: DecisionTree, block: BlockStructure, per_copy_dists: list[Dist]
) -> dict[int, Fraction]:
    """Exact leaf-reach probabilities when the copies are independent, copy i
    distributed by ``per_copy_dists[i]``."""
    if tree.arity != block.total_arity:
        raise ArityMismatch("tree arity does not match block structure")
    if len(per_copy_dists) != block.blocks:
        raise ArityMismatch("need one distribution per copy")
    for d in per_copy_dists:
        if d.arity != block.block_width:
            raise ArityMismatch("copy distribution arity mismatch")
    out: dict[int, Fraction] = {}
    for leaf, path in tree.leaf_paths():
        prob = Fraction(1)
        for i, assigns in enumerate(block.split_assignments(path)):
            cube = Subcube.from_mapping(block.block_width, dict(assigns))
            prob *= subcube_prob(per_copy_dists[i], cube)
            if prob == 0:
                break
        out[leaf.leaf_id] = prob
    return out
