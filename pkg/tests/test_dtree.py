import random
from fractions import Fraction as F

import pytest

from qclab.core import Dist, QclabError, Subcube
from qclab.dtree import (
    BlockStructure,
    DecisionTree,
    InternalNode,
    Leaf,
    block_subcubes,
    make_tree,
    path_subcube,
    reach_probs_product,
)

from _oracles import brute_reach_probs, random_dist, random_tree


def dictator_tree(arity=2, var=0):
    return make_tree(arity, (var, 0, 1))


def xor2_tree():
    return make_tree(2, (0, (1, 0, 1), (1, 1, 0)))


class TestEvaluate:
    def test_single_leaf(self):
        tree = make_tree(3, 1)
        for x in range(8):
            assert tree.evaluate(x) == (1, 0, 0)

    def test_dictator(self):
        tree = dictator_tree()
        label, _, queries = tree.evaluate(0b01)
        assert (label, queries) == (1, 1)
        assert tree.evaluate(0b10)[0] == 0

    def test_xor_full_depth(self):
        tree = xor2_tree()
        label, _, queries = tree.evaluate(0b01)
        assert (label, queries) == (1, 2)

    def test_out_of_range(self):
        with pytest.raises(QclabError):
            dictator_tree().evaluate(4)


class TestValidate:
    def test_requery_rejected(self):
        inner = InternalNode(0, Leaf(0, 0), Leaf(1, 1))
        tree = DecisionTree(2, InternalNode(0, inner, Leaf(1, 2)))
        verdict = tree.validate()
        assert not verdict.ok
        assert "ReadOnce" in verdict.violation
        with pytest.raises(QclabError):
            make_tree(2, (0, (0, 0, 1), 1))

    def test_duplicate_leaf_id(self):
        leaf = Leaf(0, 0)
        tree = DecisionTree(2, InternalNode(0, leaf, leaf))
        verdict = tree.validate()
        assert not verdict.ok
        assert "DuplicateLeafId" in verdict.violation

    def test_variable_out_of_range(self):
        tree = DecisionTree(2, InternalNode(5, Leaf(0, 0), Leaf(1, 1)))
        assert not tree.validate().ok

    def test_valid_tree(self):
        assert dictator_tree().validate().ok
        assert xor2_tree().require_valid() is not None


class TestPathSubcube:
    def test_root_is_full_cube(self):
        tree = xor2_tree()
        assert path_subcube(tree, tree.root).codim == 0

    def test_child_fixes_one_bit(self):
        tree = make_tree(4, (2, 0, 1))
        child = tree.root.child1
        cube = path_subcube(tree, child)
        assert cube.fixed == ((2, 1),)

    def test_leaf_codim_equals_depth(self):
        rng = random.Random(2)
        for _ in range(20):
            tree = random_tree(rng, 4, 3, 2)
            for leaf, path in tree.leaf_paths():
                cube = path_subcube(tree, leaf)
                assert cube.codim == len(path)


class TestBlockStructure:
    def test_mapping_bijective(self):
        b = BlockStructure(3, 2)
        seen = {b.copy_of(v) for v in range(6)}
        assert len(seen) == 6
        for v in range(6):
            i, j = b.copy_of(v)
            assert b.flat_var(i, j) == v

    def test_extract(self):
        b = BlockStructure(2, 2)
        # flat point 1101 in variable order: copy 0 = (1,1), copy 1 = (0,1)
        x = 0b1011
        assert b.extract(x, 0) == 0b11
        assert b.extract(x, 1) == 0b10

    def test_block_subcubes_root(self):
        tree = make_tree(4, 0)
        cubes = block_subcubes(tree, tree.root, BlockStructure(2, 2))
        assert [c.codim for c in cubes] == [0, 0]

    def test_block_subcubes_split(self):
        # leaf path fixes two bits in copy 0 and one bit in copy 1
        tree = make_tree(4, (0, 0, (1, 0, (2, 0, 1))))
        leaf_node = tree.root.child1.child1.child1
        cubes = block_subcubes(tree, leaf_node, BlockStructure(2, 2))
        assert [c.codim for c in cubes] == [2, 1]
        assert sum(c.codim for c in cubes) == 3


class TestReachProbs:
    def test_single_leaf(self):
        tree = make_tree(2, 7)
        probs = reach_probs_product(tree, BlockStructure(1, 2), [Dist.uniform(2)])
        assert probs == {0: F(1)}

    def test_one_query_uniform(self):
        tree = make_tree(2, (0, 0, 1))
        probs = reach_probs_product(tree, BlockStructure(1, 2), [Dist.uniform(2)])
        assert set(probs.values()) == {F(1, 2)}

    def test_point_mass_indicator(self):
        tree = make_tree(4, (0, (2, 0, 1), (3, 1, 0)))
        block = BlockStructure(2, 2)
        for x in range(16):
            dists = [Dist.point_mass(2, block.extract(x, i)) for i in range(2)]
            probs = reach_probs_product(tree, block, dists)
            _, leaf_id, _ = tree.evaluate(x)
            assert probs[leaf_id] == 1
            assert sum(probs.values()) == 1

    def test_matches_flat_oracle_and_sums_to_one(self):
        rng = random.Random(9)
        block = BlockStructure(2, 2)
        for _ in range(20):
            tree = random_tree(rng, 4, 3, 2)
            factors = [random_dist(rng, 2), random_dist(rng, 2)]
            flat = Dist(4, tuple(
                factors[0].probs[block.extract(x, 0)] * factors[1].probs[block.extract(x, 1)]
                for x in range(16)
            ))
            got = reach_probs_product(tree, block, factors)
            assert got == brute_reach_probs(tree, flat)
            assert sum(got.values()) == 1


class TestMakeTree:
    def test_leaf_ids_unique_dfs(self):
        tree = xor2_tree()
        ids = [leaf.leaf_id for leaf in tree.leaves()]
        assert ids == [0, 1, 2, 3]

    def test_depth(self):
        assert make_tree(3, 0).depth() == 0
        assert xor2_tree().depth() == 2
