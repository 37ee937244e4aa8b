import json
import random

import pytest
from hypothesis import given

from collapse_lab.collapse import (
    CarrierRelation,
    NotWellFoundedError,
    ackermann_image,
    addition_graph_oracle,
    addition_graph_via_collapse,
    collapse,
    find_cycle,
    is_well_founded,
    membership_relation,
    opair_tree,
    pair_tree,
    tree_collapse,
    tree_relation,
)
from collapse_lab.hf import EMPTY, canon, kuratowski, rank, singleton, transitive_closure, v_level, von_neumann
from collapse_lab.samples import random_set, random_transitive_set, random_tree
from collapse_lab.trees import FiniteTree
from strategies import dags, trees

ONE = singleton(EMPTY)


def _longest_chain(n, edges):
    below = {u: [v for v, w in edges if w == u] for u in range(n)}
    memo = {}

    def depth(u):
        if u not in memo:
            memo[u] = max((depth(v) + 1 for v in below[u]), default=0)
        return memo[u]

    return [depth(u) for u in range(n)]


def test_well_foundedness_examples():
    assert is_well_founded(CarrierRelation(["a"], []))
    assert not is_well_founded(CarrierRelation(["a"], [("a", "a")]))


def test_random_dags_and_back_edges():
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(2, 50)
        edges = {(i, j) for j in range(n) for i in range(j) if rng.random() < 0.1}
        edges.add((0, n - 1))
        rel = CarrierRelation(range(n), edges)
        assert is_well_founded(rel) and find_cycle(rel) is None
        back = CarrierRelation(range(n), edges | {(n - 1, 0)})
        assert not is_well_founded(back)
        cyc = find_cycle(back)
        assert cyc[0] == 0 and all((cyc[k], cyc[(k + 1) % len(cyc)]) in back.edges for k in range(len(cyc)))


def test_cycle_is_reported():
    with pytest.raises(NotWellFoundedError) as info:
        collapse(CarrierRelation("abc", [("a", "b"), ("b", "c"), ("c", "b")]))
    assert info.value.cycle == ["b", "c"]


def test_collapse_examples():
    assert collapse(CarrierRelation(["a"], [])) == {"a": EMPTY}
    t = FiniteTree.from_sequences([(), (0,), (0, 0), (1,)])
    assert t.collapse_root() is canon([ONE, EMPTY])
    assert FiniteTree.from_sequences([(), (0,), (0, 0)]).collapse_root() is canon([ONE])
    assert FiniteTree.single().collapse_root() is EMPTY


def test_membership_collapse_is_identity():
    rng = random.Random(5)
    for _ in range(100):
        x = random_set(rng)
        pi = collapse(membership_relation(transitive_closure(singleton(x))))
        assert all(pi[y] is y for y in pi)
    for _ in range(100):
        a = random_transitive_set(rng, rng.randint(1, 8))
        pi = collapse(membership_relation(a))
        assert all(pi[y] is y for y in a)


@given(dags())
def test_collapse_equation_and_uniqueness(dag):
    n, edges = dag
    rel = CarrierRelation(range(n), edges)
    pi = collapse(rel)
    for u in range(n):
        assert pi[u] is canon(pi[v] for v, w in edges if w == u)
    # perturbing any single value breaks the equation somewhere
    u = n - 1
    bad = dict(pi)
    bad[u] = singleton(pi[u])
    assert any(bad[w] is not canon(bad[v] for v, x in edges if x == w) for w in range(n))


@given(dags())
def test_rank_is_longest_chain(dag):
    n, edges = dag
    pi = collapse(CarrierRelation(range(n), edges))
    assert [rank(pi[u]) for u in range(n)] == _longest_chain(n, edges)


@given(trees())
def test_tree_collapse_agrees_with_relation_collapse(t):
    assert tree_collapse(t) == collapse(tree_relation(t))


@given(trees(10), trees(10))
def test_pair_trees(t0, t1):
    a, b = t0.collapse_root(), t1.collapse_root()
    assert pair_tree(t0, t1).collapse_root() is canon([a, b])
    assert opair_tree(t0, t1).collapse_root() is kuratowski(a, b)
    assert pair_tree(t0, t0).collapse_root() is singleton(a)


def test_pair_tree_examples():
    s = FiniteTree.single()
    assert pair_tree(s, s).collapse_root() is ONE
    assert opair_tree(s, FiniteTree.from_sequences([(), (0,)])).collapse_root() is kuratowski(EMPTY, ONE)


def test_addition_examples():
    assert addition_graph_via_collapse(1) is canon([kuratowski(kuratowski(EMPTY, EMPTY), EMPTY)])
    assert addition_graph_via_collapse(4) is addition_graph_oracle(4)
    triple = kuratowski(kuratowski(von_neumann(2), von_neumann(3)), von_neumann(5))
    assert triple in addition_graph_via_collapse(6)


def test_ackermann_collapse():
    assert ackermann_image(4) is v_level(4)
    assert ackermann_image(2) is v_level(3)
    for bits in range(6):
        assert ackermann_image(bits) is canon(_ackermann_decode(n) for n in range(1 << bits))


def _ackermann_decode(n):
    return canon(_ackermann_decode(i) for i in range(n.bit_length()) if n >> i & 1)


def test_relation_json_round_trip():
    rng = random.Random(2)
    t = random_tree(rng, 15)
    rel = tree_relation(t)
    again = CarrierRelation.from_json(json.loads(json.dumps(rel.to_json())))
    assert again.edges == rel.edges and set(again.carrier) == set(rel.carrier)
    assert FiniteTree.from_json(json.loads(json.dumps(t.to_json()))) == t
