import json
import random

import pytest

from collapse_lab.bisim import is_bisimulation, maximal_bisimulation
from collapse_lab.collapse import CarrierRelation, pair_tree
from collapse_lab.hf import EMPTY, canon, kuratowski, singleton, von_neumann
from collapse_lab.logic import And, Equal, ExistsIn, ForallIn, Member, Not, Or
from collapse_lab.recursion import (
    InvalidInstanceError,
    TRInstance,
    bisim_via_tr,
    check_recursion,
    instance_from_json,
    instance_to_json,
    tr_direct,
    tr_trees,
    validate_instance,
)
from collapse_lab.samples import random_tr_instance, random_tree
from collapse_lab.trees import FiniteTree

ONE = singleton(EMPTY)
X4 = [von_neumann(i) for i in range(4)]


def _chain(xs):
    return CarrierRelation(xs, [(xs[i], xs[i + 1]) for i in range(len(xs) - 1)])


def _both(inst):
    d = tr_direct(inst)
    assert tr_trees(inst) == d
    assert check_recursion(inst, d) == []
    return d


def test_validation_examples():
    x = CarrierRelation([EMPTY], [])
    assert validate_instance(TRInstance(ONE, x, Member(0, 1)))
    assert not validate_instance(TRInstance(ONE, x, Equal(1, 1)))
    cyc = CarrierRelation([EMPTY, ONE], [(EMPTY, ONE), (ONE, EMPTY)])
    assert not validate_instance(TRInstance(ONE, cyc, Member(0, 1)))
    with pytest.raises(InvalidInstanceError):
        tr_direct(TRInstance(ONE, x, Equal(1, 1)))


def test_single_stage_full_slice():
    a = von_neumann(3)
    d = _both(TRInstance(a, CarrierRelation([EMPTY], []), Equal(0, 0)))
    assert d.pairs == {(c, EMPTY) for c in a}


def test_alternating_slices():
    # u lies in no slice of the immediate predecessor
    everything = canon(kuratowski(EMPTY, s) for s in X4)
    psi = ForallIn(3, 2, Not(Member(3, 1)))
    d = _both(TRInstance(ONE, _chain(X4), psi, (everything,)))
    assert [d.slice(s) for s in X4] == [ONE, EMPTY, ONE, EMPTY]


def test_base_slice_shifts_upward():
    a = von_neumann(2)
    xs = X4[:3]
    pairs = canon(kuratowski(c, s) for c in a for s in xs)
    base = singleton(ONE)
    first_is_u = ExistsIn(5, 4, And(Member(0, 5), ForallIn(6, 5, Equal(6, 0))))
    psi = Or(
        And(Member(0, 3), ForallIn(4, 2, Not(Member(4, 1)))),
        ExistsIn(4, 2, And(Member(4, 1), first_is_u)),
    )
    d = _both(TRInstance(a, _chain(xs), psi, (pairs, base)))
    assert [d.slice(s) for s in xs] == [base, base, base]


def test_empty_stage_set():
    d = _both(TRInstance(ONE, CarrierRelation([], []), Member(0, 1)))
    assert d.pairs == frozenset()


def test_random_instances_and_shuffle_invariance():
    rng = random.Random(31)
    for k in range(60):
        inst = random_tr_instance(rng)
        d = _both(inst)
        assert tr_direct(inst, shuffle_seed=k) == d


def test_instance_json_round_trip():
    inst = random_tr_instance(random.Random(4))
    again = instance_from_json(json.loads(json.dumps(instance_to_json(inst))))
    assert again == inst


def test_bisim_via_tr_examples():
    assert bisim_via_tr(FiniteTree.single()) == {((), ())}
    s = random_tree(random.Random(2), 5)
    p = pair_tree(s, s)
    b = bisim_via_tr(p)
    assert ((0,), (1,)) in b and b == maximal_bisimulation(p)


def test_bisim_via_tr_random():
    rng = random.Random(9)
    for _ in range(15):
        t = random_tree(rng, rng.randint(1, 30))
        b = bisim_via_tr(t)
        assert is_bisimulation(t, b)
        assert b == maximal_bisimulation(t)
