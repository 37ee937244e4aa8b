import itertools
import random
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_lab import hf
from collapse_lab.hf import (
    EMPTY,
    SizeLimitError,
    canon,
    finite_powerset,
    first,
    format_set,
    from_json,
    is_ordinal,
    is_transitive,
    kuratowski,
    parse_set,
    rank,
    second,
    singleton,
    to_json,
    transitive_closure,
    v_level,
    von_neumann,
)
from collapse_lab.samples import random_set
from strategies import hf_sets

ONE = singleton(EMPTY)


def test_canon_basics():
    assert canon([]) is EMPTY
    assert canon([EMPTY, EMPTY]) is ONE
    assert canon([ONE, EMPTY]) is canon([EMPTY, ONE])


def test_kuratowski_expansion():
    assert kuratowski(EMPTY, EMPTY) is canon([ONE])
    assert kuratowski(EMPTY, ONE) is canon([ONE, canon([EMPTY, ONE])])


def test_pair_decoding_random():
    rng = random.Random(7)
    for _ in range(100):
        a, b = random_set(rng), random_set(rng)
        p = kuratowski(a, b)
        assert first(p) is a and second(p) is b


def test_transitive_closure_examples():
    assert transitive_closure(EMPTY) is EMPTY
    assert transitive_closure(canon([ONE])) is canon([ONE, EMPTY])
    for n in range(7):
        assert transitive_closure(von_neumann(n)) is von_neumann(n)


def test_rank_examples():
    assert rank(EMPTY) == 0
    assert rank(von_neumann(5)) == 5
    assert rank(kuratowski(EMPTY, ONE)) == 3


def test_powerset_and_levels():
    assert finite_powerset(ONE) is canon([EMPTY, ONE])
    assert len(finite_powerset(von_neumann(3))) == 8
    assert v_level(3) is canon([EMPTY, ONE, canon([ONE]), canon([EMPTY, ONE])])
    with pytest.raises(SizeLimitError):
        v_level(6)


def test_node_guard():
    with hf.limits(max_nodes=hf.table_size() + 5):
        with pytest.raises(SizeLimitError):
            finite_powerset(von_neumann(12))


def test_construction_order_is_irrelevant():
    rng = random.Random(3)
    base = [von_neumann(i) for i in range(5)] + [ONE, canon([ONE])]
    for _ in range(1000):
        items = rng.sample(base, rng.randint(0, len(base)))
        shuffled = items[:]
        rng.shuffle(shuffled)
        assert canon(items) is canon(shuffled + items[:1])


def test_concurrent_interning():
    results = []

    def build():
        results.append([canon([von_neumann(k), canon([von_neumann(k)])]) for k in range(30)])

    threads = [threading.Thread(target=build) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for r in results[1:]:
        assert all(x is y for x, y in zip(r, results[0]))


@given(hf_sets())
def test_tc_idempotent_and_rank_preserving(a):
    tc = transitive_closure(a)
    assert transitive_closure(tc) is tc
    assert is_transitive(tc)
    assert rank(tc) == rank(a)
    assert all(m in tc for m in a)


@given(hf_sets(), hf_sets())
def test_tc_monotone(a, b):
    union = hf.union(a, b)
    assert set(transitive_closure(a)) <= set(transitive_closure(union))


@given(st.integers(0, 6))
def test_powerset_cardinality(n):
    a = canon(von_neumann(k) for k in range(n) if k % 2 == 0 or n < 4) if n else EMPTY
    assert len(finite_powerset(a)) == 2 ** len(a)


@given(hf_sets())
def test_text_and_json_round_trip(a):
    assert parse_set(format_set(a)) is a
    assert from_json(to_json(a)) is a


def test_von_neumann_syntax():
    assert parse_set("#3") is von_neumann(3)
    assert parse_set("{#0, #1}") is von_neumann(2)
    assert is_ordinal(von_neumann(4)) and not is_ordinal(canon([ONE]))
    with pytest.raises(hf.SetSyntaxError):
        parse_set("{{}")


@given(hf_sets(), hf_sets())
def test_equality_is_identity(a, b):
    extensional = set(a) == set(b)
    assert (a is b) == extensional


def test_powerset_members_are_exactly_subsets():
    a = von_neumann(4)
    members = list(a)
    subsets = {canon(c) for r in range(5) for c in itertools.combinations(members, r)}
    assert set(finite_powerset(a)) == subsets
