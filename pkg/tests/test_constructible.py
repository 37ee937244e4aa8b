import random

import pytest

from collapse_lab.constructible import audit_def, def_set, definable_subset, l_level, rank_function
from collapse_lab.hf import (
    EMPTY,
    SizeLimitError,
    canon,
    finite_powerset,
    is_transitive,
    kuratowski,
    limits,
    rank,
    singleton,
    transitive_closure,
    union,
    v_level,
    von_neumann,
)
from collapse_lab.logic import Equal, Exists, Member, ext_equal
from collapse_lab.samples import random_set

ONE = singleton(EMPTY)


def _subset(a, b):
    return all(x in b for x in a)


def test_definable_subset_examples():
    a = v_level(2)
    assert definable_subset(a, Equal(0, 0)) is a
    assert definable_subset(a, Exists(1, Member(1, 0))) is singleton(ONE)
    b = von_neumann(4)
    p = von_neumann(2)
    assert definable_subset(b, ext_equal(0, 1, 2), [p]) is singleton(p)
    with pytest.raises(ValueError):
        definable_subset(b, Equal(0, 1), [von_neumann(7)])


def test_def_set_examples_and_guard():
    assert def_set(EMPTY) is ONE
    assert def_set(ONE) is canon([EMPTY, ONE])
    assert def_set(von_neumann(4)) is finite_powerset(von_neumann(4))
    with limits(max_nodes=100):
        with pytest.raises(SizeLimitError):
            def_set(von_neumann(7))


def test_def_audit_saturates():
    report = audit_def(von_neumann(3), max_size=9)
    assert report.ok and report.saturated_at is not None and report.saturated_at <= 9
    assert len(report.reached) == 8
    assert audit_def(EMPTY).ok


def test_definable_subsets_belong_to_def():
    rng = random.Random(5)
    formulas = [Member(0, 1), Member(1, 0), Equal(0, 1), Exists(2, Member(2, 0)), Exists(2, Member(0, 2))]
    for _ in range(40):
        a = transitive_closure(random_set(rng, 3, 3))
        if not a:
            continue
        params = [rng.choice(list(a))]
        for f in formulas:
            sub = definable_subset(a, f, params)
            assert _subset(sub, a) and sub in def_set(a)


def test_level_examples():
    assert l_level(EMPTY, 0).levels == (EMPTY,)
    assert l_level(EMPTY, 2)[2] is canon([EMPTY, ONE])
    seq = l_level(EMPTY, 4)
    assert len(seq) == 5
    for n in range(5):
        assert seq[n] is v_level(n)


def test_levels_transitive_and_monotone():
    rng = random.Random(9)
    for _ in range(20):
        b = random_set(rng, 2, 2)
        seq = l_level(b, 2)
        for k in range(len(seq)):
            assert is_transitive(seq[k])
        for k in range(len(seq) - 1):
            assert _subset(seq[k], seq[k + 1])


def test_relativized_monotonicity():
    rng = random.Random(10)
    for _ in range(20):
        b = random_set(rng, 2, 2)
        c = union(b, random_set(rng, 2, 2))
        lb, lc = l_level(b, 2), l_level(c, 2)
        for k in range(3):
            assert _subset(lb[k], lc[k])


@pytest.mark.parametrize("m,n", [(0, 1), (1, 1), (1, 2), (2, 1)])
def test_levels_compose(m, n):
    for b in (EMPTY, ONE, singleton(ONE)):
        inner = l_level(b, m)[m]
        assert l_level(inner, n)[n] is l_level(b, m + n)[m + n]


def test_rank_function():
    assert rank_function(EMPTY) == {EMPTY: EMPTY}
    x = kuratowski(EMPTY, ONE)
    assert rank_function(x) == {y: von_neumann(rank(y)) for y in transitive_closure(singleton(x))}
    f4 = rank_function(von_neumann(4))
    assert all(f4[y] is y for y in f4) and len(f4) == 5
    rng = random.Random(12)
    for _ in range(50):
        x = random_set(rng)
        assert all(v is von_neumann(rank(y)) for y, v in rank_function(x).items())
