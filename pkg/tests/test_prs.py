import random
import warnings

import pytest
from hypothesis import given

from collapse_lab.hf import (
    EMPTY,
    SizeLimitError,
    canon,
    finite_powerset,
    kuratowski,
    limits,
    parse_set,
    rank,
    singleton,
    transitive_closure,
    union_of,
    von_neumann,
)
from collapse_lab.prs import (
    ADJOIN,
    COND,
    ArityError,
    Comp,
    ConstParam,
    PartialPowersetWarning,
    PrimRec,
    PrimSyntaxError,
    Proj,
    RudBasic,
    UnboundParameterError,
    ZeroFn,
    arity,
    beta_oracle,
    eval_prim,
    format_program,
    parse_program,
    pfin_prim,
    pfin_program,
    rank_graph_program,
    rank_via_beta,
    rud,
    tc_program,
    tc_rud,
)
from collapse_lab.samples import random_set, random_transitive_set
from strategies import hf_sets

ONE = singleton(EMPTY)
TWO = von_neumann(2)


def _pairs_in(x):
    # brute force: search the double union for components
    pool = list(union_of(union_of(x)))
    return [(u, v) for u in pool for v in pool if kuratowski(u, v) in x]


def _oracle(i, x, y):
    if i == 0:
        return canon([x, y])
    if i == 1:
        return canon(z for z in x if z not in y)
    if i == 2:
        return canon(kuratowski(u, v) for u in x for v in y)
    if i == 3:
        return canon(kuratowski(u, kuratowski(w, v)) for w in x for u, v in _pairs_in(y))
    if i == 4:
        return canon(kuratowski(u, kuratowski(v, w)) for w in x for u, v in _pairs_in(y))
    if i == 5:
        return canon(w for z in x for w in z)
    if i == 6:
        return canon(u for u, _ in _pairs_in(x))
    if i == 7:
        return canon(kuratowski(u, v) for u in x for v in x if u in v)
    return canon(canon(w for w, z2 in _pairs_in(x) if z2 is z) for z in y)


def _relation_set(rng):
    base = list(random_transitive_set(rng, rng.randint(1, 5)))
    return canon(kuratowski(rng.choice(base), rng.choice(base)) for _ in range(rng.randint(0, 5)))


def test_basic_examples():
    assert eval_prim(ADJOIN, [EMPTY, EMPTY]) is ONE
    a, b = von_neumann(3), TWO
    assert eval_prim(COND, [a, b, EMPTY, ONE]) is a
    assert eval_prim(COND, [a, b, ONE, ONE]) is b
    assert rud(0, EMPTY, ONE) is TWO
    assert rud(5, canon([ONE, singleton(ONE)]), EMPTY) is TWO


def test_hand_recursion():
    # f(x) = f-values of members, united, with x adjoined
    f = PrimRec(Comp(ADJOIN, (Proj(0, 2), Proj(1, 2))))
    assert eval_prim(f, [EMPTY]) is ONE
    assert eval_prim(f, [ONE]) is canon([EMPTY, ONE])
    # on {{∅}}: f({∅}) = {∅,{∅}}, then adjoin {{∅}}
    x = singleton(ONE)
    assert eval_prim(f, [x]) is canon([EMPTY, ONE, x])


@pytest.mark.parametrize("i", range(9))
def test_rudimentary_basis_against_comprehension(i):
    rng = random.Random(100 + i)
    for _ in range(100):
        x = _relation_set(rng) if rng.random() < 0.5 else random_set(rng, 3, 3)
        y = _relation_set(rng) if rng.random() < 0.5 else random_set(rng, 3, 3)
        assert rud(i, x, y) is _oracle(i, x, y)
        assert eval_prim(RudBasic(i), [x, y]) is rud(i, x, y)


def test_transitive_closure_program():
    assert tc_rud(EMPTY) is EMPTY
    assert tc_rud(singleton(ONE)) is canon([ONE, EMPTY])
    rng = random.Random(7)
    for _ in range(200):
        x = random_set(rng)
        assert tc_rud(x) is transitive_closure(x)


def test_finite_powerset_program():
    assert pfin_prim(EMPTY, 0) is ONE
    assert pfin_prim(TWO, 2) is finite_powerset(TWO)
    assert len(pfin_prim(TWO, 2)) == 4
    rng = random.Random(8)
    for _ in range(100):
        x = random_set(rng, 3, 5)
        assert pfin_prim(x, len(x)) is finite_powerset(x)


def test_truncated_omega_is_flagged():
    x = von_neumann(3)
    with pytest.warns(PartialPowersetWarning):
        part = pfin_prim(x, 1)
    # ω = 1 allows two growth steps: subsets of size at most 2
    assert part is canon(s for s in finite_powerset(x) if len(s) <= 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pfin_prim(x, 3)


def test_beta_oracle_examples():
    assert beta_oracle(EMPTY, EMPTY) is EMPTY
    a = von_neumann(4)
    eps = canon(kuratowski(u, v) for v in a for u in v)
    assert beta_oracle(a, eps) is canon(kuratowski(u, u) for u in a)
    cyc = canon([kuratowski(EMPTY, ONE), kuratowski(ONE, EMPTY)])
    assert beta_oracle(TWO, cyc) is EMPTY
    # pairs outside a, or non-pairs, are not a relation on a
    assert beta_oracle(ONE, canon([kuratowski(EMPTY, ONE)])) is EMPTY
    assert beta_oracle(TWO, canon([TWO])) is EMPTY


@given(hf_sets(6))
def test_rank_through_the_oracle(x):
    graph = rank_via_beta(x)
    closure = transitive_closure(singleton(x))
    assert graph is canon(kuratowski(y, von_neumann(rank(y))) for y in closure)


def test_arity_checking():
    assert arity(tc_program()) == 1
    assert arity(pfin_program()) == 1
    assert arity(rank_graph_program()) == 1
    assert arity(ConstParam("omega")) is None
    with pytest.raises(ArityError):
        arity(Comp(ADJOIN, (Proj(0, 1),)))
    with pytest.raises(ArityError):
        arity(Comp(ADJOIN, (Proj(0, 1), Proj(0, 2))))
    with pytest.raises(ArityError):
        arity(Proj(2, 2))
    with pytest.raises(ArityError):
        eval_prim(ADJOIN, [EMPTY])
    with pytest.raises(UnboundParameterError):
        eval_prim(pfin_program(), [EMPTY])


def test_size_guard():
    with limits(max_nodes=5):
        with pytest.raises(SizeLimitError):
            tc_rud(von_neumann(8))


def test_program_syntax():
    for prog in (tc_program(), pfin_program(), rank_graph_program(), ZeroFn(3)):
        assert parse_program(format_program(prog)) == prog
    text = """
    ; union of x and y
    (comp (rud 5) (comp (rud 0) (proj 0 2) (proj 1 2)) (proj 0 2))
    """
    u = parse_program(text)
    assert eval_prim(u, [ONE, parse_set("{{{}}}")]) is canon([EMPTY, ONE])
    for bad in ("(proj 0)", "(comp", "(rud x)", "(frob 1)", "adjoin adjoin"):
        with pytest.raises(PrimSyntaxError):
            parse_program(bad)
