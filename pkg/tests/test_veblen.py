import itertools
import random

import numpy as np
import pytest

from collapse_lab.hf import von_neumann
from collapse_lab.veblen import (
    ZERO,
    Insufficient,
    NotDescendingError,
    PhiLow,
    PhiTop,
    QuasiOrder,
    Sum,
    VeblenSyntaxError,
    VeblenSystem,
    descending_transfer,
    enumerate_terms,
    equiv,
    finite_ordinal,
    format_term,
    from_normal_form0,
    h_lambda,
    leq,
    leq_matrix,
    lt,
    make_sum,
    normal_form0,
    order_collapse,
    parse_term,
    restrict_iso,
    reversed_naturals,
    value,
    vnf_add,
    vnf_compare,
    vnf_nat,
    vnf_phi,
)

OMEGA = vnf_phi(vnf_nat(0), vnf_nat(1))


def _sys(alpha, k):
    return VeblenSystem(alpha, finite_ordinal(k))


def test_parse_examples():
    assert parse_term("0") == ZERO
    assert parse_term("phi(0, phi(T,'a'))") == PhiLow(0, PhiTop("a"))
    assert parse_term("phi(T, '3') + phi(T,'1')") == Sum((PhiTop(3), PhiTop(1)))
    for bad in ("phi(T,)", "phi(0, 0) + 0", "phi(T, 'a'", "psi(T,'a')"):
        with pytest.raises(VeblenSyntaxError):
            parse_term(bad)


def test_round_trip_on_enumerated_terms():
    terms = enumerate_terms(_sys(2, 2), 6)
    rng = random.Random(0)
    for t in rng.sample(terms, 500):
        assert parse_term(format_term(t)) == t


def test_make_sum_flattens():
    a, b = PhiTop(0), PhiTop(1)
    assert make_sum([a, ZERO, make_sum([b, a])]) == Sum((a, b, a))
    assert make_sum([ZERO]) == ZERO and make_sum([a]) == a


def test_h_lambda():
    order = finite_ordinal(3)
    assert h_lambda(ZERO, order) is None
    assert h_lambda(PhiTop(1), order) == 1
    assert h_lambda(Sum((PhiTop(0), PhiLow(0, PhiTop(2)))), order) == 2


def test_comparison_examples():
    sys = _sys(3, 2)
    for t in enumerate_terms(sys, 4):
        assert leq(ZERO, t, sys)
    t = PhiTop(1)
    for beta in range(3):
        for gamma in range(beta):
            inner = PhiLow(beta, t)
            assert equiv(PhiLow(gamma, inner), inner, sys)


def test_value_examples():
    sys = _sys(2, 1)
    one = PhiLow(0, ZERO)
    assert value(one, sys) == vnf_nat(1)
    assert value(Sum((PhiLow(0, one), one)), sys) == vnf_add(OMEGA, vnf_nat(1))
    assert value(PhiLow(0, PhiLow(1, ZERO)), sys) == value(PhiLow(1, ZERO), sys)


def test_vnf_arithmetic():
    assert vnf_add(OMEGA, vnf_nat(1)) == OMEGA + vnf_nat(1)
    assert vnf_add(vnf_nat(1), OMEGA) == OMEGA
    assert vnf_phi((), ()) == vnf_nat(1)
    eps0 = vnf_phi(vnf_nat(1), ())
    assert vnf_compare(eps0, vnf_phi((), eps0)) == 0
    assert vnf_compare(OMEGA, eps0) == -1


@pytest.mark.parametrize("alpha,k", [(a, k) for a in range(4) for k in range(1, 5)])
def test_comparison_matches_ordinal_values(alpha, k):
    sys = _sys(alpha, k)
    terms = enumerate_terms(sys, 5)
    vals = [value(t, sys) for t in terms]
    m = leq_matrix(terms, sys)
    expect = np.array([[vnf_compare(x, y) <= 0 for y in vals] for x in vals])
    assert (m.astype(bool) == expect).all()


def test_matrix_agrees_with_recursive_comparison():
    sys = _sys(2, 2)
    terms = enumerate_terms(sys, 5)
    m = leq_matrix(terms, sys)
    rng = random.Random(1)
    for _ in range(2000):
        i, j = rng.randrange(len(terms)), rng.randrange(len(terms))
        assert bool(m[i, j]) == leq(terms[i], terms[j], sys)


def test_quasi_linear_laws():
    for alpha, k in itertools.product(range(3), range(1, 4)):
        sys = _sys(alpha, k)
        terms = enumerate_terms(sys, 5)
        m = leq_matrix(terms, sys).astype(bool)
        assert m.diagonal().all()
        assert (m | m.T).all()
        # transitivity: m∘m ⊆ m
        comp = (m.astype(np.int64) @ m.astype(np.int64)) > 0
        assert not (comp & ~m).any()


def test_sums_and_phi_monotone():
    sys = _sys(2, 2)
    terms = enumerate_terms(sys, 4)
    heads = [t for t in terms if isinstance(t, PhiLow)]
    nonsum = [t for t in terms if not isinstance(t, Sum) and t != ZERO]
    for p in heads:
        small = [s for s in nonsum if lt(s, p, sys)]
        for s0, s1 in itertools.product(small, repeat=2):
            assert lt(make_sum([s0, s1]), p, sys)
    for beta in range(2):
        for s, t in itertools.product(terms, repeat=2):
            if lt(s, t, sys):
                assert lt(PhiLow(beta, s), PhiLow(beta, t), sys)


def test_normal_form0():
    order = finite_ordinal(3)
    sys = VeblenSystem(0, order)
    assert normal_form0(ZERO, order) == []
    assert normal_form0(Sum((PhiTop(0), PhiTop(2))), order) == [2]
    assert normal_form0(Sum((PhiTop(2), PhiTop(0))), order) == [2, 0]
    rng = random.Random(4)
    terms = enumerate_terms(sys, 7)
    for t in rng.sample(terms, 300):
        nf = normal_form0(t, order)
        assert all(order.leq(y, x) for x, y in zip(nf, nf[1:]))
        back = from_normal_form0(nf)
        assert equiv(back, t, sys)
        assert normal_form0(back, order) == nf


def test_normal_form0_on_a_quasi_order():
    # 0 ≡ 1 < 2: equivalent elements do not absorb each other
    level = {0: 0, 1: 0, 2: 1}
    order = QuasiOrder(lambda x, y: level[x] <= level[y], range(3), "q")
    assert order.check_laws()
    assert normal_form0(Sum((PhiTop(0), PhiTop(1), PhiTop(2))), order) == [2]
    assert normal_form0(Sum((PhiTop(1), PhiTop(0))), order) == [1, 0]


def _trace_stream():
    return (PhiTop(n) for n in itertools.count())


def _diagonal_stream():
    # f(n) = φ(0,0)+φ(0,1)+…+φ(0,n−1)+φ(0,n−1): each coordinate settles, none keeps moving
    for n in itertools.count(1):
        yield make_sum([PhiTop(i) for i in range(n)] + [PhiTop(n - 1)])


def test_descent_trace_family():
    out = descending_transfer(_trace_stream(), 50, reversed_naturals())
    assert out.case == "trace"
    assert len(out) >= 10 and list(out[:10]) == list(range(10))


def test_descent_diagonal_family():
    order = reversed_naturals()
    out = descending_transfer(_diagonal_stream(), 50, order)
    assert out and out.case == "diagonal"
    assert len(out) >= 10 and list(out[:10]) == list(range(10))
    assert all(order.lt(y, x) for x, y in zip(out, out[1:]))


def test_descent_insufficient_and_errors():
    order = reversed_naturals()
    for stream in (_trace_stream(), _diagonal_stream()):
        res = descending_transfer(stream, 1, order)
        assert isinstance(res, Insufficient) and not res
    assert not descending_transfer(iter([PhiTop(0)]), 5, order)
    with pytest.raises(NotDescendingError):
        descending_transfer(iter([PhiTop(1), PhiTop(0), PhiTop(2), PhiTop(3)]), 4, order)


def test_restriction_below_top_terms():
    report = restrict_iso(_sys(1, 2), 1, 5)
    assert report.ok and report.below
    minimal = restrict_iso(_sys(2, 3), 0, 4)
    assert minimal.ok
    assert all(h_lambda(t, finite_ordinal(3)) is None for t in minimal.below)


def test_order_collapse_is_an_ordinal():
    sys = _sys(1, 2)
    terms = enumerate_terms(sys, 5)
    pi = order_collapse(terms, sys)
    distinct = {value(t, sys) for t in terms}
    assert set(pi.values()) == {von_neumann(i) for i in range(len(distinct))}


def test_finite_sums_reach_every_rank():
    sys = _sys(0, 1)
    sums = [make_sum([PhiTop(0)] * n) for n in range(8)]
    pi = order_collapse(sums, sys)
    assert [pi[t] for t in sums] == [von_neumann(n) for n in range(8)]
