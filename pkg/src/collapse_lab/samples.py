"""Seeded random generators shared by tests, the acceptance suite and the CLI."""
from __future__ import annotations

import random
from typing import List

from .hf import EMPTY, HFSet, canon, kuratowski, v_level, von_neumann
from .logic import (
    And,
    Equal,
    Exists,
    ExistsIn,
    Forall,
    ForallIn,
    Formula,
    Member,
    Not,
    Or,
)
from .trees import FiniteTree

__all__ = [
    "random_set",
    "random_transitive_set",
    "random_structure",
    "random_tree",
    "random_nnf",
    "random_formula",
    "random_tr_formula",
    "random_tr_instance",
]


def random_set(rng: random.Random, max_rank: int = 4, max_width: int = 4) -> HFSet:
    """A random hereditarily finite set of rank at most ``max_rank``."""
    if max_rank <= 0:
        return EMPTY
    width = rng.randint(0, max_width)
    return canon(random_set(rng, rng.randint(0, max_rank - 1), max_width) for _ in range(width))


def random_transitive_set(rng: random.Random, size: int, pool_level: int = 4) -> HFSet:
    """A random transitive set: grow by adding sets of already-present elements."""
    members: List[HFSet] = []
    while len(members) < size:
        picks = [m for m in members if rng.random() < 0.5]
        x = canon(picks)
        if x not in members:
            members.append(x)
    return canon(members)


def random_structure(rng: random.Random, max_elements: int = 5) -> HFSet:
    """A random set of at most ``max_elements`` members drawn from V_4."""
    pool = list(v_level(4))
    k = rng.randint(1, max_elements)
    return canon(rng.sample(pool, k))


def random_tree(rng: random.Random, n: int) -> FiniteTree:
    """Random recursive tree on n nodes (node i attaches to a uniform earlier node)."""
    seqs = [()]
    for i in range(1, n):
        seqs.append(seqs[rng.randrange(i)] + (i,))
    return FiniteTree.from_sequences(seqs)


def random_nnf(
    rng: random.Random,
    size: int,
    nvars: int,
    max_qdepth: int,
    bounded: bool = False,
    _depth: int = 0,
) -> Formula:
    """A random NNF formula of exactly ``size`` AST nodes (size ≥ 1).

    Variables in scope are 0..nvars−1 plus those bound so far; quantifiers
    bind the next fresh index.  With ``bounded`` only ∃x∈y / ∀x∈y are used.
    """
    if size == 1 or (size == 2 and rng.random() < 0.5):
        i, j = rng.randrange(nvars), rng.randrange(nvars)
        atom = rng.choice((Member, Equal))(i, j)
        if size == 2:
            return Not(atom)
        return atom
    if size == 2:
        i, j = rng.randrange(nvars), rng.randrange(nvars)
        return Not(rng.choice((Member, Equal))(i, j))
    quant_ok = _depth < max_qdepth
    if quant_ok and rng.random() < 0.4:
        bound = nvars
        body = random_nnf(rng, size - 1, nvars + 1, max_qdepth, bounded, _depth + 1)
        if bounded:
            j = rng.randrange(nvars)
            return rng.choice((ExistsIn, ForallIn))(bound, j, body)
        return rng.choice((Exists, Forall))(bound, body)
    left = rng.randint(1, size - 2)
    f = random_nnf(rng, left, nvars, max_qdepth, bounded, _depth)
    g = random_nnf(rng, size - 1 - left, nvars, max_qdepth, bounded, _depth)
    return rng.choice((And, Or))(f, g)


def random_formula(rng: random.Random, size: int, nvars: int, max_qdepth: int = 2) -> Formula:
    """Random formula with negations anywhere (not necessarily NNF)."""
    f = random_nnf(rng, size, nvars, max_qdepth)
    return _scramble(rng, f)


def _scramble(rng: random.Random, f: Formula) -> Formula:
    if isinstance(f, (Member, Equal)):
        return Not(Not(f)) if rng.random() < 0.2 else f
    if isinstance(f, Not):
        return f
    if isinstance(f, And):
        if rng.random() < 0.3:
            return Not(Or(Not(_scramble(rng, f.f)), Not(_scramble(rng, f.g))))
        return And(_scramble(rng, f.f), _scramble(rng, f.g))
    if isinstance(f, Or):
        return Or(_scramble(rng, f.f), _scramble(rng, f.g))
    if isinstance(f, Exists):
        if rng.random() < 0.3:
            return Not(Forall(f.i, Not(_scramble(rng, f.f))))
        return Exists(f.i, _scramble(rng, f.f))
    if isinstance(f, Forall):
        return Forall(f.i, _scramble(rng, f.f))
    return f


def _v_only_as_set(f: Formula) -> Formula:
    """Rewrite so that variable 1 (v) appears only on the right of ∈."""
    if isinstance(f, Member):
        if f.i == 1:
            return Member(0 if f.j != 0 else 2, f.j)
        return f
    if isinstance(f, Equal):
        return Equal(0 if f.i == 1 else f.i, 2 if f.j == 1 else f.j)
    if isinstance(f, Not):
        return Not(_v_only_as_set(f.f))
    if isinstance(f, (And, Or)):
        return type(f)(_v_only_as_set(f.f), _v_only_as_set(f.g))
    return type(f)(f.i, 0 if f.j == 1 else f.j, _v_only_as_set(f.f))


def random_tr_formula(rng: random.Random, size: int) -> Formula:
    """Bounded NNF ψ(u, v, p) of the given size; v is used only as x ∈ v."""
    return _v_only_as_set(random_nnf(rng, size, 3, 2, bounded=True))


# ψ skeletons in which u's membership depends on which pairs of p0 lie in H_{≺s}
_TR_TEMPLATES = (
    ForallIn(3, 2, Or(Not(Member(3, 1)), Not(Member(0, 3)))),
    ForallIn(3, 2, Or(Member(3, 1), Not(Member(0, 3)))),
    Or(Not(Member(0, 2)), ForallIn(3, 2, Not(Member(3, 1)))),
    Or(Member(0, 2), ForallIn(3, 2, Not(Member(3, 1)))),
)


def random_tr_instance(rng: random.Random, max_stages: int = 6, max_elements: int = 4, max_size: int = 6):
    """A random Δ0-TR instance: stages are ordinals under a random acyclic order, one parameter.

    Half of the formulas are drawn from small skeletons that make H depend on
    earlier slices; for those, ``a`` is partly closed under singletons so that
    u can be a member of a pair ⟨c, s⟩ = {{c}, {c, s}}.
    """
    from .collapse import CarrierRelation
    from .recursion import TRInstance

    n = rng.randint(0, max_stages)
    xs = [von_neumann(i) for i in range(n)]
    edges = [(xs[i], xs[j]) for j in range(n) for i in range(j) if rng.random() < 0.4]
    if rng.random() < 0.5:
        psi = rng.choice(_TR_TEMPLATES)
        members = list(random_structure(rng, 2))
        while len(members) < max_elements and rng.random() < 0.8:
            members.append(canon([rng.choice(members)]) if members else EMPTY)
        a = canon(members)
    else:
        a = random_structure(rng, max_elements)
        psi = random_tr_formula(rng, rng.randint(1, max_size))
    pairs = [kuratowski(c, s) for c in a for s in xs]
    p0 = canon([p for p in pairs if rng.random() < 0.5] + list(a)[:1])
    return TRInstance(a, CarrierRelation(xs, edges), psi, (p0,))
