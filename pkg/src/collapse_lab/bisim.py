"""Bisimulations on finite trees."""
from __future__ import annotations

from typing import FrozenSet, Iterable, List, Tuple

import numpy as np

from .collapse import pair_tree, tree_collapse
from .kernels import bisimulation_fixpoint
from .trees import FiniteTree, label_from_json, label_to_json

__all__ = [
    "NodeRelation",
    "is_bisimulation",
    "maximal_bisimulation",
    "collapse_kernel",
    "trees_equal_star",
    "tree_member_star",
    "tree_csr",
    "relation_to_json",
    "relation_from_json",
]

Node = Tuple
NodeRelation = FrozenSet[Tuple[Node, Node]]


def tree_csr(t: FiniteTree) -> Tuple[List[Node], np.ndarray, np.ndarray]:
    """Nodes in canonical order plus CSR successor arrays."""
    nodes = list(t.nodes())
    pos = {s: i for i, s in enumerate(nodes)}
    indptr = [0]
    indices: List[int] = []
    for s in nodes:
        indices.extend(pos[c] for c in t.children(s))
        indptr.append(len(indices))
    return nodes, np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64)


def is_bisimulation(t: FiniteTree, b: Iterable[Tuple[Node, Node]]) -> bool:
    b = frozenset(b)
    for s, u in b:
        if s not in t or u not in t:
            raise ValueError(f"pair {(s, u)!r} mentions a node outside the tree")
    for s, u in b:
        cs, cu = t.children(s), t.children(u)
        if not all(any((x, y) in b for y in cu) for x in cs):
            return False
        if not all(any((x, y) in b for x in cs) for y in cu):
            return False
    return True


def maximal_bisimulation(t: FiniteTree) -> NodeRelation:
    """Greatest fixpoint of the forth-and-back refinement operator."""
    nodes, indptr, indices = tree_csr(t)
    rel = bisimulation_fixpoint(indptr, indices)
    ii, jj = np.nonzero(rel)
    return frozenset((nodes[i], nodes[j]) for i, j in zip(ii.tolist(), jj.tolist()))


def collapse_kernel(t: FiniteTree) -> NodeRelation:
    pi = tree_collapse(t)
    groups: dict = {}
    for node, value in pi.items():
        groups.setdefault(value, []).append(node)
    return frozenset((s, u) for g in groups.values() for s in g for u in g)


def trees_equal_star(t: FiniteTree, s: FiniteTree) -> bool:
    """T =* S: the roots of the two copies in Pair(T, S) are bisimilar."""
    return ((0,), (1,)) in maximal_bisimulation(pair_tree(t, s))


def tree_member_star(t: FiniteTree, s: FiniteTree) -> bool:
    """T ∈* S: some immediate successor of S's root is bisimilar to T's root."""
    b = maximal_bisimulation(pair_tree(t, s))
    p = pair_tree(t, s)
    return any(((0,), c) in b for c in p.children((1,)))


def relation_to_json(b: Iterable[Tuple[Node, Node]]) -> list:
    pairs = [[[label_to_json(x) for x in s], [label_to_json(x) for x in u]] for s, u in b]
    return sorted(pairs, key=repr)


def relation_from_json(data) -> NodeRelation:
    if not isinstance(data, list):
        raise ValueError("a node relation is a list of [node, node] pairs")
    out = set()
    for entry in data:
        if not isinstance(entry, list) or len(entry) != 2:
            raise ValueError(f"relation entry {entry!r} is not a pair")
        s, u = (tuple(label_from_json(x) for x in side) for side in entry)
        out.add((s, u))
    return frozenset(out)
