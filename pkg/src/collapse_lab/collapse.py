"""Well-founded relations, the collapsing function, and tree operations."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .hf import HFSet, SizeLimitError, canon, kuratowski, von_neumann
from .trees import FiniteTree, TrieNode, collapse_trie, label_from_json, label_to_json

__all__ = [
    "CarrierRelation",
    "NotWellFoundedError",
    "is_well_founded",
    "find_cycle",
    "collapse",
    "tree_collapse",
    "tree_root_collapse",
    "tree_relation",
    "pair_tree",
    "opair_tree",
    "membership_relation",
    "addition_relation",
    "addition_graph_via_collapse",
    "addition_graph_oracle",
    "ackermann_relation",
    "ackermann_image",
    "ADDITION_BOUND",
]

ADDITION_BOUND = 8


class NotWellFoundedError(ValueError):
    """The relation has a cycle; ``cycle`` lists its carrier labels in order."""

    def __init__(self, cycle: Sequence[Hashable]):
        self.cycle = list(cycle)
        super().__init__(f"relation is not well founded; cycle {self.cycle!r}")


@dataclass(frozen=True)
class CarrierRelation:
    """A finite carrier with edges ``(v, u)`` read as "v is below u"."""

    carrier: Tuple[Hashable, ...]
    edges: frozenset

    def __init__(self, carrier: Iterable[Hashable], edges: Iterable[Tuple[Hashable, Hashable]]):
        carrier = tuple(carrier)
        if len(set(carrier)) != len(carrier):
            raise ValueError("carrier labels must be distinct")
        known = set(carrier)
        es = frozenset((v, u) for v, u in edges)
        for v, u in es:
            if v not in known or u not in known:
                raise ValueError(f"edge {(v, u)!r} has an endpoint outside the carrier")
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "edges", es)

    def index(self) -> Dict[Hashable, int]:
        return {x: i for i, x in enumerate(self.carrier)}

    def predecessors(self) -> List[List[int]]:
        """For each carrier index, the indices of the elements below it (sorted)."""
        idx = self.index()
        below: List[List[int]] = [[] for _ in self.carrier]
        for v, u in self.edges:
            below[idx[u]].append(idx[v])
        for lst in below:
            lst.sort()
        return below

    def to_json(self) -> dict:
        return {
            "carrier": [label_to_json(x) for x in self.carrier],
            "edges": sorted(
                ([label_to_json(v), label_to_json(u)] for v, u in self.edges),
                key=lambda e: json.dumps(e, sort_keys=True),
            ),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CarrierRelation":
        if not isinstance(data, dict) or "carrier" not in data or "edges" not in data:
            raise ValueError('relation JSON needs "carrier" and "edges"')
        carrier = [label_from_json(x) for x in data["carrier"]]
        edges = []
        for e in data["edges"]:
            if not isinstance(e, list) or len(e) != 2:
                raise ValueError(f"edge {e!r} is not a two-element array")
            edges.append((label_from_json(e[0]), label_from_json(e[1])))
        return cls(carrier, edges)


def _topological(rel: CarrierRelation) -> Optional[List[int]]:
    """Kahn's algorithm on indices; ``None`` when a cycle exists."""
    below = rel.predecessors()
    n = len(rel.carrier)
    above: List[List[int]] = [[] for _ in range(n)]
    pending = [len(b) for b in below]
    for u, lst in enumerate(below):
        for v in lst:
            above[v].append(u)
    ready = [i for i in range(n) if pending[i] == 0]
    order = []
    while ready:
        v = ready.pop()
        order.append(v)
        for u in above[v]:
            pending[u] -= 1
            if pending[u] == 0:
                ready.append(u)
    return order if len(order) == n else None


def is_well_founded(rel: CarrierRelation) -> bool:
    return _topological(rel) is not None


def find_cycle(rel: CarrierRelation) -> Optional[list]:
    """The lexicographically least cycle (by carrier position), or None.

    The cycle starts at its least vertex, which is the least vertex lying on
    any cycle; from there the smallest successor that can still return to the
    start without reusing a vertex is taken at every step.
    """
    n = len(rel.carrier)
    idx = rel.index()
    succ: List[List[int]] = [[] for _ in range(n)]
    for v, u in rel.edges:
        succ[idx[v]].append(idx[u])
    for lst in succ:
        lst.sort()

    def reaches(src: int, dst: int, banned: set) -> bool:
        stack, seen = [src], {src}
        while stack:
            x = stack.pop()
            for y in succ[x]:
                if y == dst:
                    return True
                if y not in seen and y not in banned:
                    seen.add(y)
                    stack.append(y)
        return False

    for start in range(n):
        # only vertices >= start may appear, so that start is the least one
        lower = set(range(start))
        if not reaches(start, start, lower):
            continue
        path = [start]
        used = lower | {start}
        cur = start
        while True:
            if start in succ[cur]:
                return [rel.carrier[i] for i in path]
            for y in succ[cur]:
                if y in used:
                    continue
                if reaches(y, start, used):
                    path.append(y)
                    used.add(y)
                    cur = y
                    break
            else:  # pragma: no cover - reachability guarantees progress
                raise AssertionError("cycle search lost its way")
    return None


def collapse(rel: CarrierRelation) -> Dict[Hashable, HFSet]:
    """The collapsing function π with π(u) = {π(v) : (v, u) ∈ edges}."""
    order = _topological(rel)
    if order is None:
        raise NotWellFoundedError(find_cycle(rel))
    below = rel.predecessors()
    values: List[Optional[HFSet]] = [None] * len(rel.carrier)
    for u in order:
        values[u] = canon([values[v] for v in below[u]])
    return {rel.carrier[i]: values[i] for i in range(len(rel.carrier))}


def tree_relation(t: FiniteTree) -> CarrierRelation:
    """Immediate-successor relation of a tree: (σ⌢x, σ) for each edge."""
    nodes = list(t.nodes())
    return CarrierRelation(nodes, ((s, s[:-1]) for s in nodes if s))


def tree_collapse(t: FiniteTree) -> Dict[tuple, HFSet]:
    """π on every node of ``t``, memoized over shared sub-tries."""
    memo: dict = {}
    collapse_trie(t.root, memo)
    out = {}
    stack = [((), t.root)]
    while stack:
        seq, node = stack.pop()
        out[seq] = memo[id(node)]
        for label, child in node.children.items():
            stack.append((seq + (label,), child))
    return out


def tree_root_collapse(t: FiniteTree) -> HFSet:
    return t.collapse_root()


def pair_tree(t0: FiniteTree, t1: FiniteTree) -> FiniteTree:
    """Pair(T0, T1) = (0)⌢T0 ∪ (1)⌢T1, collapsing to {πT0, πT1}."""
    # the two branches have distinct first labels, so the union is a plain join
    return FiniteTree(TrieNode({0: t0.root, 1: t1.root}))


def opair_tree(t0: FiniteTree, t1: FiniteTree) -> FiniteTree:
    """OPair(T0, T1) = Pair(Pair(T0,T0), Pair(T0,T1)), collapsing to ⟨πT0, πT1⟩."""
    return pair_tree(pair_tree(t0, t0), pair_tree(t0, t1))


def membership_relation(carrier: Iterable[HFSet]) -> CarrierRelation:
    """∈ restricted to the given sets."""
    carrier = sorted(set(carrier))
    known = set(carrier)
    return CarrierRelation(carrier, ((v, u) for u in carrier for v in u if v in known))


# -- demonstrations ------------------------------------------------------------


def addition_relation(k: int) -> CarrierRelation:
    """The k-truncated eight-rule relation on {0..7}×{0..k-1}² whose collapse at (0,0,0) is +."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > ADDITION_BOUND:
        raise SizeLimitError(f"addition demo bound is {ADDITION_BOUND}, got k={k}")
    r = range(k)
    carrier = [(i, n, m) for i in range(8) for n in r for m in r]
    edges = set()
    for n in r:
        for m in r:
            edges.add(((1, n, m), (0, 0, 0)))
            edges.add(((2, n, m), (1, n, m)))
            edges.add(((3, n, m), (1, n, m)))
            edges.add(((4, n, m), (2, n, m)))
            edges.add(((4, n, m), (3, n, m)))
            edges.add(((7, n, m), (3, n, m)))
            edges.add(((5, n, 0), (4, n, m)))
            edges.add(((6, n, m), (4, n, m)))
            edges.add(((7, n, 0), (6, n, m)))
            edges.add(((7, m, 0), (6, n, m)))
            for i in range(n):
                edges.add(((7, i, 0), (7, n, m)))
            for j in range(m):
                edges.add(((7, n, j), (7, n, m)))
        edges.add(((7, n, 0), (5, n, 0)))
    return CarrierRelation(carrier, edges)


def addition_graph_via_collapse(k: int) -> HFSet:
    return collapse(addition_relation(k))[(0, 0, 0)]


def addition_graph_oracle(k: int) -> HFSet:
    """{⟨⟨n,m⟩, n+m⟩ : n, m < k} built directly from von Neumann codes."""
    vn = von_neumann
    return canon(kuratowski(kuratowski(vn(n), vn(m)), vn(n + m)) for n in range(k) for m in range(k))


def ackermann_relation(bits: int) -> CarrierRelation:
    """i is below j iff bit i of j is set, on {0, …, 2^bits − 1}."""
    if bits < 0:
        raise ValueError("bits must be non-negative")
    size = 1 << bits
    if size > 1 << 16:
        raise SizeLimitError(f"Ackermann demo limited to 16 bits, got {bits}")
    return CarrierRelation(
        range(size), ((i, j) for j in range(size) for i in range(bits) if j >> i & 1)
    )


def ackermann_image(bits: int) -> HFSet:
    return canon(collapse(ackermann_relation(bits)).values())
