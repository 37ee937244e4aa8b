"""Finite trees: prefix-closed sets of finite label sequences.

A tree is stored as a persistent trie.  Sub-tries are shared freely, so the
constructions that copy a subtree several times (``OPair`` and the truth-value
trees built on it) cost no extra memory, and every algorithm that walks a tree
memoizes per shared sub-trie.  Semantically a :class:`FiniteTree` is still
just its set of node sequences; :meth:`FiniteTree.nodes` enumerates them.
"""
from __future__ import annotations

import json
from typing import Callable, Dict, Hashable, Iterable, Iterator, Optional, Sequence, Tuple

from .hf import HFSet, canon, format_set

__all__ = [
    "TrieNode",
    "FiniteTree",
    "LEAF",
    "prefix",
    "union_nodes",
    "label_to_json",
    "label_from_json",
    "label_sort_key",
]

Label = Hashable
Seq = Tuple[Label, ...]


class TrieNode:
    """One node of a persistent trie; ``children`` must never be mutated."""

    __slots__ = ("children",)

    def __init__(self, children: Optional[Dict[Label, "TrieNode"]] = None):
        self.children = children if children is not None else {}

    def __repr__(self) -> str:
        return f"TrieNode({len(self.children)} children)"


LEAF = TrieNode({})


def prefix(labels: Sequence[Label], node: TrieNode) -> TrieNode:
    """The trie of ``labels⌢T`` (including the prefixes of ``labels``)."""
    for label in reversed(labels):
        node = TrieNode({label: node})
    return node


def union_nodes(*nodes: TrieNode) -> TrieNode:
    """Union of tries; shared sub-tries are reused rather than copied."""
    nodes = tuple(n for n in nodes if n is not None)
    if not nodes:
        return LEAF
    out = nodes[0]
    for other in nodes[1:]:
        out = _union2(out, other)
    return out


def _union2(a: TrieNode, b: TrieNode) -> TrieNode:
    if a is b or not b.children:
        return a
    if not a.children:
        return b
    merged = dict(a.children)
    changed = False
    for label, sub in b.children.items():
        mine = merged.get(label)
        if mine is None:
            merged[label] = sub
            changed = True
        else:
            joined = _union2(mine, sub)
            if joined is not mine:
                merged[label] = joined
                changed = True
    return TrieNode(merged) if changed else a


def label_to_json(label):
    """JSON-compatible form of a label (tuples become lists)."""
    if isinstance(label, (bool, int, str)) or label is None:
        return label
    if isinstance(label, HFSet):
        return {"set": format_set(label)}
    if isinstance(label, (tuple, list)):
        return [label_to_json(x) for x in label]
    sexpr = getattr(label, "sexpr", None)
    if callable(sexpr):
        return {"formula": sexpr()}
    raise TypeError(f"label {label!r} has no JSON form")


def label_from_json(data):
    if isinstance(data, list):
        return tuple(label_from_json(x) for x in data)
    if isinstance(data, dict):
        if "set" in data:
            from .hf import parse_set

            return parse_set(data["set"])
        if "formula" in data:
            from .logic import parse_formula

            return parse_formula(data["formula"])
        raise ValueError(f"unknown tagged label {data!r}")
    return data


_key_cache: Dict = {}


def label_sort_key(label) -> str:
    try:
        return _key_cache[label]
    except KeyError:
        key = json.dumps(label_to_json(label), sort_keys=True, separators=(",", ":"))
        if len(_key_cache) < 200_000:
            _key_cache[label] = key
        return key
    except TypeError:
        return json.dumps(label_to_json(label), sort_keys=True, separators=(",", ":"))


class FiniteTree:
    """A finite tree T ⊆ X^<ω, closed under initial segments, containing ()."""

    __slots__ = ("root",)

    def __init__(self, root: TrieNode = LEAF):
        self.root = root

    # -- construction --------------------------------------------------------

    @classmethod
    def from_sequences(cls, seqs: Iterable[Sequence[Label]]) -> "FiniteTree":
        """Build from any collection of sequences; prefixes are added."""
        root: dict = {}
        for seq in seqs:
            level = root
            for label in seq:
                level = level.setdefault(label, {})
        return cls(_freeze(root))

    @classmethod
    def single(cls) -> "FiniteTree":
        return cls(LEAF)

    def prefixed(self, *labels: Label) -> "FiniteTree":
        return FiniteTree(prefix(labels, self.root))

    def union(self, *others: "FiniteTree") -> "FiniteTree":
        return FiniteTree(union_nodes(self.root, *(o.root for o in others)))

    # -- queries -------------------------------------------------------------

    def nodes(self) -> Iterator[Seq]:
        """All node sequences, depth-first in label order."""
        stack = [((), self.root)]
        while stack:
            seq, node = stack.pop()
            yield seq
            for label in sorted(node.children, key=label_sort_key, reverse=True):
                stack.append((seq + (label,), node.children[label]))

    def node_set(self) -> frozenset:
        return frozenset(self.nodes())

    def find(self, seq: Sequence[Label]) -> Optional[TrieNode]:
        node = self.root
        for label in seq:
            node = node.children.get(label)
            if node is None:
                return None
        return node

    def __contains__(self, seq) -> bool:
        return self.find(tuple(seq)) is not None

    def subtree(self, seq: Sequence[Label]) -> "FiniteTree":
        node = self.find(seq)
        if node is None:
            raise KeyError(f"{seq!r} is not a node")
        return FiniteTree(node)

    def children(self, seq: Sequence[Label]) -> list:
        node = self.find(seq)
        if node is None:
            raise KeyError(f"{seq!r} is not a node")
        seq = tuple(seq)
        return [seq + (lab,) for lab in sorted(node.children, key=label_sort_key)]

    def is_terminal(self, seq: Sequence[Label]) -> bool:
        node = self.find(seq)
        if node is None:
            raise KeyError(f"{seq!r} is not a node")
        return not node.children

    def __len__(self) -> int:
        memo: dict = {}

        def count(node: TrieNode) -> int:
            key = id(node)
            if key not in memo:
                memo[key] = 1 + sum(count(c) for c in node.children.values())
            return memo[key]

        return _with_post_order(self.root, count)

    def height(self) -> int:
        """Length of the longest node sequence."""
        memo: dict = {}

        def h(node: TrieNode) -> int:
            key = id(node)
            if key not in memo:
                memo[key] = 1 + max((h(c) for c in node.children.values()), default=-1)
            return memo[key]

        return _with_post_order(self.root, h)

    def distinct_subtries(self) -> int:
        seen: set = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.extend(node.children.values())
        return len(seen)

    # -- collapse ------------------------------------------------------------

    def collapse_root(self) -> HFSet:
        """πT: the collapse of the root under the immediate-successor relation."""
        return collapse_trie(self.root)

    # -- equality / io ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteTree):
            return NotImplemented
        return _trie_equal(self.root, other.root, set())

    def __hash__(self):
        return hash(frozenset(self.nodes()))

    def to_json(self) -> list:
        """List of label arrays, one per node, in canonical order."""
        return [[label_to_json(lab) for lab in seq] for seq in self.nodes()]

    @classmethod
    def from_json(cls, data) -> "FiniteTree":
        if not isinstance(data, list):
            raise ValueError("a tree is a list of label arrays")
        seqs = []
        for entry in data:
            if not isinstance(entry, list):
                raise ValueError(f"tree node {entry!r} is not a label array")
            seqs.append(tuple(label_from_json(x) for x in entry))
        return cls.from_sequences(seqs)

    def __repr__(self) -> str:
        n = len(self)
        if n <= 12:
            return f"FiniteTree({sorted(self.nodes(), key=lambda s: (len(s), [label_sort_key(x) for x in s]))})"
        return f"FiniteTree(<{n} nodes>)"


def _freeze(d: dict) -> TrieNode:
    if not d:
        return LEAF
    return TrieNode({k: _freeze(v) for k, v in d.items()})


def _trie_equal(a: TrieNode, b: TrieNode, seen: set) -> bool:
    if a is b:
        return True
    key = (id(a), id(b))
    if key in seen:
        return True
    if a.children.keys() != b.children.keys():
        return False
    for label, sub in a.children.items():
        if not _trie_equal(sub, b.children[label], seen):
            return False
    seen.add(key)
    return True


def _with_post_order(root: TrieNode, fn: Callable[[TrieNode], object]):
    """Warm ``fn``'s memo bottom-up so deep tries do not hit the recursion limit."""
    order = post_order(root)
    result = None
    for node in order:
        result = fn(node)
    return result


def post_order(root: TrieNode) -> list:
    """Distinct sub-tries of ``root``, children before parents."""
    seen: set = set()
    order: list = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for child in node.children.values():
            if id(child) not in seen:
                stack.append((child, False))
    return order


def collapse_trie(root: TrieNode, memo: Optional[dict] = None) -> HFSet:
    """Collapse of ``root``; ``memo`` maps id(sub-trie) to its value."""
    if memo is None:
        memo = {}
    if id(root) in memo:
        return memo[id(root)]
    for node in post_order(root):
        key = id(node)
        if key not in memo:
            memo[key] = canon([memo[id(c)] for c in node.children.values()])
    return memo[id(root)]
