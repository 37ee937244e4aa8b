"""Truth-value trees ⊤_θ, ⊥_θ and satisfaction trees S_(θ,σ).

The trees are built for formulas in negation normal form.  Their collapses
decide truth: (a,∈) ⊨ θ[σ] exactly when πS_(θ,σ) = π⊤_θ.

Label conventions (the tagged-tuple bookkeeping of the construction):

* atomic trees use the labels ``0`` and ``1``; so do ``Pair``/``OPair``;
* a ∧/∨ branch is ``("br", θ, σ, b0, b1)`` with ``σ = None`` in ⊤/⊥ trees;
* a quantifier node is the two-label stem ``("q", θ, σ)`` followed by ``1``,
  ``0`` or ``("pick", d)`` for the branch of the witness d;
* the combined tree hangs ⊤_θ below ``(θ, "top")``, ⊥_θ below ``(θ, "bot")``
  and S_(θ,σ) below ``(θ, σ)``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .hf import HFSet, SizeLimitError, get_limits, rank
from .logic import (
    And,
    AssignmentTooShortError,
    Equal,
    Exists,
    ExistsIn,
    Forall,
    ForallIn,
    Formula,
    Member,
    Not,
    Or,
    assign_update,
    evaluate,
    is_nnf,
    max_var,
    to_nnf,
)
from .trees import FiniteTree, TrieNode, collapse_trie, label_sort_key

__all__ = [
    "NotNNFError",
    "TreeBuilder",
    "top_tree",
    "bot_tree",
    "sat_tree",
    "TruthTrees",
    "truth_trees",
    "truth_via_collapse",
    "subformulas",
    "TruthTreeValidator",
    "DistinctnessReport",
    "distinctness_report",
    "truth_distinctness",
    "dump_trees",
    "ATOM_TOP",
    "ATOM_BOT",
]


class NotNNFError(ValueError):
    pass


def _trie(seqs) -> TrieNode:
    return FiniteTree.from_sequences(seqs).root


ATOM_TOP = _trie([(0, 0), (1,)])
ATOM_BOT = _trie([(0, 0)])

_BRANCHES = ((1, 1), (1, 0), (0, 1), (0, 0))


def _opair(x: TrieNode, y: TrieNode) -> TrieNode:
    # OPair on raw tries, skipping the FiniteTree wrappers
    return TrieNode({0: TrieNode({0: x, 1: x}), 1: TrieNode({0: x, 1: y})})


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Member, Equal)) or (isinstance(f, Not) and isinstance(f.f, (Member, Equal)))


def subformulas(f: Formula) -> List[Formula]:
    """Subformulas in post-order (children first), without repeats."""
    out: List[Formula] = []
    seen = set()

    def go(g: Formula) -> None:
        if g in seen:
            return
        if not _is_literal(g):
            if isinstance(g, (And, Or)):
                go(g.f)
                go(g.g)
            else:
                go(g.f)
        seen.add(g)
        out.append(g)

    go(f)
    return out


class TreeBuilder:
    """Builds ⊤/⊥/S tries for one structure, sharing every repeated subtree.

    Subclasses may change how literals are treated (``literal_*``) or which
    elements a quantifier ranges over (``quantifier_range``).
    """

    def __init__(self, structure, max_trees: Optional[int] = None):
        self.structure = structure
        self._top: Dict[Formula, TrieNode] = {}
        self._bot: Dict[Formula, TrieNode] = {}
        self._sat: Dict[Tuple[Formula, tuple], TrieNode] = {}
        self.max_trees = max_trees if max_trees is not None else get_limits()["max_nodes"]

    # -- literals -------------------------------------------------------------

    def literal_top(self, f: Formula) -> TrieNode:
        return ATOM_TOP

    def literal_bot(self, f: Formula) -> TrieNode:
        return ATOM_BOT

    def literal_sat(self, f: Formula, s: tuple) -> TrieNode:
        return ATOM_TOP if evaluate(self.structure, f, s) else ATOM_BOT

    def quantifier_range(self, f: Formula, s: tuple) -> Iterable[HFSet]:
        if isinstance(f, (Exists, Forall)):
            return self.structure
        return [b for b in s[f.j] if b in self.structure]

    # -- the recursion ----------------------------------------------------------

    def top(self, f: Formula) -> TrieNode:
        node = self._top.get(f)
        if node is None:
            node = self._build_value(f, True)
            self._top[f] = node
        return node

    def bot(self, f: Formula) -> TrieNode:
        node = self._bot.get(f)
        if node is None:
            node = self._build_value(f, False)
            self._bot[f] = node
        return node

    def _value(self, f: Formula, b: int) -> TrieNode:
        return self.top(f) if b else self.bot(f)

    def _build_value(self, f: Formula, truth: bool) -> TrieNode:
        if _is_literal(f):
            return self.literal_top(f) if truth else self.literal_bot(f)
        if isinstance(f, (And, Or)):
            if isinstance(f, And):
                keep = _BRANCHES if truth else _BRANCHES[1:]
            else:
                keep = _BRANCHES[:3] if truth else _BRANCHES
            return TrieNode(
                {("br", f, None, b0, b1): _opair(self._value(f.f, b0), self._value(f.g, b1)) for b0, b1 in keep}
            )
        if isinstance(f, (Exists, Forall, ExistsIn, ForallIn)):
            universal = isinstance(f, (Forall, ForallIn))
            # ∀: ⊤ = stem⌢1⌢⊤, ⊥ adds stem⌢0⌢⊥;  ∃: ⊥ = stem⌢0⌢⊥, ⊤ adds stem⌢1⌢⊤
            flags = {}
            if universal or truth:
                flags[1] = self.top(f.f)
            if not universal or not truth:
                flags[0] = self.bot(f.f)
            return TrieNode({("q", f, None): TrieNode(flags)})
        if isinstance(f, Not):
            raise NotNNFError(f"formula is not in negation normal form: {f}")
        raise TypeError(f"not a formula: {f!r}")

    def sat(self, f: Formula, s: tuple) -> TrieNode:
        key = (f, s)
        node = self._sat.get(key)
        if node is not None:
            return node
        if len(self._sat) >= self.max_trees:
            raise SizeLimitError(f"more than {self.max_trees} satisfaction trees needed")
        if _is_literal(f):
            node = self.literal_sat(f, s)
        elif isinstance(f, And):
            node = TrieNode(
                {
                    ("br", f, s, 1, 1): _opair(self.sat(f.f, s), self.sat(f.g, s)),
                    ("br", f, s, 1, 0): _opair(self.top(f.f), self.bot(f.g)),
                    ("br", f, s, 0, 1): _opair(self.bot(f.f), self.top(f.g)),
                    ("br", f, s, 0, 0): _opair(self.bot(f.f), self.bot(f.g)),
                }
            )
        elif isinstance(f, Or):
            node = TrieNode(
                {
                    ("br", f, s, 1, 1): _opair(self.top(f.f), self.top(f.g)),
                    ("br", f, s, 1, 0): _opair(self.top(f.f), self.bot(f.g)),
                    ("br", f, s, 0, 1): _opair(self.bot(f.f), self.top(f.g)),
                    ("br", f, s, 0, 0): _opair(self.sat(f.f, s), self.sat(f.g, s)),
                }
            )
        elif isinstance(f, (Exists, Forall, ExistsIn, ForallIn)):
            universal = isinstance(f, (Forall, ForallIn))
            below = {1: self.top(f.f)} if universal else {0: self.bot(f.f)}
            for d in self.quantifier_range(f, s):
                below[("pick", d)] = self.sat(f.f, assign_update(s, f.i, d))
            node = TrieNode({("q", f, s): TrieNode(below)})
        elif isinstance(f, Not):
            raise NotNNFError(f"formula is not in negation normal form: {f}")
        else:
            raise TypeError(f"not a formula: {f!r}")
        self._sat[key] = node
        return node

    def sat_keys(self) -> List[Tuple[Formula, tuple]]:
        return list(self._sat)


def _check(f: Formula, s: Sequence[HFSet], a) -> tuple:
    if not is_nnf(f):
        raise NotNNFError(f"formula is not in negation normal form: {f}")
    s = tuple(s)
    if len(s) <= max_var(f):
        raise AssignmentTooShortError(f"assignment of length {len(s)} does not cover variable {max_var(f)}")
    for x in s:
        if x not in a:
            raise ValueError(f"assignment value {x} is not a member of the structure")
    return s


def top_tree(f: Formula) -> FiniteTree:
    if not is_nnf(f):
        raise NotNNFError(f"formula is not in negation normal form: {f}")
    return FiniteTree(TreeBuilder(None).top(f))


def bot_tree(f: Formula) -> FiniteTree:
    if not is_nnf(f):
        raise NotNNFError(f"formula is not in negation normal form: {f}")
    return FiniteTree(TreeBuilder(None).bot(f))


def sat_tree(a: HFSet, f: Formula, s: Sequence[HFSet]) -> FiniteTree:
    s = _check(f, s, a)
    return FiniteTree(TreeBuilder(a).sat(f, s))


@dataclass
class TruthTrees:
    """The combined tree T for one (a, θ, σ) and its collapse."""

    a: HFSet
    formula: Formula
    assignment: tuple
    tree: FiniteTree
    values: Dict[tuple, HFSet]
    keys: List[Tuple[Formula, tuple]] = field(default_factory=list)

    def pi_top(self, f: Formula) -> HFSet:
        return self.values[(f, "top")]

    def pi_bot(self, f: Formula) -> HFSet:
        return self.values[(f, "bot")]

    def pi_sat(self, f: Formula, s: tuple) -> HFSet:
        return self.values[(f, s)]

    def holds(self, f: Optional[Formula] = None, s: Optional[tuple] = None) -> bool:
        f = self.formula if f is None else f
        s = self.assignment if s is None else s
        return self.pi_sat(f, s) is self.pi_top(f)

    def diagram(self) -> Set[Tuple[Formula, tuple]]:
        """H = {(θ, σ) : π(θ,σ) = π(θ,⊤)} over every S-tree in T."""
        return {k for k in self.keys if self.values[k] is self.values[(k[0], "top")]}


def truth_trees(a: HFSet, f: Formula, s: Sequence[HFSet]) -> TruthTrees:
    """Build the combined tree over every needed subtree and collapse it once."""
    s = _check(f, s, a)
    builder = TreeBuilder(a)
    builder.sat(f, s)
    by_formula: Dict[Formula, dict] = {}
    for g in subformulas(f):
        by_formula[g] = {"top": builder.top(g), "bot": builder.bot(g)}
    keys = builder.sat_keys()
    for g, sig in keys:
        by_formula[g][sig] = builder.sat(g, sig)
    root = TrieNode({g: TrieNode(children) for g, children in by_formula.items()})
    memo: dict = {}
    collapse_trie(root, memo)
    values = {}
    for g, children in by_formula.items():
        for key, node in children.items():
            values[(g, key)] = memo[id(node)]
    return TruthTrees(a, f, s, FiniteTree(root), values, keys)


def truth_via_collapse(a: HFSet, f: Formula, s: Sequence[HFSet]) -> bool:
    """(a,∈) ⊨ f[s], decided by πS = π⊤ in one shared collapse (f is put in NNF first)."""
    return truth_trees(a, to_nnf(f), s).holds()


# -- local validator ----------------------------------------------------------


class TruthTreeValidator:
    """Decides membership in the combined tree from the construction rules alone.

    ``roots`` lists the (θ, σ) pairs whose S-trees the combined tree carries;
    everything below the two-label root prefix is checked locally.
    """

    def __init__(self, a: HFSet, formula: Formula, roots: Iterable[Tuple[Formula, tuple]]):
        self.a = a
        self.formulas = set(subformulas(formula))
        self.roots = set(roots)

    def is_node(self, seq: Sequence) -> bool:
        seq = tuple(seq)
        if not seq:
            return True
        f = seq[0]
        if f not in self.formulas:
            return False
        if len(seq) == 1:
            return True
        tag, rest = seq[1], seq[2:]
        if tag == "top":
            return self._value(f, True, rest)
        if tag == "bot":
            return self._value(f, False, rest)
        if (f, tag) in self.roots:
            return self._sat(f, tag, rest)
        return False

    @staticmethod
    def _atomic(truth: bool, rest: tuple) -> bool:
        return rest in ((), (0,), (0, 0)) or (truth and rest == (1,))

    def _opair(self, left, right, rest: tuple) -> bool:
        if not rest:
            return True
        if rest[0] not in (0, 1) or isinstance(rest[0], bool):
            return False
        if len(rest) == 1:
            return True
        if rest[1] not in (0, 1) or isinstance(rest[1], bool):
            return False
        side = right if rest[0] == 1 and rest[1] == 1 else left
        return side(rest[2:])

    def _value(self, f: Formula, truth: bool, rest: tuple) -> bool:
        if _is_literal(f):
            return self._atomic(truth, rest)
        if not rest:
            return True
        head = rest[0]
        if isinstance(f, (And, Or)):
            if not (isinstance(head, tuple) and len(head) == 5 and head[:3] == ("br", f, None)):
                return False
            b0, b1 = head[3], head[4]
            if (b0, b1) not in _BRANCHES:
                return False
            if isinstance(f, And) and not truth and (b0, b1) == (1, 1):
                return False
            if isinstance(f, Or) and truth and (b0, b1) == (0, 0):
                return False
            return self._opair(
                lambda r: self._value(f.f, bool(b0), r), lambda r: self._value(f.g, bool(b1), r), rest[1:]
            )
        if head != ("q", f, None):
            return False
        if len(rest) == 1:
            return True
        flag = rest[1]
        universal = isinstance(f, (Forall, ForallIn))
        allowed = {1} if universal and truth else {0} if not universal and not truth else {0, 1}
        if flag not in allowed or isinstance(flag, bool):
            return False
        return self._value(f.f, flag == 1, rest[2:])

    def _sat(self, f: Formula, s: tuple, rest: tuple) -> bool:
        if _is_literal(f):
            return self._atomic(evaluate(self.a, f, s), rest)
        if not rest:
            return True
        head = rest[0]
        if isinstance(f, (And, Or)):
            if not (isinstance(head, tuple) and len(head) == 5 and head[:3] == ("br", f, s)):
                return False
            b0, b1 = head[3], head[4]
            if (b0, b1) not in _BRANCHES:
                return False
            live = (1, 1) if isinstance(f, And) else (0, 0)
            if (b0, b1) == live:
                return self._opair(lambda r: self._sat(f.f, s, r), lambda r: self._sat(f.g, s, r), rest[1:])
            return self._opair(
                lambda r: self._value(f.f, bool(b0), r), lambda r: self._value(f.g, bool(b1), r), rest[1:]
            )
        if head != ("q", f, s):
            return False
        if len(rest) == 1:
            return True
        flag = rest[1]
        universal = isinstance(f, (Forall, ForallIn))
        fixed = 1 if universal else 0
        if flag == fixed and not isinstance(flag, (bool, tuple)):
            return self._value(f.f, universal, rest[2:])
        if isinstance(flag, tuple) and len(flag) == 2 and flag[0] == "pick":
            d = flag[1]
            if not isinstance(d, HFSet) or d not in self.a:
                return False
            if isinstance(f, (ExistsIn, ForallIn)) and d not in s[f.j]:
                return False
            return self._sat(f.f, assign_update(s, f.i, d), rest[2:])
        return False


# -- the distinctness observation -------------------------------------------------


@dataclass
class DistinctnessReport:
    corpus_size: int
    collisions: List[Tuple[Formula, Formula]]
    same_formula_ok: bool
    rank_height_ok: bool

    @property
    def holds(self) -> bool:
        return not self.collisions and self.same_formula_ok and self.rank_height_ok


def distinctness_report(corpus: Sequence[Formula], max_collisions: int = 20) -> DistinctnessReport:
    """Compare π⊤_θ against π⊥_ψ for every pair of the corpus.

    Also checks, formula by formula, that π⊤_θ ≠ π⊥_θ and that the ranks of
    π⊤_θ, π⊥_θ and the heights of ⊤_θ, ⊥_θ all coincide.
    """
    builder = TreeBuilder(None)
    tops: Dict[HFSet, List[Formula]] = {}
    bots: Dict[HFSet, List[Formula]] = {}
    same_ok = True
    rank_ok = True
    memo: dict = {}
    for f in corpus:
        if not is_nnf(f):
            raise NotNNFError(f"formula is not in negation normal form: {f}")
        t, b = builder.top(f), builder.bot(f)
        pt, pb = collapse_trie(t, memo), collapse_trie(b, memo)
        tops.setdefault(pt, []).append(f)
        bots.setdefault(pb, []).append(f)
        if pt is pb:
            same_ok = False
        ht, hb = FiniteTree(t).height(), FiniteTree(b).height()
        if not (rank(pt) == rank(pb) == ht == hb):
            rank_ok = False
    collisions = []
    for value, fs in tops.items():
        for g in bots.get(value, ()):
            for f in fs:
                if len(collisions) < max_collisions:
                    collisions.append((f, g))
    return DistinctnessReport(len(corpus), collisions, same_ok, rank_ok)


def truth_distinctness(corpus: Sequence[Formula]) -> bool:
    """π⊤_θ ≠ π⊥_ψ for all θ, ψ in the corpus, plus the rank/height remark."""
    return distinctness_report(corpus, max_collisions=1).holds


# -- dumping ------------------------------------------------------------------------


def dump_trees(a: HFSet, f: Formula, s: Sequence[HFSet], directory: str) -> List[str]:
    """Write every ⊤/⊥/S tree of the combined tree as JSON files plus an index."""
    tt = truth_trees(a, to_nnf(f), s)
    os.makedirs(directory, exist_ok=True)
    index = []
    written = []
    root = tt.tree.root
    for k, g in enumerate(sorted(root.children, key=label_sort_key)):
        node = root.children[g]
        for j, key in enumerate(sorted(node.children, key=label_sort_key)):
            kind = key if isinstance(key, str) else "sat"
            name = f"f{k:03d}_{kind}_{j:04d}.json"
            path = os.path.join(directory, name)
            with open(path, "w") as fh:
                json.dump(FiniteTree(node.children[key]).to_json(), fh)
            entry = {"file": name, "formula": g.sexpr(), "kind": kind}
            if kind == "sat":
                entry["assignment"] = [str(x) for x in key]
            index.append(entry)
            written.append(path)
    with open(os.path.join(directory, "index.json"), "w") as fh:
        json.dump(index, fh, indent=1)
    return written
