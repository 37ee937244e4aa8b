"""Finite clopen games, backward induction, and the bisimulation games.

A game is a finite tree of move sequences.  Player I moves at positions of
even length, Player II at odd length.  A match ends at a terminal position;
Player I wins exactly when that position has odd length.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .kernels import exhaustive_winner
from .trees import LEAF, FiniteTree, TrieNode, label_sort_key

__all__ = [
    "PLAYER_I",
    "PLAYER_II",
    "GameTree",
    "Strategy",
    "Solution",
    "InvalidStrategyError",
    "NotWinningError",
    "solve",
    "position_winners",
    "optimal_strategy",
    "play",
    "never_loses",
    "opponent_strategies",
    "exhaustive_solve",
    "level_sequences",
    "tree_from_levels",
    "all_games",
    "bisimulation_game",
    "full_bisimulation_game",
    "bisim_from_strategy",
    "relabel",
]

PLAYER_I = "I"
PLAYER_II = "II"

Pos = Tuple


class InvalidStrategyError(ValueError):
    pass


class NotWinningError(ValueError):
    pass


def _mover(depth: int) -> str:
    return PLAYER_I if depth % 2 == 0 else PLAYER_II


def _terminal_winner(depth: int) -> str:
    return PLAYER_I if depth % 2 == 1 else PLAYER_II


def _sorted_labels(node: TrieNode) -> List:
    return sorted(node.children, key=label_sort_key)


@dataclass(frozen=True)
class GameTree:
    tree: FiniteTree

    @property
    def root(self) -> TrieNode:
        return self.tree.root

    def mover(self, pos: Pos) -> str:
        return _mover(len(pos))

    def is_terminal(self, pos: Pos) -> bool:
        return self.tree.is_terminal(pos)

    def successors(self, pos: Pos) -> List[Pos]:
        return self.tree.children(pos)

    def positions(self) -> Iterator[Pos]:
        return self.tree.nodes()

    def __contains__(self, pos) -> bool:
        return pos in self.tree

    def __len__(self) -> int:
        return len(self.tree)


class Strategy(Mapping):
    """A player's choice of successor at each of their non-terminal positions.

    ``moves`` maps positions to successor positions.  Strategies produced by
    the solver are instead driven by ``choice``, a table from sub-trie ids to
    move labels, and are expanded lazily.
    """

    def __init__(
        self,
        game: GameTree,
        player: str,
        moves: Optional[Dict[Pos, Pos]] = None,
        choice: Optional[Dict[Tuple[int, int], object]] = None,
    ):
        self.game = game
        self.player = player
        self._moves = dict(moves) if moves is not None else None
        self._choice = choice
        if self._moves is not None:
            for pos, nxt in self._moves.items():
                if len(nxt) != len(pos) + 1 or nxt[:-1] != tuple(pos) or nxt not in game:
                    raise InvalidStrategyError(f"{nxt!r} is not an immediate successor of {pos!r}")
                if _mover(len(pos)) != player:
                    raise InvalidStrategyError(f"position {pos!r} belongs to the other player")

    def _owned(self, pos: Pos) -> bool:
        return _mover(len(pos)) == self.player

    def choose(self, pos: Pos, node: TrieNode) -> Optional[object]:
        """The label this strategy plays at ``pos`` (whose sub-trie is ``node``)."""
        if self._moves is not None:
            nxt = self._moves.get(pos)
            return None if nxt is None else nxt[-1]
        return self._choice.get((id(node), len(pos) % 2))

    def __getitem__(self, pos) -> Pos:
        pos = tuple(pos)
        node = self.game.tree.find(pos)
        if node is None or not node.children or not self._owned(pos):
            raise KeyError(pos)
        label = self.choose(pos, node)
        if label is None:
            raise KeyError(pos)
        return pos + (label,)

    def __iter__(self) -> Iterator[Pos]:
        if self._moves is not None:
            return iter(self._moves)
        return (p for p in self.game.positions() if self._owned(p) and not self.game.is_terminal(p))

    def __len__(self) -> int:
        return sum(1 for _ in self)

    def __repr__(self) -> str:
        return f"Strategy(player={self.player})"


class Solution(NamedTuple):
    winner: str
    strategy: Strategy


def _walk(root: TrieNode, parity: int) -> List[Tuple[TrieNode, int]]:
    """Distinct (sub-trie, depth parity) states reachable from the root, children first."""
    seen = set()
    order = []
    stack = [(root, parity, False)]
    while stack:
        node, par, done = stack.pop()
        key = (id(node), par)
        if done:
            order.append((node, par))
            continue
        if key in seen:
            continue
        seen.add(key)
        stack.append((node, par, True))
        for child in node.children.values():
            if (id(child), 1 - par) not in seen:
                stack.append((child, 1 - par, False))
    return order


def _winners(g: GameTree) -> Dict[Tuple[int, int], str]:
    win: Dict[Tuple[int, int], str] = {}
    for node, par in _walk(g.root, 0):
        if not node.children:
            win[(id(node), par)] = _terminal_winner(par)
            continue
        me = _mover(par)
        ok = any(win[(id(c), 1 - par)] == me for c in node.children.values())
        win[(id(node), par)] = me if ok else (PLAYER_II if me == PLAYER_I else PLAYER_I)
    return win


def position_winners(g: GameTree) -> Dict[Pos, str]:
    """Winner under optimal play from every position (materialized)."""
    win = _winners(g)
    return {p: win[(id(g.tree.find(p)), len(p) % 2)] for p in g.positions()}


def optimal_strategy(g: GameTree, player: str, _win=None) -> Strategy:
    """Least winning move wherever one exists, else the least move."""
    win = _win if _win is not None else _winners(g)
    choice = {}
    for node, par in _walk(g.root, 0):
        if not node.children or _mover(par) != player:
            continue
        labels = _sorted_labels(node)
        good = [lab for lab in labels if win[(id(node.children[lab]), 1 - par)] == player]
        choice[(id(node), par)] = (good or labels)[0]
    return Strategy(g, player, choice=choice)


def solve(g: GameTree) -> Solution:
    """Backward induction: the root's winner and a winning strategy for them."""
    win = _winners(g)
    winner = win[(id(g.root), 0)]
    return Solution(winner, optimal_strategy(g, winner, win))


def play(g: GameTree, s_i: Strategy, s_ii: Strategy) -> Pos:
    """The terminal position reached when the two strategies face each other."""
    pos: Pos = ()
    node = g.root
    while node.children:
        s = s_i if len(pos) % 2 == 0 else s_ii
        label = s.choose(pos, node)
        if label is None or label not in node.children:
            raise InvalidStrategyError(f"strategy for {s.player} has no legal move at {pos!r}")
        pos = pos + (label,)
        node = node.children[label]
    return pos


def _owned_positions(g: GameTree, player: str) -> List[Tuple[Pos, List]]:
    out = []
    for p in g.positions():
        node = g.tree.find(p)
        if node.children and _mover(len(p)) == player:
            out.append((p, _sorted_labels(node)))
    return out


def opponent_strategies(g: GameTree, player: str) -> Iterator[Strategy]:
    """Every strategy of ``player`` (total on their positions); exponential."""
    owned = _owned_positions(g, player)
    for combo in itertools.product(*(labels for _, labels in owned)):
        yield Strategy(g, player, {p: p + (lab,) for (p, _), lab in zip(owned, combo)})


def never_loses(g: GameTree, s: Strategy) -> bool:
    """Does ``s`` win against every strategy of the other player?"""
    other = PLAYER_II if s.player == PLAYER_I else PLAYER_I
    for t in opponent_strategies(g, other):
        pair = (s, t) if s.player == PLAYER_I else (t, s)
        if _terminal_winner(len(play(g, *pair))) != s.player:
            return False
    return True


def exhaustive_solve(g: GameTree) -> Tuple[bool, bool]:
    """(I has a winning strategy, II has one), by enumerating all strategy pairs."""
    nodes = list(g.positions())
    pos = {p: i for i, p in enumerate(nodes)}
    indptr = [0]
    indices: List[int] = []
    for p in nodes:
        indices.extend(pos[c] for c in g.successors(p))
        indptr.append(len(indices))
    depth = np.asarray([len(p) for p in nodes], dtype=np.int64)
    return tuple(
        bool(x)
        for x in exhaustive_winner(np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64), depth)
    )


# -- enumeration of small games --------------------------------------------------


def level_sequences(n: int) -> Iterator[List[int]]:
    """Canonical level sequences of all rooted unlabeled trees on n nodes."""
    if n <= 0:
        return
    if n == 1:
        yield [0]
        return
    seq = list(range(n))
    while True:
        yield list(seq)
        p = max(i for i in range(n) if seq[i] > 1) if any(x > 1 for x in seq) else None
        if p is None:
            return
        q = max(i for i in range(p) if seq[i] == seq[p] - 1)
        for i in range(p, n):
            seq[i] = seq[i - (p - q)]


def tree_from_levels(levels: Sequence[int]) -> FiniteTree:
    """The tree whose preorder depths are ``levels``; child labels count up from 0."""
    seqs = [()]
    path: List[Tuple] = [()]
    counts: Dict[Tuple, int] = {}
    for d in levels[1:]:
        parent = path[d - 1]
        k = counts.get(parent, 0)
        counts[parent] = k + 1
        node = parent + (k,)
        seqs.append(node)
        del path[d:]
        path.append(node)
    return FiniteTree.from_sequences(seqs)


def all_games(max_nodes: int) -> Iterator[GameTree]:
    """Every game of at most ``max_nodes`` positions, up to isomorphism."""
    for n in range(1, max_nodes + 1):
        for levels in level_sequences(n):
            yield GameTree(tree_from_levels(levels))


def relabel(g: GameTree, rename) -> GameTree:
    """Apply ``rename(position, label)`` to every move label (must stay injective per node)."""

    def go(node: TrieNode, pos: Pos) -> TrieNode:
        if not node.children:
            return LEAF
        out = {}
        for lab, child in node.children.items():
            new = rename(pos, lab)
            if new in out:
                raise ValueError("relabelling merged two moves")
            out[new] = go(child, pos + (new,))
        return TrieNode(out)

    return GameTree(FiniteTree(go(g.root, ())))


# -- bisimulation games --------------------------------------------------------------


class _BisimGames:
    """Shared tries for the pairwise games on one tree."""

    def __init__(self, t: FiniteTree):
        self.t = t
        self.children = {s: t.children(s) for s in t.nodes()}
        self.memo: Dict[Tuple[Pos, Pos], TrieNode] = {}

    def pairwise(self, x: Pos, y: Pos) -> TrieNode:
        stack = [(x, y)]
        while stack:
            p = stack[-1]
            if p in self.memo:
                stack.pop()
                continue
            a, b = p
            need = [(c, d) for c in self.children[a] for d in self.children[b] if (c, d) not in self.memo]
            if need:
                stack.extend(need)
                continue
            stack.pop()
            moves = {}
            for c in self.children[a]:
                moves[("L", c)] = TrieNode({("R", d): self.memo[(c, d)] for d in self.children[b]})
            for d in self.children[b]:
                moves[("R", d)] = TrieNode({("L", c): self.memo[(c, d)] for c in self.children[a]})
            self.memo[p] = TrieNode(moves)
        return self.memo[(x, y)]


def bisimulation_game(t: FiniteTree, pair: Tuple[Pos, Pos]) -> GameTree:
    """The game on (σ, τ): I extends one side, II must extend the other.

    Moves are ``("L", child)`` or ``("R", child)``; whoever cannot move loses.
    """
    x, y = (tuple(p) for p in pair)
    if x not in t or y not in t:
        raise ValueError(f"pair {pair!r} mentions a node outside the tree")
    return GameTree(FiniteTree(_BisimGames(t).pairwise(x, y)))


def full_bisimulation_game(t: FiniteTree) -> GameTree:
    """I names a pair, then II plays second (``("second",)``) or first.

    After ``("first",)`` Player I makes the forced move ``("pass",)`` so that
    Player II takes the opening role in the pairwise game.
    """
    games = _BisimGames(t)
    nodes = list(t.nodes())
    root = {}
    for x in nodes:
        for y in nodes:
            inner = games.pairwise(x, y)
            root[("pair", (x, y))] = TrieNode(
                {("second",): inner, ("first",): TrieNode({("pass",): inner})}
            )
    return GameTree(FiniteTree(TrieNode(root)))


def _wins_all(g: GameTree, s: Strategy, pos: Pos, node: TrieNode) -> bool:
    stack = [(pos, node)]
    while stack:
        p, n = stack.pop()
        if not n.children:
            if _terminal_winner(len(p)) != s.player:
                return False
            continue
        if _mover(len(p)) == s.player:
            lab = s.choose(p, n)
            if lab is None or lab not in n.children:
                raise InvalidStrategyError(f"strategy has no legal move at {p!r}")
            stack.append((p + (lab,), n.children[lab]))
        else:
            stack.extend((p + (lab,), c) for lab, c in n.children.items())
    return True


def bisim_from_strategy(t: FiniteTree, s: Strategy) -> frozenset:
    """{(σ, τ) : II, following ``s``, chooses to play second after I names (σ, τ)}."""
    g = s.game
    if s.player != PLAYER_II:
        raise NotWinningError("a Player II strategy is required")
    if not _wins_all(g, s, (), g.root):
        raise NotWinningError("the strategy does not win the full bisimulation game")
    out = set()
    for lab, node in g.root.children.items():
        if s.choose((lab,), node) == ("second",):
            out.add(lab[1])
    return frozenset(out)
