"""Δ0 transfinite recursion: a direct evaluator and the stage-tree construction.

An instance gives a set ``a``, a well-founded relation ≺ on a carrier X of
hereditarily finite sets, a formula ψ(u, v, p0, …) in which v occurs only in
literals ``x ∈ v`` / ``x ∉ v``, and parameters.  The result is the unique
H ⊆ a × X with  c ∈ H_s ⟺ ψ[c, H_{≺s}, p0, …]  for all s ∈ X and c ∈ a.
"""
from __future__ import annotations

import gc
import json
import random
import sys
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .collapse import CarrierRelation, is_well_founded
from .hf import (
    EMPTY,
    HFSet,
    canon,
    decode_pair,
    format_set,
    kuratowski,
    parse_set,
    transitive_closure,
    von_neumann,
)
from .logic import (
    And,
    Equal,
    ExistsIn,
    ForallIn,
    Formula,
    Member,
    Not,
    Or,
    assign_update,
    evaluate,
    format_formula,
    free_vars,
    is_nnf,
    parse_formula,
)
from .trees import TrieNode, collapse_trie
from .truth import TreeBuilder, subformulas

__all__ = [
    "TRInstance",
    "TRResult",
    "Universe",
    "instance_problems",
    "validate_instance",
    "tr_direct",
    "tr_trees",
    "check_recursion",
    "bisim_via_tr",
    "bisim_tr_instance",
    "load_instance",
    "instance_from_json",
    "instance_to_json",
    "InvalidInstanceError",
    "U_VAR",
    "V_VAR",
]

U_VAR = 0
V_VAR = 1


class InvalidInstanceError(ValueError):
    pass


@dataclass(frozen=True)
class TRInstance:
    a: HFSet
    order: CarrierRelation
    psi: Formula
    params: Tuple[HFSet, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))

    @property
    def stages(self) -> Tuple[HFSet, ...]:
        return self.order.carrier

    def predecessors(self) -> Dict[HFSet, List[HFSet]]:
        below: Dict[HFSet, List[HFSet]] = {s: [] for s in self.order.carrier}
        for t, s in self.order.edges:
            below[s].append(t)
        for lst in below.values():
            lst.sort()
        return below

    def base_assignment(self) -> tuple:
        """τ with τ(0) = ∅ (replaced by c), τ(1) = ∅ (v's slot) and τ(i+2) = p_i."""
        return (EMPTY, EMPTY) + self.params


@dataclass
class TRResult:
    """H ⊆ a × X as a set of (c, s) pairs, plus the stages it decides."""

    pairs: FrozenSet[Tuple[HFSet, HFSet]]
    stages: Tuple[HFSet, ...]
    predecessors: Dict[HFSet, List[HFSet]]
    decided: Optional[FrozenSet[Tuple[HFSet, HFSet]]] = None
    anomalies: List[str] = field(default_factory=list)

    def slice(self, s: HFSet) -> HFSet:
        """H_s = {c : (c, s) ∈ H}."""
        return canon(c for c, t in self.pairs if t is s)

    def below(self, s: HFSet) -> HFSet:
        """H_{≺s} = ⋃_{t≺s} H_t × {t}, as a set of Kuratowski pairs."""
        preds = set(self.predecessors[s])
        return canon(kuratowski(c, t) for c, t in self.pairs if t in preds)

    def stages_below(self, s: HFSet) -> HFSet:
        """X_{≺s}."""
        return canon(self.predecessors[s])

    def as_set(self) -> HFSet:
        return canon(kuratowski(c, s) for c, s in self.pairs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TRResult):
            return NotImplemented
        return self.pairs == other.pairs

    def to_json(self) -> dict:
        return {
            "H": sorted([format_set(c), format_set(s)] for c, s in self.pairs),
            "slices": {format_set(s): format_set(self.slice(s)) for s in sorted(self.stages)},
        }


class Universe:
    """TC(a ∪ (a × X) ∪ {p_i}) with lazy membership; iterated only on demand."""

    def __init__(self, a: HFSet, stages: Sequence[HFSet], params: Sequence[HFSet]):
        self.a = a
        self.stages = frozenset(stages)
        base = set(a) | set(transitive_closure(a))
        for p in params:
            base.add(p)
            base |= set(transitive_closure(p))
        if len(a) and self.stages:
            for t in self.stages:
                base.add(t)
                base |= set(transitive_closure(t))
        self._base = frozenset(base)
        self._members: Optional[HFSet] = None

    def __contains__(self, b) -> bool:
        if b in self._base:
            return True
        if not isinstance(b, HFSet) or not len(self.a) or not self.stages:
            return False
        pair = decode_pair(b)
        if pair is not None and pair[0] in self.a and pair[1] in self.stages:
            return True
        # the members {c} and {c, t} of the pairs ⟨c, t⟩
        ms = b.members
        if len(ms) == 1:
            return ms[0] in self.a
        if len(ms) == 2:
            x, y = ms
            return (x in self.a and y in self.stages) or (y in self.a and x in self.stages)
        return False

    def materialize(self) -> HFSet:
        if self._members is None:
            extra = []
            for c in self.a:
                extra.append(canon((c,)))
                for t in self.stages:
                    extra.append(canon((c, t)))
                    extra.append(kuratowski(c, t))
            self._members = canon(list(self._base) + extra)
        return self._members

    def __iter__(self) -> Iterator[HFSet]:
        return iter(self.materialize())

    def __len__(self) -> int:
        return len(self.materialize())


# -- validation ---------------------------------------------------------------


def _v_problems(f: Formula, out: List[str]) -> None:
    v = V_VAR
    if isinstance(f, Member):
        if f.i == v:
            out.append(f"v occurs on the left of ∈ in {format_formula(f)}")
        return
    if isinstance(f, Equal):
        if v in (f.i, f.j):
            out.append(f"v occurs in an equation {format_formula(f)}")
        return
    if isinstance(f, Not):
        _v_problems(f.f, out)
        return
    if isinstance(f, (And, Or)):
        _v_problems(f.f, out)
        _v_problems(f.g, out)
        return
    if f.i == v:
        out.append(f"a quantifier binds v in {format_formula(f)}")
    if isinstance(f, (ExistsIn, ForallIn)) and f.j == v:
        out.append(f"a quantifier is bounded by v in {format_formula(f)}")
    _v_problems(f.f, out)


def instance_problems(inst: TRInstance) -> List[str]:
    """Every reason the instance is unusable; empty when it is valid."""
    out: List[str] = []
    if not is_nnf(inst.psi):
        out.append("ψ is not in negation normal form")
    _v_problems(inst.psi, out)
    allowed = set(range(2 + len(inst.params)))
    stray = sorted(free_vars(inst.psi) - allowed)
    if stray:
        out.append(f"free variables {stray} have no parameter")
    if not all(isinstance(s, HFSet) for s in inst.order.carrier):
        out.append("stage labels must be sets")
    if not is_well_founded(inst.order):
        out.append("the order is not well founded")
    return out


def validate_instance(inst: TRInstance) -> bool:
    return not instance_problems(inst)


def _require_valid(inst: TRInstance) -> None:
    problems = instance_problems(inst)
    if problems:
        raise InvalidInstanceError("; ".join(problems))


# -- direct recursion ------------------------------------------------------------


def _topological_stages(inst: TRInstance, rng: Optional[random.Random]) -> List[HFSet]:
    preds = inst.predecessors()
    succ: Dict[HFSet, List[HFSet]] = {s: [] for s in inst.stages}
    for t, s in inst.order.edges:
        succ[t].append(s)
    pending = {s: len(p) for s, p in preds.items()}
    ready = sorted(s for s, k in pending.items() if k == 0)
    order = []
    while ready:
        i = rng.randrange(len(ready)) if rng else 0
        s = ready.pop(i)
        order.append(s)
        for u in sorted(succ[s]):
            pending[u] -= 1
            if pending[u] == 0:
                ready.append(u)
    return order


def tr_direct(inst: TRInstance, shuffle_seed: Optional[int] = None) -> TRResult:
    """H by recursion along a topological order of ≺ (randomized with ``shuffle_seed``)."""
    _require_valid(inst)
    universe = Universe(inst.a, inst.stages, inst.params)
    preds = inst.predecessors()
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    slices: Dict[HFSet, List[HFSet]] = {}
    tau = inst.base_assignment()
    for s in _topological_stages(inst, rng):
        v = canon(kuratowski(c, t) for t in preds[s] for c in slices[t])
        base = assign_update(tau, V_VAR, v)
        slices[s] = [c for c in inst.a if evaluate(universe, inst.psi, assign_update(base, U_VAR, c))]
    pairs = frozenset((c, s) for s, cs in slices.items() for c in cs)
    return TRResult(pairs, inst.stages, preds)


def check_recursion(inst: TRInstance, result: TRResult) -> List[HFSet]:
    """Stages at which H_s ≠ {c ∈ a : ψ[c, H_{≺s}, p]}; empty when H is a solution."""
    universe = Universe(inst.a, inst.stages, inst.params)
    tau = inst.base_assignment()
    bad = []
    for s in inst.stages:
        base = assign_update(tau, V_VAR, result.below(s))
        want = canon(c for c in inst.a if evaluate(universe, inst.psi, assign_update(base, U_VAR, c)))
        if want is not result.slice(s):
            bad.append(s)
    return bad


# -- stage trees -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _mentions_v(f: Formula) -> bool:
    return V_VAR in free_vars(f)


def _is_v_literal(f: Formula) -> bool:
    g = f.f if isinstance(f, Not) else f
    return isinstance(g, Member) and g.j == V_VAR


class _StageBuilder(TreeBuilder):
    def __init__(self, engine: "_TreeEngine", stage: HFSet):
        super().__init__(engine.universe)
        self.engine = engine
        self.stage = stage

    # v-free subformulas have stage-independent trees, built once
    def top(self, f):
        return super().top(f) if _mentions_v(f) else self.engine.plain.top(f)

    def bot(self, f):
        return super().bot(f) if _mentions_v(f) else self.engine.plain.bot(f)

    def sat(self, f, s):
        return super().sat(f, s) if _mentions_v(f) else self.engine.plain.sat(f, s)

    def literal_top(self, f):
        if not _is_v_literal(f):
            return super().literal_top(f)
        e = self.engine
        return e.in_bot(self.stage) if isinstance(f, Not) else e.in_top(self.stage)

    def literal_bot(self, f):
        if not _is_v_literal(f):
            return super().literal_bot(f)
        e = self.engine
        return e.in_top(self.stage) if isinstance(f, Not) else e.in_bot(self.stage)

    def literal_sat(self, f, s):
        if not _is_v_literal(f):
            return super().literal_sat(f, s)
        g = f.f if isinstance(f, Not) else f
        return self.engine.in_sat(self.stage, s[g.i])


class _TreeEngine:
    def __init__(self, inst: TRInstance):
        self.inst = inst
        self.universe = Universe(inst.a, inst.stages, inst.params)
        self.preds = inst.predecessors()
        self.pred_sets = {s: frozenset(p) for s, p in self.preds.items()}
        self.plain = TreeBuilder(self.universe)
        self.builders: Dict[HFSet, _StageBuilder] = {}
        self.tau = inst.base_assignment()
        self._in_top: Dict[HFSet, TrieNode] = {}
        self._in_bot: Dict[HFSet, TrieNode] = {}
        self._in_sat: Dict[Tuple[HFSet, HFSet], TrieNode] = {}

    def builder(self, s: HFSet) -> _StageBuilder:
        b = self.builders.get(s)
        if b is None:
            b = self.builders[s] = _StageBuilder(self, s)
        return b

    def top_psi(self, s):
        return self.builder(s).top(self.inst.psi)

    def bot_psi(self, s):
        return self.builder(s).bot(self.inst.psi)

    def assignment(self, c: HFSet) -> tuple:
        return assign_update(self.tau, U_VAR, c)

    def sat_psi(self, s, c):
        return self.builder(s).sat(self.inst.psi, self.assignment(c))

    def _refutations(self, s) -> dict:
        return {(q, 0): self.bot_psi(q) for q in self.preds[s]}

    def in_top(self, s: HFSet) -> TrieNode:
        """⊤^s_{x∈v}: one branch t per t ≺ s holding the ⟨q,0⟩⌢⊥^q and (s)⌢⊤^t."""
        node = self._in_top.get(s)
        if node is None:
            refute = self._refutations(s)
            node = TrieNode({t: TrieNode({**refute, s: self.top_psi(t)}) for t in self.preds[s]})
            self._in_top[s] = node
        return node

    def in_bot(self, s: HFSet) -> TrieNode:
        """⊥^s_{x∈v} = ⊤^s ∪ (s)⌢⋃_{t≺s}(⟨t,0⟩)⌢⊥^t."""
        node = self._in_bot.get(s)
        if node is None:
            node = TrieNode({**self.in_top(s).children, s: TrieNode(self._refutations(s))})
            self._in_bot[s] = node
        return node

    def in_sat(self, s: HFSet, value: HFSet) -> TrieNode:
        key = (s, value)
        node = self._in_sat.get(key)
        if node is not None:
            return node
        pair = decode_pair(value) if isinstance(value, HFSet) else None
        if pair is not None and pair[0] in self.inst.a and pair[1] in self.pred_sets[s]:
            c, t = pair
            # a separate branch labelled s, beside the t-branches of ⊤^s
            extra = TrieNode({**self._refutations(s), s: self.sat_psi(t, c)})
            node = TrieNode({**self.in_top(s).children, s: extra})
        else:
            node = self.in_bot(s)
        self._in_sat[key] = node
        return node


def tr_trees(inst: TRInstance, demand: Optional[Iterable[Tuple[HFSet, HFSet]]] = None) -> TRResult:
    """H read off one collapse of the combined stage tree.

    With ``demand`` (a collection of (c, s) pairs) only the trees needed to
    decide those pairs are built; ``decided`` on the result lists every pair
    whose membership was settled.
    """
    _require_valid(inst)
    engine = _TreeEngine(inst)
    if demand is None:
        wanted = [(c, s) for s in inst.stages for c in inst.a]
    else:
        wanted = list(demand)
        for c, s in wanted:
            if c not in inst.a or s not in engine.preds:
                raise ValueError(f"demanded pair ({c}, {s}) is outside a × X")
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 20000))
    # the tries are acyclic; cycle collection only slows the build down
    gc_was_on = gc.isenabled()
    gc.disable()
    try:
        for c, s in wanted:
            engine.sat_psi(s, c)
        root_children = {}
        for s, b in engine.builders.items():
            for f in subformulas(inst.psi):
                root_children[(s, f, 1)] = b.top(f)
                root_children[(s, f, 0)] = b.bot(f)
            for f, sig in b.sat_keys():
                root_children[(s, f, sig)] = b.sat(f, sig)
        for f, sig in engine.plain.sat_keys():
            root_children[("plain", f, sig)] = engine.plain.sat(f, sig)
        root = TrieNode(root_children)
        memo: dict = {}
        collapse_trie(root, memo)
    finally:
        sys.setrecursionlimit(old_limit)
        if gc_was_on:
            gc.enable()

    def pi(node):
        return memo[id(node)]

    pairs = set()
    decided = set()
    anomalies = []
    psi_tb = {}
    for s, b in engine.builders.items():
        psi_tb[s] = top, bot = pi(b.top(inst.psi)), pi(b.bot(inst.psi))
        if top is bot:
            anomalies.append(f"π⊤ = π⊥ at stage {format_set(s)}")
    for c, s in wanted:
        top, bot = psi_tb[s]
        value = pi(engine.sat_psi(s, c))
        decided.add((c, s))
        if value is top:
            pairs.add((c, s))
        elif value is not bot:
            anomalies.append(f"πS is neither π⊤ nor π⊥ at ({format_set(c)}, {format_set(s)})")
    tops = {pi(engine.top_psi(s)) for s in engine.builders}
    bots = {pi(engine.bot_psi(s)) for s in engine.builders}
    if tops & bots:
        anomalies.append("some π⊤^t equals some π⊥^q across stages")
    return TRResult(frozenset(pairs), inst.stages, engine.preds, frozenset(decided), anomalies)


# -- the bisimulation corollary -------------------------------------------------------


def _marker(k: int) -> HFSet:
    """A set containing ∅, distinct for each k: {∅} ∪ {k-th bit ordinals}."""
    return canon([EMPTY] + [von_neumann(i + 1) for i in range(k.bit_length()) if k >> i & 1])


BISIM_PSI = ForallIn(3, U_VAR, Or(Member(3, 2), ExistsIn(4, 3, Member(4, V_VAR))))


def bisim_tr_instance(t) -> Tuple[TRInstance, Dict[tuple, HFSet]]:
    """Encode the bisimulation recursion on T × T as a Δ0-TR instance.

    Each node pair p = (σ, τ) gets a code c_p whose members are one marker
    (unique to p, containing ∅) and the obligation sets
    {⟨c_q, c_q⟩ : q = (ρ0, ρ1), ρ1 child of τ} for each child ρ0 of σ, and
    symmetrically for each child of τ.  ψ says every member of u is either a
    marker (in p0) or an obligation set met by some pair already in v.
    """
    nodes = list(t.nodes())
    children = {s: t.children(s) for s in nodes}
    pairs = [(x, y) for x in nodes for y in nodes]
    index = {p: k for k, p in enumerate(pairs)}
    codes: Dict[tuple, HFSet] = {}

    def code(p) -> HFSet:
        got = codes.get(p)
        if got is not None:
            return got
        x, y = p
        members = [_marker(index[p])]
        for r0 in children[x]:
            members.append(canon(_diag(code((r0, r1))) for r1 in children[y]))
        for r1 in children[y]:
            members.append(canon(_diag(code((r0, r1))) for r0 in children[x]))
        codes[p] = canon(members)
        return codes[p]

    # children pairs first so the recursion stays shallow
    for p in sorted(pairs, key=lambda q: -(len(q[0]) + len(q[1]))):
        code(p)
    edges = []
    for x, y in pairs:
        for r0 in children[x]:
            for r1 in children[y]:
                edges.append((codes[(r0, r1)], codes[(x, y)]))
    carrier = [codes[p] for p in pairs]
    a = canon(carrier)
    markers = canon(_marker(index[p]) for p in pairs)
    inst = TRInstance(a, CarrierRelation(carrier, edges), BISIM_PSI, (markers,))
    return inst, codes


def _diag(c: HFSet) -> HFSet:
    return kuratowski(c, c)


def bisim_via_tr(t) -> FrozenSet[Tuple[tuple, tuple]]:
    """{(σ, τ) : ⟨c_(σ,τ), c_(σ,τ)⟩ ∈ H} for the recursion of ``bisim_tr_instance``."""
    inst, codes = bisim_tr_instance(t)
    result = tr_trees(inst, demand=[(c, c) for c in codes.values()])
    if result.anomalies:
        raise RuntimeError("stage-tree construction lost two-valuedness: " + result.anomalies[0])
    return frozenset(p for p, c in codes.items() if (c, c) in result.pairs)


# -- instance files --------------------------------------------------------------------


def instance_from_json(data: dict) -> TRInstance:
    """{"a": setexpr, "order": {"carrier": [setexpr…], "edges": [[v,u]…]}, "psi": fexpr, "params": [setexpr…]}."""
    for key in ("a", "order", "psi"):
        if key not in data:
            raise ValueError(f"instance is missing {key!r}")
    a = parse_set(data["a"])
    order = data["order"]
    carrier = [parse_set(x) for x in order.get("carrier", [])]
    edges = [(parse_set(v), parse_set(u)) for v, u in order.get("edges", [])]
    psi = parse_formula(data["psi"])
    params = tuple(parse_set(p) for p in data.get("params", []))
    return TRInstance(a, CarrierRelation(carrier, edges), psi, params)


def instance_to_json(inst: TRInstance) -> dict:
    return {
        "a": format_set(inst.a),
        "order": {
            "carrier": [format_set(s) for s in inst.order.carrier],
            "edges": sorted([format_set(v), format_set(u)] for v, u in inst.order.edges),
        },
        "psi": format_formula(inst.psi),
        "params": [format_set(p) for p in inst.params],
    }


def load_instance(path: str) -> TRInstance:
    with open(path) as fh:
        return instance_from_json(json.load(fh))
