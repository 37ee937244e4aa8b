"""Finite levels of the relativized constructible hierarchy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .collapse import CarrierRelation, collapse
from .hf import (
    EMPTY,
    HFSet,
    SizeLimitError,
    canon,
    finite_powerset,
    get_limits,
    singleton,
    transitive_closure,
)
from .logic import Formula, assign_update, enumerate_formulas, evaluate, format_formula, size

__all__ = [
    "LevelSequence",
    "SaturationReport",
    "definable_subset",
    "def_set",
    "audit_def",
    "l_level",
    "rank_function",
]


def definable_subset(a: HFSet, f: Formula, params: Sequence[HFSet] = ()) -> HFSet:
    """{s ∈ a : (a, ∈) ⊨ f[s, p₁, …]}; x₀ is the defined variable."""
    members = set(a)
    for p in params:
        if p not in members:
            raise ValueError("parameters must be members of a")
    base = (EMPTY,) + tuple(params)
    return canon(s for s in a if evaluate(a, f, assign_update(base, 0, s)))


def _check_powerset_size(a: HFSet) -> None:
    cap = get_limits()["max_nodes"]
    if len(a) >= 63 or 2 ** len(a) > cap:
        raise SizeLimitError(f"Def of a set with {len(a)} elements exceeds the node budget {cap}")


def def_set(a: HFSet) -> HFSet:
    # With parameters, every subset of a finite structure is definable.
    _check_powerset_size(a)
    return finite_powerset(a)


@dataclass(frozen=True)
class SaturationReport:
    reached: HFSet
    target: HFSet
    formulas_checked: int
    saturated_at: Optional[int]  # formula size at which every subset appeared
    witnesses: Dict[HFSet, str]

    @property
    def ok(self) -> bool:
        return self.reached is self.target


def audit_def(a: HFSet, max_size: int = 9, params: int = 1) -> SaturationReport:
    """Enumerate formulas φ(x₀, x₁…x_params) by size and collect the subsets they define.

    Stops as soon as the whole powerset has been reached.
    """
    target = def_set(a)
    found: Dict[HFSet, str] = {}
    checked = 0
    elems = list(a)
    assignments: List[tuple] = [()]
    for _ in range(params):
        assignments = [s + (p,) for s in assignments for p in elems]
    at = None
    if not elems:
        found[EMPTY] = "(eq 0 0)"
        at = 1
    n = 0
    while at is None and n < max_size:
        n += 1
        # one layer at a time, so a fast saturation never builds the large layers
        for f in enumerate_formulas(n, free=1 + params):
            if size(f) != n:
                continue
            checked += 1
            for ps in assignments:
                sub = definable_subset(a, f, ps)
                if sub not in found:
                    found[sub] = format_formula(f)
            if len(found) == len(target):
                at = n
                break
    reached = canon(found)
    return SaturationReport(reached, target, checked, at, found)


@dataclass(frozen=True)
class LevelSequence:
    base: HFSet
    levels: tuple

    def __getitem__(self, k: int) -> HFSet:
        return self.levels[k]

    def __len__(self) -> int:
        return len(self.levels)


def l_level(b: HFSet, n: int) -> LevelSequence:
    """L₀(b) = TC(b) and L_{k+1}(b) = Def(L_k(b)) for k < n."""
    if n < 0:
        raise ValueError("level index must be non-negative")
    cur = transitive_closure(b)
    levels = [cur]
    for _ in range(n):
        cur = def_set(cur)
        levels.append(cur)
    return LevelSequence(b, tuple(levels))


def rank_function(x: HFSet) -> Dict[HFSet, HFSet]:
    """Collapse of the transitive closure of ∈ on TC({x}); each y maps to the ordinal rank(y)."""
    carrier = transitive_closure(singleton(x))
    edges = [(u, v) for v in carrier for u in transitive_closure(v)]
    return collapse(CarrierRelation(carrier, edges))
