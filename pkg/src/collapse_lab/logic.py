"""First-order formulas over {∈, =} and Tarskian satisfaction in (a, ∈).

Variables are natural-number indices.  Besides the unbounded quantifiers,
the AST has bounded forms ``ExistsIn(i, j, φ)`` (∃x_i ∈ x_j φ) and
``ForallIn(i, j, φ)``; they range over the members of x_j's value that also
belong to the structure.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple

from .hf import HFSet, SizeLimitError

__all__ = [
    "Formula",
    "Member",
    "Equal",
    "Not",
    "And",
    "Or",
    "Exists",
    "Forall",
    "ExistsIn",
    "ForallIn",
    "Implies",
    "Iff",
    "ext_equal",
    "AssignmentTooShortError",
    "FormulaSyntaxError",
    "free_vars",
    "max_var",
    "size",
    "quantifier_depth",
    "logical_rank",
    "to_nnf",
    "is_nnf",
    "assign_update",
    "evaluate",
    "eval_formula",
    "theory",
    "enumerate_formulas",
    "parse_formula",
    "format_formula",
    "THEORY_MAX_ELEMENTS",
    "THEORY_MAX_SIZE",
]

THEORY_MAX_ELEMENTS = 6
THEORY_MAX_SIZE = 7

Assignment = Tuple[HFSet, ...]


class Formula:
    __slots__ = ()

    def sexpr(self) -> str:
        return format_formula(self)

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True, slots=True)
class Member(Formula):
    i: int
    j: int


@dataclass(frozen=True, slots=True)
class Equal(Formula):
    i: int
    j: int


@dataclass(frozen=True, slots=True)
class Not(Formula):
    f: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    f: Formula
    g: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    f: Formula
    g: Formula


@dataclass(frozen=True, slots=True)
class Exists(Formula):
    i: int
    f: Formula


@dataclass(frozen=True, slots=True)
class Forall(Formula):
    i: int
    f: Formula


@dataclass(frozen=True, slots=True)
class ExistsIn(Formula):
    i: int
    j: int
    f: Formula


@dataclass(frozen=True, slots=True)
class ForallIn(Formula):
    i: int
    j: int
    f: Formula


ATOMS = (Member, Equal)
QUANTIFIERS = (Exists, Forall, ExistsIn, ForallIn)


def Implies(f: Formula, g: Formula) -> Formula:
    return Or(Not(f), g)


def Iff(f: Formula, g: Formula) -> Formula:
    return And(Or(Not(f), g), Or(Not(g), f))


def ext_equal(i: int, j: int, fresh: int) -> Formula:
    """∀z (z∈x_i ↔ z∈x_j), equality as an abbreviation; ``fresh`` must be unused."""
    z = fresh
    return Forall(z, And(Or(Not(Member(z, i)), Member(z, j)), Or(Not(Member(z, j)), Member(z, i))))


class AssignmentTooShortError(ValueError):
    pass


# -- syntactic measures -------------------------------------------------------


def free_vars(f: Formula) -> FrozenSet[int]:
    if isinstance(f, ATOMS):
        return frozenset((f.i, f.j))
    if isinstance(f, Not):
        return free_vars(f.f)
    if isinstance(f, (And, Or)):
        return free_vars(f.f) | free_vars(f.g)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.f) - {f.i}
    if isinstance(f, (ExistsIn, ForallIn)):
        return (free_vars(f.f) - {f.i}) | {f.j}
    raise TypeError(f"not a formula: {f!r}")


def max_var(f: Formula) -> int:
    """Largest free variable index, -1 for a sentence."""
    return max(free_vars(f), default=-1)


def size(f: Formula) -> int:
    """Number of AST nodes."""
    if isinstance(f, ATOMS):
        return 1
    if isinstance(f, Not):
        return 1 + size(f.f)
    if isinstance(f, (And, Or)):
        return 1 + size(f.f) + size(f.g)
    return 1 + size(f.f)


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        return quantifier_depth(f.f)
    if isinstance(f, (And, Or)):
        return max(quantifier_depth(f.f), quantifier_depth(f.g))
    return 1 + quantifier_depth(f.f)


def logical_rank(f: Formula) -> int:
    """Nesting depth of connectives and quantifiers above the literals of an NNF formula."""
    if isinstance(f, ATOMS):
        return 0
    if isinstance(f, Not):
        if isinstance(f.f, ATOMS):
            return 0
        return 1 + logical_rank(f.f)
    if isinstance(f, (And, Or)):
        return 1 + max(logical_rank(f.f), logical_rank(f.g))
    return 1 + logical_rank(f.f)


# -- negation normal form -----------------------------------------------------


def to_nnf(f: Formula) -> Formula:
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, And):
        return And(to_nnf(f.f), to_nnf(f.g))
    if isinstance(f, Or):
        return Or(to_nnf(f.f), to_nnf(f.g))
    if isinstance(f, Exists):
        return Exists(f.i, to_nnf(f.f))
    if isinstance(f, Forall):
        return Forall(f.i, to_nnf(f.f))
    if isinstance(f, ExistsIn):
        return ExistsIn(f.i, f.j, to_nnf(f.f))
    if isinstance(f, ForallIn):
        return ForallIn(f.i, f.j, to_nnf(f.f))
    g = f.f
    if isinstance(g, ATOMS):
        return f
    if isinstance(g, Not):
        return to_nnf(g.f)
    if isinstance(g, And):
        return Or(to_nnf(Not(g.f)), to_nnf(Not(g.g)))
    if isinstance(g, Or):
        return And(to_nnf(Not(g.f)), to_nnf(Not(g.g)))
    if isinstance(g, Exists):
        return Forall(g.i, to_nnf(Not(g.f)))
    if isinstance(g, Forall):
        return Exists(g.i, to_nnf(Not(g.f)))
    if isinstance(g, ExistsIn):
        return ForallIn(g.i, g.j, to_nnf(Not(g.f)))
    if isinstance(g, ForallIn):
        return ExistsIn(g.i, g.j, to_nnf(Not(g.f)))
    raise TypeError(f"not a formula: {g!r}")


def is_nnf(f: Formula) -> bool:
    if isinstance(f, ATOMS):
        return True
    if isinstance(f, Not):
        return isinstance(f.f, ATOMS)
    if isinstance(f, (And, Or)):
        return is_nnf(f.f) and is_nnf(f.g)
    return is_nnf(f.f)


# -- semantics ----------------------------------------------------------------


def assign_update(s: Sequence[HFSet], i: int, b: HFSet) -> Assignment:
    """σ[b/x_i]: overwrite position i, padding with b when i ≥ |σ|."""
    s = tuple(s)
    if i < len(s):
        return s[:i] + (b,) + s[i + 1 :]
    return s + (b,) * (i + 1 - len(s))


def evaluate(a: HFSet, f: Formula, s: Sequence[HFSet]) -> bool:
    """Truth of f in (a, ∈) under s; quantifiers range over members of a."""
    s = tuple(s)
    if len(s) <= max_var(f):
        raise AssignmentTooShortError(
            f"assignment of length {len(s)} does not cover variable {max_var(f)}"
        )
    return _eval(a, f, s)


eval_formula = evaluate


def _eval(a: HFSet, f: Formula, s: Assignment) -> bool:
    t = type(f)
    if t is Member:
        return s[f.i] in s[f.j]
    if t is Equal:
        return s[f.i] is s[f.j]
    if t is Not:
        return not _eval(a, f.f, s)
    if t is And:
        return _eval(a, f.f, s) and _eval(a, f.g, s)
    if t is Or:
        return _eval(a, f.f, s) or _eval(a, f.g, s)
    if t is Exists:
        return any(_eval(a, f.f, assign_update(s, f.i, b)) for b in a)
    if t is Forall:
        return all(_eval(a, f.f, assign_update(s, f.i, b)) for b in a)
    if t is ExistsIn:
        return any(_eval(a, f.f, assign_update(s, f.i, b)) for b in s[f.j] if b in a)
    if t is ForallIn:
        return all(_eval(a, f.f, assign_update(s, f.i, b)) for b in s[f.j] if b in a)
    raise TypeError(f"not a formula: {f!r}")


# -- enumeration of the elementary diagram --------------------------------------


def enumerate_formulas(max_size: int, free: int = 2, nnf_only: bool = False) -> List[Formula]:
    """All formulas of size ≤ max_size in canonical variable numbering.

    Free variables come from {0, …, free−1}; a quantifier at nesting depth d
    binds variable free+d, so alphabetic variants appear only once.  With
    ``nnf_only`` negation is restricted to atoms.  Order: by size, then by
    the s-expression text.
    """
    table: Dict[Tuple[int, int], List[Formula]] = {}

    def build(n: int, depth: int) -> List[Formula]:
        key = (n, depth)
        if key in table:
            return table[key]
        nv = free + depth
        out: List[Formula] = []
        if n == 1:
            out = [C(i, j) for C in ATOMS for i in range(nv) for j in range(nv)]
        else:
            if nnf_only:
                if n == 2:
                    out += [Not(x) for x in build(1, depth)]
            else:
                out += [Not(x) for x in build(n - 1, depth)]
            for k in range(1, n - 1):
                for x in build(k, depth):
                    for y in build(n - 1 - k, depth):
                        out.append(And(x, y))
                        out.append(Or(x, y))
            bound = free + depth
            for x in build(n - 1, depth + 1):
                out.append(Exists(bound, x))
                out.append(Forall(bound, x))
        table[key] = out
        return out

    result = []
    for n in range(1, max_size + 1):
        layer = build(n, 0)
        result.extend(sorted(layer, key=format_formula))
    return result


def theory(a: HFSet, max_size: int, free: int = 2) -> Set[Tuple[Formula, Assignment]]:
    """{(θ, σ) : size θ ≤ max_size, σ ∈ a^(max FV θ + 1), (a,∈) ⊨ θ[σ]}."""
    if len(a) > THEORY_MAX_ELEMENTS or max_size > THEORY_MAX_SIZE:
        raise SizeLimitError(
            f"theory limited to |a| ≤ {THEORY_MAX_ELEMENTS} and size ≤ {THEORY_MAX_SIZE}"
        )
    out = set()
    members = tuple(a)
    for f in enumerate_formulas(max_size, free):
        for s in iproduct(members, repeat=max_var(f) + 1):
            if _eval(a, f, s):
                out.add((f, s))
    return out


# -- s-expressions ----------------------------------------------------------------

_TOK = re.compile(r"\s*(?:(\()|(\))|([A-Za-z_-]+)|(\d+))")


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _tokens(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            return out
        m = _TOK.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = "(" if m.group(1) else ")" if m.group(2) else "word" if m.group(3) else "int"
        out.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()


_ARITY = {
    "in": ("int", "int"),
    "eq": ("int", "int"),
    "not": ("f",),
    "and": ("f", "f"),
    "or": ("f", "f"),
    "imp": ("f", "f"),
    "iff": ("f", "f"),
    "ex": ("int", "f"),
    "all": ("int", "f"),
    "exin": ("int", "int", "f"),
    "allin": ("int", "int", "f"),
}
_BUILD = {
    "in": Member,
    "eq": Equal,
    "not": Not,
    "and": And,
    "or": Or,
    "imp": Implies,
    "iff": Iff,
    "ex": Exists,
    "all": Forall,
    "exin": ExistsIn,
    "allin": ForallIn,
}


def parse_formula(text: str) -> Formula:
    """Parse ``(in i j) (eq i j) (not f) (and f g) (or f g) (ex i f) (all i f)``.

    Also accepted: ``(imp f g)``, ``(iff f g)`` (desugared on the spot) and
    the bounded forms ``(exin i j f)``, ``(allin i j f)``.
    """
    toks = _tokens(text)
    pos = 0

    def expect(kind: str):
        nonlocal pos
        if pos >= len(toks):
            raise FormulaSyntaxError(f"expected {kind}, got end of input", len(text))
        tok = toks[pos]
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind}, got {tok[1]!r}", tok[2])
        pos += 1
        return tok

    def formula() -> Formula:
        expect("(")
        _, head, where = expect("word")
        if head not in _ARITY:
            raise FormulaSyntaxError(f"unknown connective {head!r}", where)
        args = []
        for kind in _ARITY[head]:
            if kind == "int":
                args.append(int(expect("int")[1]))
            else:
                args.append(formula())
        expect(")")
        return _BUILD[head](*args)

    f = formula()
    if pos != len(toks):
        raise FormulaSyntaxError(f"trailing input {toks[pos][1]!r}", toks[pos][2])
    return f


def format_formula(f: Formula) -> str:
    if isinstance(f, Member):
        return f"(in {f.i} {f.j})"
    if isinstance(f, Equal):
        return f"(eq {f.i} {f.j})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.f)})"
    if isinstance(f, And):
        return f"(and {format_formula(f.f)} {format_formula(f.g)})"
    if isinstance(f, Or):
        return f"(or {format_formula(f.f)} {format_formula(f.g)})"
    if isinstance(f, Exists):
        return f"(ex {f.i} {format_formula(f.f)})"
    if isinstance(f, Forall):
        return f"(all {f.i} {format_formula(f.f)})"
    if isinstance(f, ExistsIn):
        return f"(exin {f.i} {f.j} {format_formula(f.f)})"
    if isinstance(f, ForallIn):
        return f"(allin {f.i} {f.j} {format_formula(f.f)})"
    raise TypeError(f"not a formula: {f!r}")
