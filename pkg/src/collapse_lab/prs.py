"""Primitive recursive set functions, the rudimentary basis, and the collapse oracle B."""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .collapse import CarrierRelation, NotWellFoundedError, collapse
from .hf import (
    EMPTY,
    HFSet,
    SizeLimitError,
    canon,
    decode_pair,
    difference,
    get_limits,
    kuratowski,
    product,
    tuple_set,
    union_of,
    von_neumann,
)

__all__ = [
    "PrimTerm",
    "Proj",
    "ZeroFn",
    "Adjoin",
    "Cond",
    "Comp",
    "PrimRec",
    "RudBasic",
    "OracleB",
    "ConstParam",
    "ADJOIN",
    "COND",
    "ORACLE_B",
    "ArityError",
    "UnboundParameterError",
    "PrimSyntaxError",
    "PartialPowersetWarning",
    "arity",
    "eval_prim",
    "rud",
    "beta_oracle",
    "union_term",
    "union_image",
    "tc_program",
    "pfin_program",
    "rank_graph_program",
    "tc_rud",
    "pfin_prim",
    "rank_via_beta",
    "parse_program",
    "format_program",
]


class ArityError(ValueError):
    pass


class UnboundParameterError(KeyError):
    pass


class PrimTerm:
    __slots__ = ()

    def __str__(self) -> str:
        return format_program(self)


@dataclass(frozen=True)
class Proj(PrimTerm):
    i: int
    n: int


@dataclass(frozen=True)
class ZeroFn(PrimTerm):
    n: int


@dataclass(frozen=True)
class Adjoin(PrimTerm):
    pass


@dataclass(frozen=True)
class Cond(PrimTerm):
    """x if u ∈ v, y otherwise, for arguments (x, y, u, v)."""


@dataclass(frozen=True)
class Comp(PrimTerm):
    g0: PrimTerm
    gs: Tuple[PrimTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "gs", tuple(self.gs))


@dataclass(frozen=True)
class PrimRec(PrimTerm):
    """f(x, ȳ) = h(⋃{f(z, ȳ) : z ∈ x}, x, ȳ)."""

    h: PrimTerm


@dataclass(frozen=True)
class RudBasic(PrimTerm):
    index: int


@dataclass(frozen=True)
class OracleB(PrimTerm):
    pass


@dataclass(frozen=True)
class ConstParam(PrimTerm):
    """A named constant (e.g. ``omega``), usable at any arity."""

    name: str


ADJOIN = Adjoin()
COND = Cond()
ORACLE_B = OracleB()


def arity(t: PrimTerm) -> Optional[int]:
    """Number of arguments; ``None`` for constants, which accept any number."""
    if isinstance(t, Proj):
        if not 0 <= t.i < t.n:
            raise ArityError(f"projection index {t.i} out of range for arity {t.n}")
        return t.n
    if isinstance(t, ZeroFn):
        return t.n
    if isinstance(t, (Adjoin, RudBasic, OracleB)):
        if isinstance(t, RudBasic) and not 0 <= t.index <= 8:
            raise ArityError(f"there is no rudimentary function F{t.index}")
        return 2
    if isinstance(t, Cond):
        return 4
    if isinstance(t, ConstParam):
        return None
    if isinstance(t, Comp):
        k = arity(t.g0)
        if k is not None and k != len(t.gs):
            raise ArityError(f"outer function takes {k} arguments, {len(t.gs)} given")
        inner = {arity(g) for g in t.gs} - {None}
        if len(inner) > 1:
            raise ArityError(f"inner functions disagree on arity: {sorted(inner)}")
        return inner.pop() if inner else None
    if isinstance(t, PrimRec):
        k = arity(t.h)
        if k is not None and k < 2:
            raise ArityError("the step function of a recursion takes at least two arguments")
        return None if k is None else k - 1
    raise TypeError(f"not a program: {t!r}")


# -- the rudimentary basis ---------------------------------------------------------------


def _pairs(x: HFSet) -> List[Tuple[HFSet, HFSet]]:
    return [p for p in (decode_pair(m) for m in x) if p is not None]


def rud(i: int, x: HFSet, y: HFSet) -> HFSet:
    """The basic rudimentary function F_i (triples nest to the right)."""
    if i == 0:
        return canon((x, y))
    if i == 1:
        return difference(x, y)
    if i == 2:
        return product(x, y)
    if i == 3:
        return canon(tuple_set(u, w, v) for w in x for u, v in _pairs(y))
    if i == 4:
        return canon(tuple_set(u, v, w) for w in x for u, v in _pairs(y))
    if i == 5:
        return union_of(x)
    if i == 6:
        return canon(u for u, _ in _pairs(x))
    if i == 7:
        return canon(kuratowski(u, v) for u in x for v in x if u in v)
    if i == 8:
        ps = _pairs(x)
        return canon(canon(w for w, z2 in ps if z2 is z) for z in y)
    raise ValueError(f"there is no rudimentary function F{i}")


# -- the oracle B ----------------------------------------------------------------------------


def beta_oracle(a: HFSet, r: HFSet) -> HFSet:
    """Graph of the collapsing function of r on a; ∅ if r is not a well-founded relation on a."""
    members = set(a)
    edges = []
    for p in r:
        pair = decode_pair(p)
        if pair is None or pair[0] not in members or pair[1] not in members:
            return EMPTY
        edges.append(pair)
    try:
        pi = collapse(CarrierRelation(list(a), edges))
    except NotWellFoundedError:
        return EMPTY
    return canon(kuratowski(x, pi[x]) for x in a)


# -- evaluation -------------------------------------------------------------------------------


class _Evaluator:
    def __init__(self, bindings: Mapping[str, HFSet], max_calls: int):
        self.bindings = bindings
        self.memo: Dict[Tuple[PrimTerm, tuple], HFSet] = {}
        self.max_calls = max_calls

    def run(self, t: PrimTerm, args: tuple) -> HFSet:
        if isinstance(t, Proj):
            return args[t.i]
        if isinstance(t, ZeroFn):
            return EMPTY
        if isinstance(t, Adjoin):
            x, y = args
            return x if y in x else canon(x.members + (y,))
        if isinstance(t, Cond):
            x, y, u, v = args
            return x if u in v else y
        if isinstance(t, RudBasic):
            return rud(t.index, *args)
        if isinstance(t, OracleB):
            return beta_oracle(*args)
        if isinstance(t, ConstParam):
            try:
                return self.bindings[t.name]
            except KeyError:
                raise UnboundParameterError(t.name) from None
        if isinstance(t, Comp):
            inner = tuple(self.run(g, args) for g in t.gs)
            return self.run(t.g0, inner)
        if isinstance(t, PrimRec):
            return self.recurse(t, args)
        raise TypeError(f"not a program: {t!r}")

    def recurse(self, t: PrimRec, args: tuple) -> HFSet:
        key = (t, args)
        got = self.memo.get(key)
        if got is not None:
            return got
        x, rest = args[0], args[1:]
        # children first, iteratively over the ∈-structure of x
        stack = [x]
        while stack:
            z = stack[-1]
            pending = [w for w in z if (t, (w,) + rest) not in self.memo]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            k = (t, (z,) + rest)
            if k in self.memo:
                continue
            if len(self.memo) >= self.max_calls:
                raise SizeLimitError(f"more than {self.max_calls} recursive calls")
            acc = union_of(canon(self.memo[(t, (w,) + rest)] for w in z))
            self.memo[k] = self.run(t.h, (acc, z) + rest)
        return self.memo[key]


def eval_prim(t: PrimTerm, args: Sequence[HFSet], bindings: Optional[Mapping[str, HFSet]] = None) -> HFSet:
    """Value of the program ``t`` at ``args``; constants come from ``bindings``."""
    n = arity(t)
    if n is not None and n != len(args):
        raise ArityError(f"program takes {n} arguments, {len(args)} given")
    ev = _Evaluator(bindings or {}, get_limits()["max_nodes"])
    return ev.run(t, tuple(args))


# -- a small library of derived programs ------------------------------------------------------


def _p(i: int, n: int) -> Proj:
    return Proj(i, n)


def union_term() -> PrimTerm:
    """x ∪ y = F5(F0(x, y), x)."""
    return Comp(RudBasic(5), (Comp(RudBasic(0), (_p(0, 2), _p(1, 2))), _p(0, 2)))


def union_image(g: PrimTerm, m: int) -> PrimTerm:
    """f(x, ȳ) = ⋃{g(z, ȳ) : z ∈ x} for g of arity 1 + m.

    Recursion on w with x as an extra parameter collects g(w, ȳ) for every
    w ∈ TC(x) ∪ {x} that is a member of x, which are exactly the members of x.
    """
    n = 3 + m  # (U, w, x, ȳ)
    ys = tuple(_p(3 + k, n) for k in range(m))
    g_w = Comp(g, (_p(1, n),) + ys)
    step = Comp(union_term(), (_p(0, n), Comp(COND, (g_w, ZeroFn(n), _p(1, n), _p(2, n)))))
    d = PrimRec(step)  # arity 2 + m: (w, x, ȳ)
    outer = tuple(_p(1 + k, 1 + m) for k in range(m))
    return Comp(d, (_p(0, 1 + m), _p(0, 1 + m)) + outer)


def tc_program() -> PrimTerm:
    """TC(x) = ⋃{TC(y) : y ∈ x} ∪ x."""
    return PrimRec(union_term())


def _singleton(arg: PrimTerm, n: int) -> PrimTerm:
    return Comp(ADJOIN, (ZeroFn(n), arg))


def _step_f() -> PrimTerm:
    """f(A, x) = A ∪ {u ∪ {v} : u ∈ A ∧ v ∈ x}."""
    # inner(v, u) = {u ∪ {v}}
    inner = _singleton(Comp(ADJOIN, (_p(1, 2), _p(0, 2))), 2)
    # row(u, x) = ⋃{{u ∪ {v}} : v ∈ x}
    row = Comp(union_image(inner, 1), (_p(1, 2), _p(0, 2)))
    grow = union_image(row, 1)  # grow(A, x)
    return Comp(union_term(), (_p(0, 2), grow))


def pfin_program() -> PrimTerm:
    """P_fin(x) = h(x, {∅}, ω) with h(x, y, z) = f(y ∪ ⋃{h(x, y, w) : w ∈ z}, x).

    Recursion runs on z, so the program recurses on its first argument and
    reorders: H(z, x, y) = h(x, y, z).
    """
    n = 4  # (U, z, x, y)
    step = Comp(_step_f(), (Comp(union_term(), (_p(3, n), _p(0, n))), _p(2, n)))
    h = PrimRec(step)
    one = _singleton(ZeroFn(1), 1)
    return Comp(h, (ConstParam("omega"), _p(0, 1), one))


def rank_graph_program() -> PrimTerm:
    """x ↦ B(TC({x}), {⟨u, v⟩ : v ∈ TC({x}), u ∈ TC(v)}), the graph of the rank function."""
    tc = tc_program()
    closure = Comp(tc, (_singleton(_p(0, 1), 1),))
    below = Comp(RudBasic(2), (Comp(tc, (_p(0, 1),)), _singleton(_p(0, 1), 1)))
    rel = Comp(union_image(below, 0), (closure,))
    return Comp(ORACLE_B, (closure, rel))


class PartialPowersetWarning(UserWarning):
    pass


def tc_rud(x: HFSet) -> HFSet:
    return eval_prim(tc_program(), [x])


def pfin_prim(x: HFSet, n: int) -> HFSet:
    """P_fin(x) with ω bound to the ordinal n; partial (and warned) when n < |x|."""
    if n < len(x):
        warnings.warn(
            f"ω truncated to {n} < |x| = {len(x)}: result is only part of the powerset",
            PartialPowersetWarning,
            stacklevel=2,
        )
    return eval_prim(pfin_program(), [x], {"omega": von_neumann(n)})


def rank_via_beta(x: HFSet) -> HFSet:
    return eval_prim(rank_graph_program(), [x])


# -- s-expression syntax ------------------------------------------------------------------------


class PrimSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


_TOK = re.compile(r"\s*(?:(\()|(\))|([A-Za-z_][\w-]*)|(\d+))")


def parse_program(text: str) -> PrimTerm:
    """``(proj i n)``, ``(zero n)``, ``adjoin``, ``cond``, ``(comp g0 g1 …)``,
    ``(primrec h)``, ``(rud i)``, ``oracle-b``, ``(const name)``."""
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos < len(text) and text[pos] == ";":
            while pos < len(text) and text[pos] != "\n":
                pos += 1
            continue
        if pos >= len(text):
            break
        m = _TOK.match(text, pos)
        if not m:
            raise PrimSyntaxError(f"unexpected character {text[pos]!r}", pos)
        toks.append((m.lastindex, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    i = 0

    def need(kind: int, what: str):
        nonlocal i
        if i >= len(toks) or toks[i][0] != kind:
            raise PrimSyntaxError(f"expected {what}", toks[i][2] if i < len(toks) else len(text))
        i += 1
        return toks[i - 1][1]

    def num() -> int:
        return int(need(4, "a number"))

    def term() -> PrimTerm:
        nonlocal i
        if i >= len(toks):
            raise PrimSyntaxError("unexpected end of program", len(text))
        kind, val, at = toks[i]
        if kind == 3:
            i += 1
            simple = {"adjoin": ADJOIN, "cond": COND, "oracle-b": ORACLE_B}
            if val not in simple:
                raise PrimSyntaxError(f"unknown program {val!r}", at)
            return simple[val]
        need(1, "'('")
        head = need(3, "a keyword")
        if head == "proj":
            out: PrimTerm = Proj(num(), num())
        elif head == "zero":
            out = ZeroFn(num())
        elif head == "rud":
            out = RudBasic(num())
        elif head == "const":
            out = ConstParam(need(3, "a parameter name"))
        elif head == "primrec":
            out = PrimRec(term())
        elif head == "comp":
            g0 = term()
            gs = []
            while i < len(toks) and toks[i][0] != 2:
                gs.append(term())
            out = Comp(g0, tuple(gs))
        else:
            raise PrimSyntaxError(f"unknown form {head!r}", at)
        need(2, "')'")
        return out

    result = term()
    if i != len(toks):
        raise PrimSyntaxError("trailing input", toks[i][2])
    arity(result)
    return result


def format_program(t: PrimTerm) -> str:
    if isinstance(t, Proj):
        return f"(proj {t.i} {t.n})"
    if isinstance(t, ZeroFn):
        return f"(zero {t.n})"
    if isinstance(t, Adjoin):
        return "adjoin"
    if isinstance(t, Cond):
        return "cond"
    if isinstance(t, OracleB):
        return "oracle-b"
    if isinstance(t, RudBasic):
        return f"(rud {t.index})"
    if isinstance(t, ConstParam):
        return f"(const {t.name})"
    if isinstance(t, PrimRec):
        return f"(primrec {format_program(t.h)})"
    return "(comp " + " ".join(format_program(g) for g in (t.g0,) + t.gs) + ")"
