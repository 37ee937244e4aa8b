"""The relativized Veblen notation system O(α, Λ) and an ordinal-arithmetic oracle.

Terms are ``Zero``, ``PhiTop(x)`` for φ(α, x) with x ∈ Λ, ``PhiLow(β, t)``
for φ(β, t) with β < α, and ``Sum`` of at least two summands that are
neither sums nor zero.  Levels are natural numbers.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .collapse import CarrierRelation, collapse
from .kernels import veblen_leq_matrix

__all__ = [
    "QuasiOrder",
    "finite_ordinal",
    "reversed_naturals",
    "VeblenSystem",
    "Zero",
    "ZERO",
    "PhiTop",
    "PhiLow",
    "Sum",
    "VTerm",
    "VeblenSyntaxError",
    "NotInSystemError",
    "parse_term",
    "format_term",
    "term_size",
    "make_sum",
    "h_lambda",
    "in_system",
    "leq",
    "lt",
    "equiv",
    "enumerate_terms",
    "leq_matrix",
    "value",
    "VNF",
    "VNF_ZERO",
    "VNF_ONE",
    "vnf_nat",
    "vnf_compare",
    "vnf_add",
    "vnf_phi",
    "vnf_format",
    "normal_form0",
    "from_normal_form0",
    "Insufficient",
    "Descent",
    "NotDescendingError",
    "descending_transfer",
    "RestrictionReport",
    "restrict_iso",
    "order_collapse",
]


# -- parameter orders ------------------------------------------------------------------


class QuasiOrder:
    """A reflexive, transitive, total preorder given by ``leq``.

    ``elements`` is a tuple for finite orders and ``None`` for lazily
    queried infinite ones.
    """

    def __init__(self, leq: Callable[[Hashable, Hashable], bool], elements: Optional[Sequence] = None, name: str = ""):
        self._leq = leq
        self.elements = tuple(elements) if elements is not None else None
        self.name = name

    def leq(self, x, y) -> bool:
        return bool(self._leq(x, y))

    def lt(self, x, y) -> bool:
        return self.leq(x, y) and not self.leq(y, x)

    def equiv(self, x, y) -> bool:
        return self.leq(x, y) and self.leq(y, x)

    def __contains__(self, x) -> bool:
        return self.elements is None or x in self.elements

    def restrict_below(self, x) -> "QuasiOrder":
        """Λ|_{<x} (finite orders only)."""
        if self.elements is None:
            raise ValueError("restriction needs a finite order")
        return QuasiOrder(self._leq, [y for y in self.elements if self.lt(y, x)], f"{self.name}|<{x!r}")

    def check_laws(self, sample: Optional[Iterable] = None) -> bool:
        pts = list(sample if sample is not None else self.elements or ())
        for x in pts:
            if not self.leq(x, x):
                return False
            for y in pts:
                if not (self.leq(x, y) or self.leq(y, x)):
                    return False
                for z in pts:
                    if self.leq(x, y) and self.leq(y, z) and not self.leq(x, z):
                        return False
        return True

    def __repr__(self) -> str:
        return f"QuasiOrder({self.name or '?'})"


def _nat_leq(x, y):
    return x <= y


def _rev_leq(x, y):
    return x >= y


def finite_ordinal(k: int) -> QuasiOrder:
    """The ordinal k = {0, …, k−1} with its usual order."""
    return QuasiOrder(_nat_leq, range(k), str(k))


def reversed_naturals() -> QuasiOrder:
    """ℕ ordered by ≥: an infinite order with the descent 0 > 1 > 2 > …."""
    return QuasiOrder(_rev_leq, None, "ℕ*")


@dataclass(frozen=True, eq=False)
class VeblenSystem:
    alpha: int
    order: QuasiOrder

    def __post_init__(self):
        object.__setattr__(self, "_memo", {})


# -- terms ------------------------------------------------------------------------------


class VTerm:
    __slots__ = ()

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Zero(VTerm):
    pass


ZERO = Zero()


@dataclass(frozen=True)
class PhiTop(VTerm):
    x: Hashable


@dataclass(frozen=True)
class PhiLow(VTerm):
    beta: int
    t: VTerm


@dataclass(frozen=True)
class Sum(VTerm):
    terms: Tuple[VTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) < 2:
            raise ValueError("a sum has at least two summands")
        for t in self.terms:
            if isinstance(t, (Sum, Zero)):
                raise ValueError("summands may not be sums or zero")


def make_sum(terms: Sequence[VTerm]) -> VTerm:
    """Flatten nested sums and drop zeros; 0 or 1 summand give the term itself."""
    flat: List[VTerm] = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        elif not isinstance(t, Zero):
            flat.append(t)
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def _summands(t: VTerm) -> Tuple[VTerm, ...]:
    if isinstance(t, Sum):
        return t.terms
    if isinstance(t, Zero):
        return ()
    return (t,)


def term_size(t: VTerm) -> int:
    """Constructor count: 0 and φ(α,x) have size 1."""
    if isinstance(t, (Zero, PhiTop)):
        return 1
    if isinstance(t, PhiLow):
        return 1 + term_size(t.t)
    return 1 + sum(term_size(u) for u in t.terms)


def in_system(t: VTerm, sys: VeblenSystem) -> bool:
    if isinstance(t, Zero):
        return True
    if isinstance(t, PhiTop):
        return t.x in sys.order
    if isinstance(t, PhiLow):
        return 0 <= t.beta < sys.alpha and in_system(t.t, sys)
    return all(in_system(u, sys) for u in t.terms)


class NotInSystemError(ValueError):
    pass


# -- text syntax -------------------------------------------------------------------------


class VeblenSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


_TOKEN = re.compile(r"\s*(?:(phi)|(\d+)|('[^']*')|([(),+])|(T))")


def _tokens(text: str) -> List[Tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            return out
        m = _TOKEN.match(text, pos)
        if not m:
            raise VeblenSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        kind = ("phi", "num", "elem", "punct", "top")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()


def _elem_from_text(raw: str):
    inner = raw[1:-1]
    return int(inner) if inner.isdigit() else inner


def parse_term(text: str) -> VTerm:
    """Parse ``0 | phi(<level>|T, <arg>) | t + t + …`` (Λ-elements quoted)."""
    toks = _tokens(text)
    i = 0

    def peek():
        return toks[i] if i < len(toks) else ("eof", "", len(text))

    def expect(value):
        nonlocal i
        tok = peek()
        if tok[1] != value:
            raise VeblenSyntaxError(f"expected {value!r}", tok[2])
        i += 1

    def atom() -> VTerm:
        nonlocal i
        kind, val, pos = peek()
        if kind == "num" and val == "0":
            i += 1
            return ZERO
        if kind != "phi":
            raise VeblenSyntaxError("expected 0 or phi(", pos)
        i += 1
        expect("(")
        kind, val, pos = peek()
        if kind == "top":
            i += 1
            expect(",")
            kind, val, pos = peek()
            if kind != "elem":
                raise VeblenSyntaxError("expected a quoted Λ-element", pos)
            i += 1
            expect(")")
            return PhiTop(_elem_from_text(val))
        if kind != "num":
            raise VeblenSyntaxError("expected a level or T", pos)
        i += 1
        expect(",")
        arg = term()
        expect(")")
        return PhiLow(int(val), arg)

    def term() -> VTerm:
        nonlocal i
        start = peek()[2]
        parts = [atom()]
        while peek()[1] == "+":
            i += 1
            parts.append(atom())
        if len(parts) == 1:
            return parts[0]
        if any(isinstance(p, Zero) for p in parts):
            raise VeblenSyntaxError("0 cannot be a summand", start)
        return Sum(tuple(parts))

    result = term()
    if i != len(toks):
        raise VeblenSyntaxError("trailing input", toks[i][2])
    return result


def format_term(t: VTerm) -> str:
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, PhiTop):
        return f"phi(T, '{t.x}')"
    if isinstance(t, PhiLow):
        return f"phi({t.beta}, {format_term(t.t)})"
    return " + ".join(format_term(u) for u in t.terms)


# -- comparison ------------------------------------------------------------------------------


def h_lambda(t: VTerm, order: QuasiOrder):
    """The ≤_Λ-largest x with φ(α, x) occurring in t, or ``None``."""
    best = None
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, PhiTop):
            if best is None or order.lt(best, u.x):
                best = u.x
        elif isinstance(u, PhiLow):
            stack.append(u.t)
        elif isinstance(u, Sum):
            stack.extend(u.terms)
    return best


def _leq(t: VTerm, s: VTerm, sys: VeblenSystem) -> bool:
    memo = sys._memo
    key = (t, s)
    got = memo.get(key)
    if got is not None:
        return got
    if isinstance(t, Zero):
        res = True
    elif isinstance(t, PhiTop):
        h = h_lambda(s, sys.order)
        res = h is not None and sys.order.leq(t.x, h)
    elif isinstance(s, Zero):
        res = False
    elif isinstance(t, Sum) or isinstance(s, Sum):
        res = _sum_leq(_summands(t), _summands(s), sys)
    elif isinstance(s, PhiTop):
        # t = φ(β, t0) with β < α: the top level is the larger one
        res = _leq(t.t, s, sys)
    elif t.beta < s.beta:
        res = _leq(t.t, s, sys)
    elif t.beta == s.beta:
        res = _leq(t.t, s.t, sys)
    else:
        res = _leq(t, s.t, sys)
    memo[key] = res
    return res


def _sum_leq(ts: Sequence[VTerm], ss: Sequence[VTerm], sys: VeblenSystem) -> bool:
    # leftmost admissible image for each summand; an equivalent image forces the next one further right
    j = 0
    for t in ts:
        while j < len(ss) and not _leq(t, ss[j], sys):
            j += 1
        if j == len(ss):
            return False
        if _leq(ss[j], t, sys):
            j += 1
    return True


def leq(t: VTerm, s: VTerm, sys: VeblenSystem) -> bool:
    return _leq(t, s, sys)


def lt(t: VTerm, s: VTerm, sys: VeblenSystem) -> bool:
    return _leq(t, s, sys) and not _leq(s, t, sys)


def equiv(t: VTerm, s: VTerm, sys: VeblenSystem) -> bool:
    return _leq(t, s, sys) and _leq(s, t, sys)


# -- enumeration ------------------------------------------------------------------------------


def enumerate_terms(sys: VeblenSystem, max_size: int) -> List[VTerm]:
    """All terms of size ≤ max_size, sorted by size then text (finite Λ only)."""
    if sys.order.elements is None:
        raise ValueError("enumeration needs a finite Λ")
    by_size: Dict[int, List[VTerm]] = {}
    nonsum: Dict[int, List[VTerm]] = {}
    for n in range(1, max_size + 1):
        atoms: List[VTerm] = []
        if n == 1:
            atoms = [ZERO] + [PhiTop(x) for x in sys.order.elements]
        else:
            for beta in range(sys.alpha):
                atoms.extend(PhiLow(beta, u) for u in by_size.get(n - 1, []))
        nonsum[n] = [a for a in atoms if not isinstance(a, Zero)]
        sums = [Sum(parts) for parts in _compositions(nonsum, n - 1)]
        by_size[n] = atoms + sums
    out = [t for n in range(1, max_size + 1) for t in by_size[n]]
    out.sort(key=lambda t: (term_size(t), format_term(t)))
    return out


def _compositions(nonsum: Dict[int, List[VTerm]], total: int) -> Iterator[Tuple[VTerm, ...]]:
    """Sequences of ≥ 2 non-sum non-zero terms with sizes adding up to ``total``."""

    def go(remaining: int, acc: Tuple[VTerm, ...]):
        if remaining == 0:
            if len(acc) >= 2:
                yield acc
            return
        for k in range(1, remaining + 1):
            for t in nonsum.get(k, ()):
                yield from go(remaining - k, acc + (t,))

    yield from go(total, ())


def leq_matrix(terms: Sequence[VTerm], sys: VeblenSystem) -> np.ndarray:
    """M[i, j] = leq(terms[i], terms[j]) for every pair, in one batch.

    ``terms`` must be sorted by size and contain the summands and φ-arguments
    of each of its members (``enumerate_terms`` output qualifies).  Λ must be
    finite.
    """
    if sys.order.elements is None:
        raise ValueError("batch comparison needs a finite Λ")
    elems = sys.order.elements
    eidx = {x: i for i, x in enumerate(elems)}
    pos = {t: i for i, t in enumerate(terms)}
    n = len(terms)
    kind = np.zeros(n, dtype=np.int64)
    arg = np.full(n, -1, dtype=np.int64)
    lvl = np.zeros(n, dtype=np.int64)
    hidx = np.full(n, -1, dtype=np.int64)
    size = np.zeros(n, dtype=np.int64)
    sptr = [0]
    sidx: List[int] = []
    try:
        for i, t in enumerate(terms):
            size[i] = term_size(t)
            if i and size[i] < size[i - 1]:
                raise ValueError("terms must be sorted by size")
            h = h_lambda(t, sys.order)
            hidx[i] = -1 if h is None else eidx[h]
            if isinstance(t, PhiTop):
                kind[i], lvl[i] = 1, eidx[t.x]
            elif isinstance(t, PhiLow):
                kind[i], lvl[i], arg[i] = 2, t.beta, pos[t.t]
            elif isinstance(t, Sum):
                kind[i] = 3
            sidx.extend(pos[u] for u in _summands(t))
            sptr.append(len(sidx))
    except KeyError as exc:
        raise ValueError(f"term list is not closed under subterms: {exc}") from None
    lam = np.array([[sys.order.leq(x, y) for y in elems] for x in elems], dtype=np.uint8).reshape(len(elems), len(elems))
    return veblen_leq_matrix(kind, arg, lvl, hidx, np.asarray(sptr, dtype=np.int64), np.asarray(sidx, dtype=np.int64), size, lam)


# -- ordinals below Γ0 in Veblen normal form ------------------------------------------------------

# An ordinal is a tuple of summands (a, b) standing for φ(a, b), weakly decreasing,
# with b < φ(a, b) for every summand.
VNF = Tuple[Tuple["VNF", "VNF"], ...]
VNF_ZERO: VNF = ()
VNF_ONE: VNF = ((VNF_ZERO, VNF_ZERO),)


def vnf_nat(n: int) -> VNF:
    return VNF_ONE * n


@lru_cache(maxsize=None)
def _cmp_principal(x: tuple, y: tuple) -> int:
    (a, b), (c, d) = x, y
    if x == y:
        return 0
    ac = vnf_compare(a, c)
    if ac == 0:
        return vnf_compare(b, d)
    if ac < 0:
        return -1 if vnf_compare(b, (y,)) < 0 else 1
    return -1 if vnf_compare((x,), d) <= 0 else 1


@lru_cache(maxsize=None)
def vnf_compare(x: VNF, y: VNF) -> int:
    """-1, 0 or 1 as x <, =, > y."""
    for p, q in zip(x, y):
        c = _cmp_principal(p, q)
        if c:
            return c
    return (len(x) > len(y)) - (len(x) < len(y))


def vnf_add(x: VNF, y: VNF) -> VNF:
    if not y:
        return x
    lead = y[0]
    keep = len(x)
    while keep and _cmp_principal(x[keep - 1], lead) < 0:
        keep -= 1
    return x[:keep] + y


def vnf_phi(a: VNF, b: VNF) -> VNF:
    """φ(a, b): b itself when b = φ(c, d) with c > a, otherwise the new summand."""
    if len(b) == 1 and vnf_compare(b[0][0], a) > 0:
        return b
    return ((a, b),)


def vnf_format(x: VNF) -> str:
    if not x:
        return "0"
    parts = []
    for (a, b), grp in itertools.groupby(x):
        k = len(list(grp))
        if not a:
            if not b:
                parts.append(str(k))
                continue
            base = "ω" if b == VNF_ONE else f"ω^({vnf_format(b)})"
        else:
            base = f"φ({vnf_format(a)},{vnf_format(b)})"
        parts.append(base if k == 1 else f"{base}·{k}")
    return "+".join(parts)


def value(t: VTerm, sys: VeblenSystem) -> VNF:
    """The ordinal denoted by t when Λ is a finite ordinal (x ∈ Λ read as the ordinal x)."""
    if isinstance(t, Zero):
        return VNF_ZERO
    if isinstance(t, PhiTop):
        if not isinstance(t.x, int):
            raise NotInSystemError("values need Λ to be a finite ordinal")
        return vnf_phi(vnf_nat(sys.alpha), vnf_nat(t.x))
    if isinstance(t, PhiLow):
        return vnf_phi(vnf_nat(t.beta), value(t.t, sys))
    out = VNF_ZERO
    for u in t.terms:
        out = vnf_add(out, value(u, sys))
    return out


# -- O(0, Λ): normal forms and descending sequences ----------------------------------------------


def normal_form0(t: VTerm, order: QuasiOrder) -> List:
    """The weakly decreasing λ0 ≥ … ≥ λn with t ≡ φ(0,λ0) + … + φ(0,λn)."""
    elems = []
    for u in _summands(t):
        if not isinstance(u, PhiTop):
            raise NotInSystemError(f"{format_term(u)} is not a summand of O(0, Λ)")
        elems.append(u.x)
    kept: List = []
    for x in elems:
        while kept and order.lt(kept[-1], x):
            kept.pop()
        kept.append(x)
    return kept


def from_normal_form0(elems: Sequence) -> VTerm:
    return make_sum([PhiTop(x) for x in elems])


class Insufficient:
    """Returned when the window does not settle which case of the argument applies."""

    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"Insufficient({self.reason!r})"


class NotDescendingError(ValueError):
    pass


class Descent(list):
    """A descending list of Λ-elements; ``case`` is ``"trace"`` or ``"diagonal"``."""

    def __init__(self, items, case: str):
        super().__init__(items)
        self.case = case


_MINUS_INF = object()


def descending_transfer(stream: Iterable[VTerm], lookahead: int, order: QuasiOrder) -> Union[Descent, Insufficient]:
    """Turn a descending sequence of O(0, Λ) into a descending sequence of Λ.

    Reads ``lookahead`` terms.  Coordinate i of a term is the i-th entry of
    its normal form (−∞ past the end).  A coordinate is *settled* when it is
    constant on the second half of the window and *live* when it still
    changes in the last quarter.  If the least unsettled coordinate is live,
    its successive values after the earlier coordinates settle are emitted;
    otherwise the diagonal i ↦ h_i(f(n_i)) over the settled coordinates is.
    """
    sys0 = VeblenSystem(0, order)
    f = list(itertools.islice(stream, lookahead))
    if len(f) < lookahead:
        return Insufficient(f"stream ended after {len(f)} terms")
    for n in range(len(f) - 1):
        if not lt(f[n + 1], f[n], sys0):
            raise NotDescendingError(f"term {n + 1} is not below term {n}")
    n_terms = len(f)
    if n_terms < 4:
        return Insufficient("window too small to separate the cases")
    nfs = [normal_form0(t, order) for t in f]
    width = max(len(x) for x in nfs) + 1

    def coord(i, n):
        return nfs[n][i] if i < len(nfs[n]) else _MINUS_INF

    def same(x, y):
        if x is _MINUS_INF or y is _MINUS_INF:
            return x is y
        return order.equiv(x, y)

    half, quarter = n_terms // 2, n_terms - n_terms // 4
    stable_from = []
    for i in range(width):
        last_change = 0
        for n in range(1, n_terms):
            if not same(coord(i, n), coord(i, n - 1)):
                last_change = n
        stable_from.append(last_change)
    first_open = next((i for i in range(width) if stable_from[i] > half), None)

    if first_open is not None and stable_from[first_open] >= quarter:
        start = max(stable_from[:first_open], default=0)
        out: List = []
        for n in range(start, n_terms):
            x = coord(first_open, n)
            if x is _MINUS_INF:
                break
            if not out or not same(out[-1], x):
                out.append(x)
        result = Descent(out, "trace")
    else:
        limit = first_open if first_open is not None else width
        out = []
        n_prev = -1
        for i in range(limit):
            n_i = max(n_prev + 1, max(stable_from[: i + 1]))
            if n_i >= n_terms:
                break
            x = coord(i, n_i)
            if x is _MINUS_INF:
                break
            if not out or not same(out[-1], x):
                out.append(x)
            n_prev = n_i
        result = Descent(out, "diagonal")
    if len(result) < 2:
        return Insufficient("no descent visible in the window")
    for k in range(len(result) - 1):
        if not order.lt(result[k + 1], result[k]):
            raise NotDescendingError("extracted sequence is not descending")  # pragma: no cover
    return result


# -- restriction below φ(α, x) ---------------------------------------------------------------------


@dataclass
class RestrictionReport:
    below: List[VTerm]
    restricted: List[VTerm]
    same_terms: bool
    order_preserved: bool
    h_below_x: bool

    @property
    def ok(self) -> bool:
        return self.same_terms and self.order_preserved and self.h_below_x


def restrict_iso(sys: VeblenSystem, x, max_size: int = 5) -> RestrictionReport:
    """Compare O(α,Λ) below φ(α,x) with O(α, Λ|<x) on all terms up to ``max_size``."""
    top = PhiTop(x)
    below = [t for t in enumerate_terms(sys, max_size) if lt(t, top, sys)]
    small = VeblenSystem(sys.alpha, sys.order.restrict_below(x))
    restricted = enumerate_terms(small, max_size)
    same = set(below) == set(restricted)
    preserved = all(leq(t, s, sys) == leq(t, s, small) for t in restricted for s in restricted)
    h_ok = all(h is None or sys.order.lt(h, x) for h in (h_lambda(t, sys.order) for t in below))
    return RestrictionReport(below, restricted, same, preserved, h_ok)


def order_collapse(terms: Sequence[VTerm], sys: VeblenSystem) -> Dict[VTerm, object]:
    """Collapse of the strict order on ``terms`` modulo ≡ (von Neumann ordinals)."""
    reps: List[VTerm] = []
    cls: Dict[VTerm, VTerm] = {}
    for t in terms:
        for r in reps:
            if equiv(t, r, sys):
                cls[t] = r
                break
        else:
            reps.append(t)
            cls[t] = t
    edges = [(r, s) for r in reps for s in reps if lt(r, s, sys)]
    pi = collapse(CarrierRelation(reps, edges))
    return {t: pi[cls[t]] for t in terms}
