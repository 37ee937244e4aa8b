"""Hereditarily finite sets with hash-consed canonical representation.

Every :class:`HFSet` is interned: two values are extensionally equal exactly
when they are the same Python object.  Members are stored sorted by a
recursive total order (rank, then cardinality, then lexicographically on the
sorted members), which makes printing and JSON output bit-stable.
"""
from __future__ import annotations

import contextlib
import re
import threading
import weakref
from typing import Iterable, Iterator, Optional

__all__ = [
    "HFSet",
    "SizeLimitError",
    "EMPTY",
    "canon",
    "singleton",
    "pair_set",
    "kuratowski",
    "decode_pair",
    "first",
    "second",
    "tuple_set",
    "union",
    "union_of",
    "difference",
    "intersection",
    "product",
    "transitive_closure",
    "is_transitive",
    "is_ordinal",
    "rank",
    "von_neumann",
    "ordinal_value",
    "finite_powerset",
    "v_level",
    "parse_set",
    "format_set",
    "to_json",
    "from_json",
    "limits",
    "get_limits",
    "table_size",
]


class SizeLimitError(RuntimeError):
    """Raised when a construction would exceed a configured size guard."""


_limits = {"max_nodes": 1_000_000, "v_level": 5}
_table: "weakref.WeakValueDictionary[frozenset, HFSet]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


def get_limits() -> dict:
    return dict(_limits)


@contextlib.contextmanager
def limits(**overrides):
    """Temporarily override size guards (``max_nodes``, ``v_level``)."""
    unknown = set(overrides) - set(_limits)
    if unknown:
        raise KeyError(f"unknown limit(s): {sorted(unknown)}")
    saved = dict(_limits)
    _limits.update({k: v for k, v in overrides.items() if v is not None})
    try:
        yield
    finally:
        _limits.clear()
        _limits.update(saved)


def table_size() -> int:
    """Number of live canonical sets."""
    return len(_table)


class HFSet:
    __slots__ = ("_members", "_mset", "_key", "_rank", "__weakref__")

    _members: tuple
    _key: tuple
    _rank: int

    def __new__(cls, *args, **kwargs):
        raise TypeError("use canon() to build HFSet values")

    # identity is extensional equality, so the default __eq__/__hash__ apply

    def __lt__(self, other: HFSet) -> bool:
        return self._key < other._key

    def __le__(self, other: HFSet) -> bool:
        return self is other or self._key < other._key

    def __gt__(self, other: HFSet) -> bool:
        return other._key < self._key

    def __ge__(self, other: HFSet) -> bool:
        return self is other or other._key < self._key

    def __iter__(self) -> Iterator[HFSet]:
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __bool__(self) -> bool:
        return bool(self._members)

    def __contains__(self, item: object) -> bool:
        if not isinstance(item, HFSet) or item._rank >= self._rank:
            return False
        return item in self._mset

    def _memberset(self) -> frozenset:
        return self._mset

    @property
    def members(self) -> tuple:
        return self._members

    @property
    def rank(self) -> int:
        return self._rank

    @property
    def sort_key(self) -> tuple:
        return self._key

    def issubset(self, other: HFSet) -> bool:
        if len(self) > len(other):
            return False
        others = other._memberset()
        return all(m in others for m in self._members)

    def __repr__(self) -> str:
        return f"HFSet({format_set(self)})"

    def __str__(self) -> str:
        return format_set(self)

    def __reduce__(self):
        return (canon, (list(self._members),))


def _intern(members: frozenset) -> HFSet:
    found = _table.get(members)
    if found is not None:
        return found
    ordered = tuple(sorted(members, key=_sort_key))
    node = object.__new__(HFSet)
    rank = 0
    for m in ordered:
        if m._rank >= rank:
            rank = m._rank + 1
    node._members = ordered
    node._mset = members
    node._rank = rank
    node._key = (rank, len(ordered), tuple(m._key for m in ordered))
    with _lock:
        found = _table.get(members)
        if found is not None:
            return found
        if len(_table) >= _limits["max_nodes"]:
            raise SizeLimitError(
                f"canonical set table exceeded {_limits['max_nodes']} distinct sets"
            )
        _table[members] = node
    return node


def _sort_key(s: HFSet) -> tuple:
    return s._key


def canon(children: Iterable[HFSet]) -> HFSet:
    """Return the canonical set whose members are the given sets."""
    members = frozenset(children)
    for m in members:
        if not isinstance(m, HFSet):
            raise TypeError(f"members must be HFSet, got {type(m).__name__}")
    return _intern(members)


EMPTY = canon(())


def singleton(a: HFSet) -> HFSet:
    return canon((a,))


def pair_set(a: HFSet, b: HFSet) -> HFSet:
    return canon((a, b))


def kuratowski(a: HFSet, b: HFSet) -> HFSet:
    """The Kuratowski pair {{a},{a,b}}."""
    return canon((singleton(a), pair_set(a, b)))


def decode_pair(p: HFSet) -> Optional[tuple]:
    """Inverse of :func:`kuratowski`; ``None`` when ``p`` is not a pair."""
    ms = p._members
    if len(ms) == 1:
        (only,) = ms
        if len(only) == 1:
            a = only._members[0]
            return a, a
        return None
    if len(ms) != 2:
        return None
    small, big = ms
    if len(small) != 1 or len(big) != 2:
        return None
    a = small._members[0]
    if a not in big:
        return None
    b = big._members[0] if big._members[1] is a else big._members[1]
    return a, b


def first(p: HFSet) -> HFSet:
    decoded = decode_pair(p)
    if decoded is None:
        raise ValueError(f"{p} is not a Kuratowski pair")
    return decoded[0]


def second(p: HFSet) -> HFSet:
    decoded = decode_pair(p)
    if decoded is None:
        raise ValueError(f"{p} is not a Kuratowski pair")
    return decoded[1]


def tuple_set(*xs: HFSet) -> HFSet:
    """Right-nested tuple <x0,<x1,...>>; a 1-tuple is the element itself."""
    if not xs:
        raise ValueError("tuple_set needs at least one component")
    out = xs[-1]
    for x in reversed(xs[:-1]):
        out = kuratowski(x, out)
    return out


def union(a: HFSet, b: HFSet) -> HFSet:
    return canon(a._members + b._members)


def union_of(a: HFSet) -> HFSet:
    """The big union of the members of a."""
    return canon(m for x in a for m in x)


def difference(a: HFSet, b: HFSet) -> HFSet:
    drop = b._memberset()
    return canon(m for m in a if m not in drop)


def intersection(a: HFSet, b: HFSet) -> HFSet:
    keep = b._memberset()
    return canon(m for m in a if m in keep)


def product(a: HFSet, b: HFSet) -> HFSet:
    return canon(kuratowski(x, y) for x in a for y in b)


def transitive_closure(a: HFSet) -> HFSet:
    seen: set = set()
    stack = list(a._members)
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(x._members)
    return canon(seen)


def is_transitive(a: HFSet) -> bool:
    ms = a._memberset()
    return all(y in ms for x in a for y in x)


def is_ordinal(a: HFSet) -> bool:
    return is_transitive(a) and all(is_transitive(x) for x in a)


def rank(a: HFSet) -> int:
    return a._rank


_ordinals: list = [EMPTY]


def von_neumann(n: int) -> HFSet:
    if n < 0:
        raise ValueError("von_neumann needs a natural number")
    while len(_ordinals) <= n:
        prev = _ordinals[-1]
        _ordinals.append(canon(prev._members + (prev,)))
    return _ordinals[n]


def ordinal_value(a: HFSet) -> Optional[int]:
    """n when a is the n-th von Neumann ordinal, else None."""
    n = len(a)
    return n if von_neumann(n) is a else None


def finite_powerset(a: HFSet) -> HFSet:
    """The set of all subsets of a (all of them are finite)."""
    if 2 ** len(a) > _limits["max_nodes"]:
        raise SizeLimitError(f"powerset of a {len(a)}-element set exceeds the node ceiling")
    subsets = [()]
    for m in a._members:
        subsets += [s + (m,) for s in subsets]
    return canon(canon(s) for s in subsets)


def v_level(n: int) -> HFSet:
    """V_n, obtained by iterating the full powerset n times from the empty set."""
    if n > _limits["v_level"]:
        raise SizeLimitError(f"v_level({n}) exceeds the configured bound {_limits['v_level']}")
    level = EMPTY
    for _ in range(n):
        level = finite_powerset(level)
    return level


# -- s-expression syntax -----------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\{)|(\})|#(\d+)|(,))")


class SetSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def parse_set(text: str) -> HFSet:
    """Parse ``{}``, ``{a b c}`` and ``#n`` (von Neumann n); commas are optional."""
    value, pos = _parse_set_at(text, 0)
    rest = text[pos:].strip()
    if rest:
        raise SetSyntaxError(f"trailing input {rest[:10]!r}", pos)
    return value


def parse_set_prefix(text: str, pos: int) -> tuple:
    """Parse one set starting at ``pos``; returns (value, new position)."""
    return _parse_set_at(text, pos)


def _parse_set_at(text: str, pos: int):
    stack: list = []
    result = None
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            raise SetSyntaxError("expected '{', '}' or '#n'", _skip_ws(text, pos))
        pos = m.end()
        if m.group(1):
            stack.append([])
            continue
        if m.group(4):
            if not stack:
                raise SetSyntaxError("unexpected ','", m.start(4))
            continue
        if m.group(2):
            if not stack:
                raise SetSyntaxError("unbalanced '}'", m.start(2))
            value = canon(stack.pop())
        else:
            value = von_neumann(int(m.group(3)))
        if stack:
            stack[-1].append(value)
        else:
            result = value
            break
    return result, pos


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def format_set(a: HFSet) -> str:
    memo: dict = {}

    def go(x: HFSet) -> str:
        out = memo.get(x)
        if out is None:
            out = "{" + " ".join(go(m) for m in x._members) + "}"
            memo[x] = out
        return out

    return go(a)


def to_json(a: HFSet):
    """Nested-list form in canonical member order."""
    return [to_json(m) for m in a._members]


def from_json(data) -> HFSet:
    if not isinstance(data, list):
        raise ValueError("a set in JSON form is a (nested) list")
    return canon(from_json(x) for x in data)
