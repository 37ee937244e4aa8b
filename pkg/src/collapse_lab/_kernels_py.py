"""Pure-Python/numpy versions of the compiled kernels (same signatures)."""
from __future__ import annotations

import numpy as np


def bisimulation_fixpoint(indptr, indices) -> np.ndarray:
    """Greatest forth-and-back fixpoint on a finite graph given in CSR form.

    Node i has successors ``indices[indptr[i]:indptr[i+1]]``.  Returns an
    n×n uint8 matrix.  Starts from "same terminal status" and refines.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    n = len(indptr) - 1
    if n <= 0:
        return np.zeros((0, 0), dtype=np.uint8)
    adj = np.zeros((n, n), dtype=np.int64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    adj[rows, indices] = 1
    terminal = np.diff(indptr) == 0
    rel = (terminal[:, None] == terminal[None, :]).astype(np.int64)
    while True:
        # matched[c, j]: some successor d of j has rel[c, d]
        matched = (rel @ adj.T) > 0
        # forth fails at (i, j) when a successor of i is unmatched under j
        fail = (adj @ (~matched).astype(np.int64)) > 0
        new = rel & ~fail & ~fail.T
        if np.array_equal(new, rel):
            return rel.astype(np.uint8)
        rel = new.astype(np.int64)


def _owned(indptr, depth):
    n = len(indptr) - 1
    slot = [-1] * n
    radix = ([], [])
    for v in range(n):
        k = indptr[v + 1] - indptr[v]
        if k:
            p = depth[v] & 1
            slot[v] = len(radix[p])
            radix[p].append(k)
    return slot, radix


def _strategies(radix):
    choice = [0] * len(radix)
    while True:
        yield choice
        i = 0
        while i < len(radix):
            choice[i] += 1
            if choice[i] < radix[i]:
                break
            choice[i] = 0
            i += 1
        else:
            return


def _first_wins(indptr, indices, depth, slot, cI, cII) -> bool:
    v = 0
    while indptr[v + 1] > indptr[v]:
        c = cI if depth[v] % 2 == 0 else cII
        v = indices[indptr[v] + c[slot[v]]]
    return depth[v] % 2 == 1


def exhaustive_winner(indptr, indices, depth) -> tuple:
    """(I has a winning strategy, II has one), by enumerating all strategy pairs."""
    indptr = [int(x) for x in indptr]
    indices = [int(x) for x in indices]
    depth = [int(x) for x in depth]
    slot, (radI, radII) = _owned(indptr, depth)
    i_wins = False
    for cI in _strategies(radI):
        if all(_first_wins(indptr, indices, depth, slot, cI, cII) for cII in _strategies(radII)):
            i_wins = True
            break
    ii_wins = False
    for cII in _strategies(radII):
        if not any(_first_wins(indptr, indices, depth, slot, cI, cII) for cI in _strategies(radI)):
            ii_wins = True
            break
    return i_wins, ii_wins


def veblen_leq_matrix(kind, arg, lvl, hidx, sptr, sidx, size, lam) -> np.ndarray:
    """All-pairs ≤ on a subterm-closed term list, filled by increasing total size."""
    kind, arg, lvl, hidx, sptr, sidx, size = (
        [int(x) for x in a] for a in (kind, arg, lvl, hidx, sptr, sidx, size)
    )
    lam = np.asarray(lam, dtype=bool)
    n = len(kind)
    out = np.zeros((n, n), dtype=np.uint8)
    by_size: dict = {}
    for i, s in enumerate(size):
        by_size.setdefault(s, []).append(i)
    maxs = max(size, default=0)
    for total in range(2, 2 * maxs + 1):
        for i in range(n):
            for j in by_size.get(total - size[i], ()):
                ki, kj = kind[i], kind[j]
                if ki == 0:
                    res = True
                elif ki == 1:
                    res = hidx[j] >= 0 and bool(lam[lvl[i], hidx[j]])
                elif kj == 0:
                    res = False
                elif ki == 3 or kj == 3:
                    res = True
                    q, qend = sptr[j], sptr[j + 1]
                    for p in range(sptr[i], sptr[i + 1]):
                        while q < qend and not out[sidx[p], sidx[q]]:
                            q += 1
                        if q == qend:
                            res = False
                            break
                        if out[sidx[q], sidx[p]]:
                            q += 1
                elif kj == 1 or lvl[i] < lvl[j]:
                    res = out[arg[i], j]
                elif lvl[i] == lvl[j]:
                    res = out[arg[i], arg[j]]
                else:
                    res = out[i, arg[j]]
                out[i, j] = res
    return out
