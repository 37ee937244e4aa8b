# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: bisimulation fixpoint, exhaustive strategy enumeration, notation comparison."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def bisimulation_fixpoint(indptr, indices):
    cdef cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ptr.shape[0] - 1
    if n <= 0:
        return np.zeros((0, 0), dtype=np.uint8)
    out = np.zeros((n, n), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] rel = out
    cdef Py_ssize_t i, j, a, b
    cdef bint changed = True, ok, found
    for i in range(n):
        for j in range(n):
            rel[i, j] = (ptr[i + 1] == ptr[i]) == (ptr[j + 1] == ptr[j])
    while changed:
        changed = False
        for i in range(n):
            for j in range(i, n):
                if not rel[i, j]:
                    continue
                ok = True
                for a in range(ptr[i], ptr[i + 1]):
                    found = False
                    for b in range(ptr[j], ptr[j + 1]):
                        if rel[idx[a], idx[b]]:
                            found = True
                            break
                    if not found:
                        ok = False
                        break
                if ok:
                    for b in range(ptr[j], ptr[j + 1]):
                        found = False
                        for a in range(ptr[i], ptr[i + 1]):
                            if rel[idx[a], idx[b]]:
                                found = True
                                break
                        if not found:
                            ok = False
                            break
                if not ok:
                    rel[i, j] = 0
                    rel[j, i] = 0
                    changed = True
    return out


cdef bint _first_wins(cnp.int64_t* ptr, cnp.int64_t* idx, cnp.int64_t* depth,
                      cnp.int64_t* slot, cnp.int64_t* cI, cnp.int64_t* cII) nogil:
    cdef cnp.int64_t v = 0
    while ptr[v + 1] > ptr[v]:
        if depth[v] % 2 == 0:
            v = idx[ptr[v] + cI[slot[v]]]
        else:
            v = idx[ptr[v] + cII[slot[v]]]
    return depth[v] % 2 == 1


cdef bint _advance(cnp.int64_t* choice, cnp.int64_t* radix, Py_ssize_t m) nogil:
    cdef Py_ssize_t i = 0
    while i < m:
        choice[i] += 1
        if choice[i] < radix[i]:
            return True
        choice[i] = 0
        i += 1
    return False


def exhaustive_winner(indptr, indices, depth):
    cdef cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.int64_t[::1] dep = np.ascontiguousarray(depth, dtype=np.int64)
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t v, mI = 0, mII = 0
    slot_arr = np.full(n, -1, dtype=np.int64)
    radI_arr = np.zeros(n + 1, dtype=np.int64)
    radII_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] slot = slot_arr
    cdef cnp.int64_t[::1] radI = radI_arr
    cdef cnp.int64_t[::1] radII = radII_arr
    for v in range(n):
        if ptr[v + 1] > ptr[v]:
            if dep[v] % 2 == 0:
                slot[v] = mI
                radI[mI] = ptr[v + 1] - ptr[v]
                mI += 1
            else:
                slot[v] = mII
                radII[mII] = ptr[v + 1] - ptr[v]
                mII += 1
    cI_arr = np.zeros(n + 1, dtype=np.int64)
    cII_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cI = cI_arr
    cdef cnp.int64_t[::1] cII = cII_arr
    cdef bint i_wins = False, ii_wins = False, all_win, any_win
    with nogil:
        # exists sI forall sII: I wins
        while True:
            all_win = True
            cII[:] = 0
            while True:
                if not _first_wins(&ptr[0], &idx[0], &dep[0], &slot[0], &cI[0], &cII[0]):
                    all_win = False
                    break
                if not _advance(&cII[0], &radII[0], mII):
                    break
            if all_win:
                i_wins = True
                break
            if not _advance(&cI[0], &radI[0], mI):
                break
        cI[:] = 0
        cII[:] = 0
        while True:
            any_win = False
            cI[:] = 0
            while True:
                if _first_wins(&ptr[0], &idx[0], &dep[0], &slot[0], &cI[0], &cII[0]):
                    any_win = True
                    break
                if not _advance(&cI[0], &radI[0], mI):
                    break
            if not any_win:
                ii_wins = True
                break
            if not _advance(&cII[0], &radII[0], mII):
                break
    return bool(i_wins), bool(ii_wins)


def veblen_leq_matrix(kind, arg, lvl, hidx, sptr, sidx, size, lam):
    """All-pairs ≤ on a subterm-closed list of notation terms.

    kind: 0 zero, 1 top-level φ, 2 lower φ, 3 sum.  lvl holds the level of a
    lower φ or the Λ-index of a top one; hidx the Λ-index of h(t) or −1.
    sptr/sidx list each term's summands.  Pairs are filled in order of total
    size, so every pair a rule consults is already known.
    """
    cdef cnp.int64_t[::1] k = np.ascontiguousarray(kind, dtype=np.int64)
    cdef cnp.int64_t[::1] ar = np.ascontiguousarray(arg, dtype=np.int64)
    cdef cnp.int64_t[::1] lv = np.ascontiguousarray(lvl, dtype=np.int64)
    cdef cnp.int64_t[::1] hi = np.ascontiguousarray(hidx, dtype=np.int64)
    cdef cnp.int64_t[::1] sp = np.ascontiguousarray(sptr, dtype=np.int64)
    cdef cnp.int64_t[::1] si = np.ascontiguousarray(sidx, dtype=np.int64)
    cdef cnp.int64_t[::1] sz = np.ascontiguousarray(size, dtype=np.int64)
    cdef cnp.uint8_t[:, ::1] lm = np.ascontiguousarray(lam, dtype=np.uint8)
    cdef Py_ssize_t n = k.shape[0]
    out = np.zeros((n, n), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] T = out
    cdef Py_ssize_t maxs = 0, i, j, total, sj, p, q, qend
    cdef cnp.uint8_t res
    for i in range(n):
        if sz[i] > maxs:
            maxs = sz[i]
    start_arr = np.zeros(maxs + 2, dtype=np.int64)
    cdef cnp.int64_t[::1] start = start_arr
    for i in range(n):
        start[sz[i] + 1] = i + 1
    for p in range(1, maxs + 2):
        if start[p] < start[p - 1]:
            start[p] = start[p - 1]
    with nogil:
        for total in range(2, 2 * maxs + 1):
            for i in range(n):
                sj = total - sz[i]
                if sj < 1 or sj > maxs:
                    continue
                for j in range(start[sj], start[sj + 1]):
                    if k[i] == 0:
                        res = 1
                    elif k[i] == 1:
                        res = hi[j] >= 0 and lm[lv[i], hi[j]]
                    elif k[j] == 0:
                        res = 0
                    elif k[i] == 3 or k[j] == 3:
                        res = 1
                        q = sp[j]
                        qend = sp[j + 1]
                        for p in range(sp[i], sp[i + 1]):
                            while q < qend and not T[si[p], si[q]]:
                                q += 1
                            if q == qend:
                                res = 0
                                break
                            if T[si[q], si[p]]:
                                q += 1
                    elif k[j] == 1:
                        res = T[ar[i], j]
                    elif lv[i] < lv[j]:
                        res = T[ar[i], j]
                    elif lv[i] == lv[j]:
                        res = T[ar[i], ar[j]]
                    else:
                        res = T[i, ar[j]]
                    T[i, j] = res
    return out
