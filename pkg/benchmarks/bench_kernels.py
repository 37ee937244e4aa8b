"""Time the compiled kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the best of N runs per backend and checks that both
backends returned the same answer.
"""
import argparse
import random
import time

import numpy as np

from collapse_lab import _kernels_py
from collapse_lab.bisim import tree_csr
from collapse_lab.games import all_games, exhaustive_solve
from collapse_lab.samples import random_tree
from collapse_lab.veblen import VeblenSystem, enumerate_terms, finite_ordinal, leq_matrix
import collapse_lab.games as games_mod
import collapse_lab.veblen as veblen_mod

try:
    from collapse_lab import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bisim_case(impl, size):
    t = random_tree(random.Random(size), size)
    _, indptr, indices = tree_csr(t)
    return lambda: impl.bisimulation_fixpoint(indptr, indices)


def games_case(impl, max_nodes):
    games = list(all_games(max_nodes))

    def run():
        games_mod.exhaustive_winner = impl.exhaustive_winner
        return [exhaustive_solve(g) for g in games]

    return run


def veblen_case(impl, alpha, k, size):
    sys_ = VeblenSystem(alpha, finite_ordinal(k))
    terms = enumerate_terms(sys_, size)

    def run():
        veblen_mod.veblen_leq_matrix = impl.veblen_leq_matrix
        return leq_matrix(terms, sys_)

    return run


CASES = [
    ("bisimulation fixpoint, tree of 150 nodes", lambda impl: bisim_case(impl, 150)),
    ("bisimulation fixpoint, tree of 400 nodes", lambda impl: bisim_case(impl, 400)),
    ("exhaustive game search, all games <= 10 nodes", lambda impl: games_case(impl, 10)),
    ("Veblen leq matrix, alpha=2, k=2, size <= 5", lambda impl: veblen_case(impl, 2, 2, 5)),
    ("Veblen leq matrix, alpha=2, k=3, size <= 6", lambda impl: veblen_case(impl, 2, 3, 6)),
]


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a.astype(bool), b.astype(bool))
    return a == b


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernels not built; run `python3 setup.py build_ext --inplace` first")
    print(f"{'case':<48} {'cython s':>10} {'python s':>10} {'speedup':>8}  agree")
    for name, make in CASES:
        slow_t, slow_out = best_of(make(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:<48} {'-':>10} {slow_t:>10.4f} {'-':>8}  -")
            continue
        fast_t, fast_out = best_of(make(compiled), args.repeat)
        print(f"{name:<48} {fast_t:>10.4f} {slow_t:>10.4f} {slow_t / fast_t:>7.1f}x  {same(fast_out, slow_out)}")


if __name__ == "__main__":
    main()
