import random

import numpy as np
import pytest

from collapse_lab import _kernels_py, bisim, games, veblen
from collapse_lab.kernels import BACKEND
from collapse_lab.samples import random_tree

compiled = pytest.importorskip("collapse_lab._kernels", reason="extension not built")


def test_backend_reports_compiled_when_available():
    assert BACKEND == "cython"


def _both(monkeypatch, module, name, call):
    out = []
    for impl in (compiled, _kernels_py):
        monkeypatch.setattr(module, name, getattr(impl, name))
        out.append(call())
    return out


def test_bisimulation_fixpoint_backends_agree(monkeypatch):
    rng = random.Random(1)
    for _ in range(30):
        t = random_tree(rng, rng.randint(1, 80))
        fast, slow = _both(monkeypatch, bisim, "bisimulation_fixpoint", lambda: bisim.maximal_bisimulation(t))
        assert fast == slow


def test_exhaustive_winner_backends_agree(monkeypatch):
    for g in games.all_games(8):
        fast, slow = _both(monkeypatch, games, "exhaustive_winner", lambda: games.exhaustive_solve(g))
        assert fast == slow


@pytest.mark.parametrize("alpha,k", [(0, 3), (1, 2), (2, 2), (3, 1)])
def test_veblen_matrix_backends_agree(monkeypatch, alpha, k):
    sys_ = veblen.VeblenSystem(alpha, veblen.finite_ordinal(k))
    terms = veblen.enumerate_terms(sys_, 5)
    fast, slow = _both(monkeypatch, veblen, "veblen_leq_matrix", lambda: veblen.leq_matrix(terms, sys_))
    assert np.array_equal(fast.astype(bool), slow.astype(bool))
