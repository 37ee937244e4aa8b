"""Select the compiled kernels when the extension was built, else the fallback."""
from __future__ import annotations

try:
    from ._kernels import bisimulation_fixpoint, exhaustive_winner, veblen_leq_matrix

    BACKEND = "cython"
except ImportError:  # extension not built
    from ._kernels_py import bisimulation_fixpoint, exhaustive_winner, veblen_leq_matrix

    BACKEND = "python"

__all__ = ["bisimulation_fixpoint", "exhaustive_winner", "veblen_leq_matrix", "BACKEND"]
