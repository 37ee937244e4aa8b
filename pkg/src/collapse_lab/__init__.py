"""Finite-scale computations around collapse, bisimulation, truth trees and notations."""

from .hf import EMPTY, HFSet, SizeLimitError, canon, kuratowski, parse_set, von_neumann
from .trees import FiniteTree

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "HFSet",
    "SizeLimitError",
    "canon",
    "kuratowski",
    "parse_set",
    "von_neumann",
    "FiniteTree",
]
