"""Bounded weighted edit distance for strings, trees and Dyck words via kernels."""

from __future__ import annotations

from ._jit import backend
from .core import INF, SCALE, Alphabet, WeightTable, clip, format_cost, parse_cost

__all__ = ["INF", "SCALE", "Alphabet", "WeightTable", "backend", "clip", "format_cost", "parse_cost"]
__version__ = "0.1.0"
