"""Matching of point sets on the circle and in the plane."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def optimal_assignment(cost: np.ndarray) -> np.ndarray:
    """Column index assigned to each row minimizing the total cost."""
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(cost.shape[0], dtype=int)
    out[rows] = cols
    return out


def match_points(a, b) -> np.ndarray:
    """Permutation ``perm`` with ``b[perm]`` closest to ``a`` (complex distance)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"point sets differ in size: {a.shape} vs {b.shape}")
    return optimal_assignment(np.abs(a[:, None] - b[None, :]))


def circular_match_error(a, b) -> float:
    """Largest distance after optimal matching of two equally sized point sets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return float("inf")
    perm = match_points(a, b)
    return float(np.max(np.abs(a - b[perm]))) if a.size else 0.0
