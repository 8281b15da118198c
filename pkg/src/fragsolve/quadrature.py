"""Fixed-order Gauss rules used throughout the package.

All rules have a fixed number of nodes so repeated runs are bit-for-bit
deterministic.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

NODES_PER_CELL = 16


@lru_cache(maxsize=None)
def gauss_legendre(n: int = NODES_PER_CELL) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=256)
def gauss_jacobi_left(n: int, exponent: float) -> tuple[np.ndarray, np.ndarray]:
    """Rule on [0, 1] for the weight ``s**exponent`` (exponent > -1)."""
    x, w = roots_jacobi(n, 0.0, exponent)
    s = 0.5 * (x + 1.0)
    w = w * 0.5 ** (exponent + 1.0)
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w


def cell_rule(breaks: np.ndarray, n: int = NODES_PER_CELL) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with one panel per interval of ``breaks``.

    Returns ``(nodes, weights)`` of shape ``(len(breaks) - 1, n)``.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(n)
    lo = breaks[:-1, None]
    half = 0.5 * np.diff(breaks)[:, None]
    return lo + half * (x + 1.0), half * w


def integrate(f, lo: float, hi: float, panels: int = 1, n: int = NODES_PER_CELL) -> float:
    """Composite Gauss-Legendre integral of a vectorised ``f`` over [lo, hi]."""
    nodes, weights = cell_rule(np.linspace(lo, hi, panels + 1), n)
    return float(np.sum(weights * f(nodes)))
