"""Composite Gauss-Legendre rules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

DEFAULT_PANELS = 2048
DEFAULT_ORDER = 8


@lru_cache(maxsize=64)
def _reference_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(lo: float, hi: float, panels: int = 1, order: int = DEFAULT_ORDER):
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on [lo, hi]."""
    if panels < 1 or order < 1:
        raise ValueError("panels and order must be positive")
    x, w = _reference_rule(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_gauss_legendre(lo: float, hi: float, gap: float, order: int = 16, ratio: float = 0.5):
    """Rule on [lo, hi] with panels shrinking geometrically toward ``hi``.

    Suited to integrands that are smooth on [lo, hi] but vary on the scale
    ``gap`` near ``hi`` (a singularity just beyond the endpoint).
    """
    length = hi - lo
    if length <= 0:
        return np.empty(0), np.empty(0)
    gap = max(float(gap), np.finfo(float).eps * max(1.0, abs(hi)))
    levels = int(np.clip(np.ceil(np.log(length / gap) / np.log(1 / ratio)), 0, 60))
    cuts = hi - length * ratio ** np.arange(levels + 1)
    edges = np.concatenate([cuts, [hi]])
    x, w = _reference_rule(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
