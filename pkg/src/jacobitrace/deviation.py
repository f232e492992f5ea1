"""Finite-k diagnostics for the small-deviation classes.

Membership in S (total variation o(k), values in [0, 1]) or S' (variation
O(k^(1-delta)), magnitude O(log k)) is an asymptotic property and cannot be
decided from finitely many sizes.  The functions here report the measured
quantities and slopes over a k-ladder; :attr:`ClassSlope.consistent_with_s`
applies the fixed heuristic threshold ``tv_exponent < 0.9``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np

from .errors import RegressionError, SizeError
from .sequences import CoefficientSequence

TV_EXPONENT_THRESHOLD = 0.9
_BOUNDED_RELATIVE_SPREAD = 0.05
_LOG_GROWTH_MAX_EXPONENT = 1.5

Growth = Literal["bounded", "logarithmic", "faster"]


@dataclass(frozen=True)
class DeviationReport:
    k: int
    total_variation: float
    max_abs: float
    monotone_fraction: float
    decreasing_fraction: float
    discrepancy: Optional[float] = None

    @property
    def tv_per_k(self) -> float:
        return self.total_variation / self.k

    @property
    def max_abs_per_logk(self) -> float:
        return self.max_abs / math.log(self.k)


def discrepancy(values) -> float:
    """max_i max(|a_i - i/k|, |a_i - (i-1)/k|) for a sequence in [0, 1]."""
    a = np.asarray(values, dtype=float)
    k = a.size
    i = np.arange(1, k + 1)
    return float(np.max(np.maximum(np.abs(a - i / k), np.abs(a - (i - 1) / k))))


def deviation_report(values, unit_interval: bool | None = None) -> DeviationReport:
    """Total variation, magnitude and monotonicity of one coefficient vector.

    The discrepancy is filled in only when the vector is declared to lie in
    [0, 1]; ``unit_interval=None`` declares it when every value does.
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise SizeError(f"deviation_report needs at least 2 values, got {a.size}")
    k = a.size
    diffs = np.diff(a)
    if unit_interval is None:
        unit_interval = bool(np.all((a >= 0.0) & (a <= 1.0)))
    return DeviationReport(
        k=k,
        total_variation=math.fsum(np.abs(diffs)),
        max_abs=float(np.max(np.abs(a))),
        monotone_fraction=np.count_nonzero(a[:-1] <= a[1:]) / (k - 1),
        decreasing_fraction=np.count_nonzero(a[:-1] >= a[1:]) / (k - 1),
        discrepancy=discrepancy(a) if unit_interval else None,
    )


class ClassSlope(NamedTuple):
    tv_exponent: float
    maxabs_growth: Growth

    @property
    def consistent_with_s(self) -> bool:
        """Heuristic: total variation grows visibly slower than k."""
        return self.tv_exponent < TV_EXPONENT_THRESHOLD


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    denom = float(x @ x)
    if denom == 0.0:
        raise RegressionError("degenerate ladder: all abscissae equal")
    return float(x @ (y - y.mean())) / denom


def class_slope(
    seq: CoefficientSequence,
    ks: Sequence[int],
    component: Literal["a", "b"] = "a",
) -> ClassSlope:
    """Regress ladder statistics against log k.

    ``tv_exponent`` is the least-squares slope of log(TV + 1) on log k.  The
    growth of max|a_i| is labelled ``bounded`` when it varies by less than 5%
    over the ladder; otherwise the slope of log(max|a|) on log(log k) is
    taken, and values up to 1.5 are called ``logarithmic``.
    """
    ks = sorted(set(int(k) for k in ks))
    if len(ks) < 4:
        raise RegressionError(f"class_slope needs at least 4 distinct sizes, got {len(ks)}")
    if ks[0] < 3:
        raise RegressionError("class_slope needs sizes k >= 3")
    idx = 0 if component == "a" else 1
    reports = [deviation_report(seq.generate(k)[idx]) for k in ks]
    logk = np.log(np.array(ks, dtype=float))
    tv = np.array([r.total_variation for r in reports])
    tv_exponent = _slope(logk, np.log(tv + 1.0))

    mx = np.array([r.max_abs for r in reports])
    top = float(np.max(mx))
    if top == 0.0 or (top - float(np.min(mx))) <= _BOUNDED_RELATIVE_SPREAD * top:
        growth: Growth = "bounded"
    else:
        if np.any(mx <= 0):
            raise RegressionError("max |a| vanishes on part of the ladder")
        exponent = _slope(np.log(logk), np.log(mx))
        growth = "logarithmic" if exponent <= _LOG_GROWTH_MAX_EXPONENT else "faster"
    return ClassSlope(tv_exponent, growth)
