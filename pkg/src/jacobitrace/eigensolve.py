"""Eigenvalues of Jacobi matrices by Sturm-sequence bisection.

The Sturm count at x is the number of negative pivots in the LDL^T
factorization of J - xI, which by Sylvester's law of inertia equals the
number of eigenvalues strictly below x.  Bisection on the count brackets
every eigenvalue to a guaranteed width, which is what ``residual_bound``
reports.

The kernels are compiled with numba.  All k brackets are refined together
so the inner loop runs across independent shifts and vectorizes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .errors import DomainError, ToleranceError
from .jacobi import JacobiMatrix, assemble

# Pivots with |q| below PIVOT_FLOOR * max(1, max b_i^2) are replaced by
# +/- that threshold (sign kept, exact zero -> +) so the recurrence never
# divides by zero.  A zero pivot treated as positive keeps the count strict.
PIVOT_FLOOR = 1e-290

# Brackets are widened by this many ulps of the matrix scale per row to
# absorb rounding in the Gershgorin enclosure.
_ENCLOSURE_FUDGE = 2.0

_MAX_ITER = 256


@njit(cache=True, nogil=True, error_model="numpy")
def _sturm_counts(d, e2, pivmin, x, cnt, q):
    m = x.shape[0]
    n = d.shape[0]
    for s in range(m):
        v = d[0] - x[s]
        v = v if abs(v) >= pivmin else (-pivmin if v < 0.0 else pivmin)
        q[s] = v
        cnt[s] = np.int64(v < 0.0)
    for i in range(1, n):
        di = d[i]
        ei = e2[i - 1]
        for s in range(m):
            v = (di - x[s]) - ei / q[s]
            v = v if abs(v) >= pivmin else (-pivmin if v < 0.0 else pivmin)
            q[s] = v
            cnt[s] += np.int64(v < 0.0)


@njit(cache=True, nogil=True)
def _bisect(d, e2, pivmin, lo, hi, targets, tol, max_iter):
    m = lo.shape[0]
    cnt = np.empty(m, np.int64)
    q = np.empty(m)
    mid = np.empty(m)
    for _ in range(max_iter):
        width = 0.0
        for s in range(m):
            mid[s] = 0.5 * (lo[s] + hi[s])
            w = hi[s] - lo[s]
            if w > width:
                width = w
        if width <= tol:
            break
        _sturm_counts(d, e2, pivmin, mid, cnt, q)
        for s in range(m):
            if cnt[s] > targets[s]:
                hi[s] = mid[s]
            else:
                lo[s] = mid[s]
    for s in range(m):
        mid[s] = 0.5 * (lo[s] + hi[s])
    return mid


def max_threads() -> int:
    """Thread cap from ``JS_THREADS`` (default: CPU count)."""
    raw = os.environ.get("JS_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted eigenvalues, each within ``residual_bound`` of the true value."""

    eigenvalues: np.ndarray
    residual_bound: float

    @property
    def k(self) -> int:
        return self.eigenvalues.size

    def trace_average(self, phi: Callable) -> float:
        return trace_average(self, phi)

    def power_sum(self, n: int) -> float:
        """Trace of J^n computed as sum of lambda_j^n."""
        return math.fsum(self.eigenvalues ** n)


def _pivmin(J: JacobiMatrix) -> float:
    e2max = float(np.max(J.offdiagonal ** 2)) if J.k > 1 else 0.0
    return PIVOT_FLOOR * max(1.0, e2max)


def sturm_count(J: JacobiMatrix, x: float) -> int:
    """Number of eigenvalues of ``J`` strictly less than ``x``."""
    x = float(x)
    if math.isnan(x):
        raise DomainError("sturm_count: x is NaN")
    if math.isinf(x):
        return 0 if x < 0 else J.k
    cnt = np.empty(1, np.int64)
    q = np.empty(1)
    _sturm_counts(J.diagonal, J.offdiagonal ** 2, _pivmin(J), np.array([x]), cnt, q)
    return int(cnt[0])


def default_tolerance(J: JacobiMatrix) -> float:
    return 1e-10 * max(1.0, J.spectrum_bound())


def all_eigenvalues(J: JacobiMatrix, abs_tol: float | None = None) -> Spectrum:
    """Every eigenvalue of ``J``, bracketed by bisection to width ``abs_tol``.

    ``abs_tol`` defaults to 1e-10 * max(1, M).  Tolerances below the
    resolution of the matrix scale raise :class:`ToleranceError`.
    """
    if abs_tol is None:
        abs_tol = default_tolerance(J)
    abs_tol = float(abs_tol)
    if not (abs_tol > 0):
        raise ToleranceError(f"abs_tol must be positive, got {abs_tol!r}")
    k = J.k
    glo, ghi = J.gershgorin_interval()
    scale = max(abs(glo), abs(ghi), np.finfo(float).tiny)
    eps = np.finfo(float).eps
    if abs_tol < 4 * eps * scale:
        raise ToleranceError(
            f"abs_tol={abs_tol!r} is below the resolution {4 * eps * scale!r} of this matrix"
        )
    pivmin = _pivmin(J)
    pad = _ENCLOSURE_FUDGE * eps * scale * k + _ENCLOSURE_FUDGE * pivmin
    glo -= pad
    ghi += pad
    if k == 1:
        values = np.array([float(J.diagonal[0])])
    else:
        d = np.ascontiguousarray(J.diagonal)
        e2 = np.ascontiguousarray(J.offdiagonal ** 2)
        values = _bisect_all(d, e2, pivmin, glo, ghi, k, abs_tol)
    values = np.sort(values)
    values.setflags(write=False)
    return Spectrum(values, abs_tol)


def _bisect_all(d, e2, pivmin, glo, ghi, k, tol) -> np.ndarray:
    threads = min(max_threads(), max(1, k // 256))
    targets = np.arange(k, dtype=np.int64)
    if threads == 1:
        return _bisect(d, e2, pivmin, np.full(k, glo), np.full(k, ghi), targets, tol, _MAX_ITER)
    chunks = np.array_split(targets, threads)

    def run(chunk):
        m = chunk.size
        return _bisect(d, e2, pivmin, np.full(m, glo), np.full(m, ghi), chunk, tol, _MAX_ITER)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run, chunks))
    return np.concatenate(parts)


def trace_average(S: Spectrum, phi: Callable) -> float:
    """(1/k) * sum_j phi(lambda_j); ``phi`` is applied to the eigenvalue array."""
    lam = S.eigenvalues
    values = np.broadcast_to(np.asarray(phi(lam), dtype=float), lam.shape)
    return math.fsum(values) / S.k


def spectrum_of(a, b, abs_tol: float | None = None) -> Spectrum:
    return all_eigenvalues(assemble(a, b), abs_tol)
