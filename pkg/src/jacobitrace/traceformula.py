"""The limit trace functional and its comparison with finite-k trace averages.

For a probability measure mu on the coefficient plane,

    L(phi) = (1/pi) * integral integral_0^pi phi(x + 2 y cos t) dt dmu(x, y),

which is the limit of (1/k) Trace[phi(J_k)] for mu-distributed bands.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .eigensolve import all_eigenvalues, max_threads, trace_average
from .errors import DomainError, SizeError
from .jacobi import assemble
from .measures import LimitMeasure
from .quadrature import gauss_legendre
from .sequences import CoefficientSequence

_INNER_PANELS = 16
_INNER_ORDER = 8


def limit_functional(
    mu: LimitMeasure,
    phi: Callable[[np.ndarray], np.ndarray],
    panels: int = _INNER_PANELS,
    order: int = _INNER_ORDER,
) -> float:
    """L(phi) by Gauss-Legendre in t nested inside the quadrature of ``mu``."""
    x, y, w = mu.quadrature()
    t, wt = gauss_legendre(0.0, math.pi, panels, order)
    cos_t = np.cos(t)
    # chunk the outer nodes to bound the size of the (outer x inner) block
    step = max(1, 65536 // t.size)
    parts = []
    for start in range(0, x.size, step):
        xs = x[start : start + step, None]
        ys = y[start : start + step, None]
        with np.errstate(all="ignore"):
            values = np.asarray(phi(xs + 2.0 * ys * cos_t[None, :]), dtype=float)
        values = np.broadcast_to(values, (xs.shape[0], t.size))
        if not np.all(np.isfinite(values)):
            raise DomainError("test function is not finite on the spectral support of the measure")
        parts.append(w[start : start + step] * (values @ wt))
    return math.fsum(np.concatenate(parts)) / math.pi


@dataclass(frozen=True)
class TestFunction:
    """Named scalar test function, vectorized over numpy arrays."""

    __test__ = False  # not a pytest class

    id: str
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x):
        return self.fn(x)


def _chebyshev(n: int, lo: float, hi: float) -> Callable:
    mid, half = (hi + lo) / 2, (hi - lo) / 2

    def fn(x):
        u = (np.asarray(x, dtype=float) - mid) / half
        return np.polynomial.chebyshev.chebval(u, [0] * n + [1])

    return fn


def _monomial(n: int) -> Callable:
    return lambda x: np.asarray(x, dtype=float) ** n


def test_function_suite(interval: tuple[float, float] = (-1.0, 3.0)) -> list[TestFunction]:
    """Fixed ordered basis of test functions.

    Monomials m0..m6, Chebyshev polynomials T1..T5 rescaled from
    ``interval`` onto [-1, 1], the Lipschitz function |x|, a sigmoid and the
    bounded Lorentzian 1/(1 + x^2).
    """
    lo, hi = interval
    suite = [TestFunction(f"m{n}", _monomial(n)) for n in range(7)]
    suite += [TestFunction(f"T{n}", _chebyshev(n, lo, hi)) for n in range(1, 6)]
    suite += [
        TestFunction("abs", lambda x: np.abs(np.asarray(x, dtype=float))),
        TestFunction("sigmoid", lambda x: 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))),
        TestFunction("lorentz", lambda x: 1.0 / (1.0 + np.asarray(x, dtype=float) ** 2)),
    ]
    return suite


test_function_suite.__test__ = False


def suite_lookup(ids: Sequence[str], interval: tuple[float, float] = (-1.0, 3.0)) -> list[TestFunction]:
    """Select suite members by id, preserving the requested order."""
    table = {f.id: f for f in test_function_suite(interval)}
    missing = [i for i in ids if i not in table]
    if missing:
        raise KeyError(f"unknown test function ids: {missing}; known: {sorted(table)}")
    return [table[i] for i in ids]


def spectral_interval(mu: LimitMeasure) -> tuple[float, float]:
    """Hull of {x + 2 y cos t} over the support of ``mu``, padded if degenerate."""
    x, y, w = mu.quadrature()
    keep = w > 0
    lo = float(np.min(x[keep] - 2 * np.abs(y[keep])))
    hi = float(np.max(x[keep] + 2 * np.abs(y[keep])))
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


@dataclass(frozen=True)
class ConvergenceReport:
    phi_id: str
    k: int
    empirical: float
    limit: float
    abs_err: float


def convergence_ladder(
    seq: CoefficientSequence,
    mu: LimitMeasure,
    phis: Sequence[TestFunction],
    ks: Sequence[int],
    abs_tol: float | None = None,
) -> list[ConvergenceReport]:
    """Empirical trace averages versus L(phi) for every (phi, k) cell.

    Spectra for different k are computed concurrently; the output is sorted
    by (phi_id, k) and does not depend on scheduling.
    """
    ks = [int(k) for k in ks]
    if not ks:
        raise SizeError("ks must be nonempty")
    if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise SizeError(f"ks must be strictly increasing, got {ks}")
    limits = {phi.id: limit_functional(mu, phi) for phi in phis}

    def solve(k):
        return all_eigenvalues(assemble(*seq.generate(k)), abs_tol)

    # the eigensolver threads internally for large k; only fan out small ladders
    workers = min(len(ks), max_threads()) if max(ks) < 512 else 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(solve, ks))
    else:
        spectra = [solve(k) for k in ks]

    reports = []
    for phi in phis:
        for k, spectrum in zip(ks, spectra):
            empirical = trace_average(spectrum, phi)
            limit = limits[phi.id]
            reports.append(ConvergenceReport(phi.id, k, empirical, limit, abs(empirical - limit)))
    reports.sort(key=lambda r: (r.phi_id, r.k))
    return reports
