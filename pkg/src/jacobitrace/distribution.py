"""Empirical joint distributions of coefficient pairs.

``F_k(x, y) = #{j <= k : a_j < x and b_j < y} / k`` is tabulated exactly on
a fixed m x m grid.  Strict inequalities are used throughout, so an atom
sitting on a grid coordinate is counted only at nodes strictly beyond it.
The top grid coordinate on each axis is moved up by one ulp so that the
upper-right corner of a grid that covers the data always reads 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import DomainError, SizeError
from .measures import LimitMeasure, WeightedAtoms, integrate
from .moments import with_phantom
from .sequences import CoefficientSequence

DEFAULT_GRID = 64


@dataclass(frozen=True)
class Grid:
    """m x m tensor grid of nodes over [x_lo, x_hi] x [y_lo, y_hi]."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    m: int = DEFAULT_GRID

    def __post_init__(self):
        if self.m < 2:
            raise SizeError(f"grid needs m >= 2, got {self.m}")
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise DomainError("grid rectangle must have positive width and height")

    @classmethod
    def unit(cls, m: int = DEFAULT_GRID) -> "Grid":
        return cls(0.0, 1.0, 0.0, 1.0, m)

    @classmethod
    def covering(cls, a, b, m: int = DEFAULT_GRID, pad: float = 0.0) -> "Grid":
        """Smallest grid containing every pair, widened by ``pad`` on each side."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        x0, x1 = float(a.min()) - pad, float(a.max()) + pad
        y0, y1 = float(b.min()) - pad, float(b.max()) + pad
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        return cls(x0, x1, y0, y1, m)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(self.x_lo, self.x_hi, self.m)
        ys = np.linspace(self.y_lo, self.y_hi, self.m)
        xs[-1] = np.nextafter(xs[-1], np.inf)
        ys[-1] = np.nextafter(ys[-1], np.inf)
        return xs, ys

    @property
    def resolution(self) -> float:
        return max(self.x_hi - self.x_lo, self.y_hi - self.y_lo) / (self.m - 1)


@dataclass(frozen=True, eq=False)
class EmpiricalJointCDF:
    k: int
    grid: Grid
    values: np.ndarray = field(repr=False)

    def sup_distance(self, other: "EmpiricalJointCDF") -> float:
        if other.grid != self.grid:
            raise DomainError("CDFs live on different grids")
        return float(np.max(np.abs(self.values - other.values)))

    def to_measure(self) -> WeightedAtoms:
        """Atoms at cell midpoints carrying the CDF increments.

        Mass with a_j below the first node is placed on the first node.
        Requires the grid to cover every pair.
        """
        F = self.values
        if abs(F[-1, -1] - 1.0) > 1e-12:
            raise DomainError(f"grid covers only {F[-1, -1]!r} of the mass")
        padded = np.zeros((F.shape[0] + 1, F.shape[1] + 1))
        padded[1:, 1:] = F
        cell = np.diff(np.diff(padded, axis=0), axis=1)
        xs, ys = self.grid.axes()
        xs[-1], ys[-1] = self.grid.x_hi, self.grid.y_hi
        cx = np.concatenate([[xs[0]], 0.5 * (xs[:-1] + xs[1:])])
        cy = np.concatenate([[ys[0]], 0.5 * (ys[:-1] + ys[1:])])
        i, j = np.nonzero(cell > 0)
        w = cell[i, j]
        return WeightedAtoms(list(zip(cx[i], cy[j], w / w.sum())))


def empirical_cdf(a, b, grid: Grid) -> EmpiricalJointCDF:
    """Tabulate F_k on ``grid``; ``b`` may have k - 1 entries (phantom appended)."""
    a = np.asarray(a, dtype=float).reshape(-1)
    k = a.size
    if k == 0:
        raise SizeError("empirical_cdf needs at least one pair")
    b = with_phantom(np.asarray(b, dtype=float).reshape(-1), k)
    xs, ys = grid.axes()
    m = grid.m
    # first node strictly beyond each coordinate
    ix = np.searchsorted(xs, a, side="right")
    iy = np.searchsorted(ys, b, side="right")
    counts = np.zeros((m + 1, m + 1), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    F = np.cumsum(np.cumsum(counts, axis=0), axis=1)[:m, :m] / k
    F.setflags(write=False)
    return EmpiricalJointCDF(k, grid, F)


def outside_fraction(a, b, box: tuple[tuple[float, float], tuple[float, float]]) -> float:
    """Fraction of pairs outside the closed rectangle ``box`` (tightness count)."""
    a = np.asarray(a, dtype=float)
    b = with_phantom(np.asarray(b, dtype=float), a.size)
    (x0, x1), (y0, y1) = box
    inside = (a >= x0) & (a <= x1) & (b >= y0) & (b <= y1)
    return float(np.count_nonzero(~inside)) / a.size


# ---------------------------------------------------------------------------
# mu-distribution
# ---------------------------------------------------------------------------

PlaneFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MuDistributionRow:
    k: int
    discrepancy: float
    worst_psi: str
    per_psi: Mapping[str, float]


def empirical_mean(a, b, psi: PlaneFunction) -> float:
    """(1/k) sum_j psi(a_j, b_j) with the phantom b_k."""
    a = np.asarray(a, dtype=float)
    b = with_phantom(np.asarray(b, dtype=float), a.size)
    values = np.broadcast_to(np.asarray(psi(a, b), dtype=float), a.shape)
    return math.fsum(values) / a.size


def mu_distribution_test(
    seq: CoefficientSequence,
    mu: LimitMeasure,
    ks: Sequence[int],
    psis: Mapping[str, PlaneFunction],
) -> list[MuDistributionRow]:
    """max over psi of |mean_k psi(a_j, b_j) - integral psi dmu| for each k."""
    if not psis:
        raise ValueError("need at least one test function")
    targets = {name: integrate(mu, psi) for name, psi in psis.items()}
    rows = []
    for k in ks:
        a, b = seq.generate(int(k))
        errs = {name: abs(empirical_mean(a, b, psi) - targets[name]) for name, psi in psis.items()}
        worst = max(errs, key=errs.get)
        rows.append(MuDistributionRow(int(k), errs[worst], worst, errs))
    return rows


def plane_polynomials(max_degree: int = 4) -> dict[str, PlaneFunction]:
    """x^p y^q for 0 < p + q <= max_degree."""
    out: dict[str, PlaneFunction] = {}
    for total in range(1, max_degree + 1):
        for p in range(total, -1, -1):
            q = total - p
            out[f"x{p}y{q}"] = (lambda p, q: lambda x, y: x ** p * y ** q)(p, q)
    return out


# ---------------------------------------------------------------------------
# Helly selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HellySelection:
    """Outcome of a sub-ladder search.

    On success ``selected_ks`` has at least ``min_length`` entries and
    ``limit`` is the CDF at the last selected size.  On failure ``limit`` is
    ``None`` and ``best_sup_norm`` is the smallest distance seen between any
    two CDFs of the ladder.
    """

    success: bool
    selected_ks: list[int]
    sup_norm_trace: list[float]
    limit: Optional[EmpiricalJointCDF]
    best_sup_norm: float
    tol: float


def _cdfs(seq: CoefficientSequence, ks: Sequence[int], grid: Grid) -> list[EmpiricalJointCDF]:
    def build(k):
        return empirical_cdf(*seq.generate(k), grid)

    with ThreadPoolExecutor(max_workers=min(8, len(ks))) as pool:
        return list(pool.map(build, ks))


def helly_subsequence(
    seq: CoefficientSequence,
    ks: Sequence[int],
    tol: float,
    grid: Grid | None = None,
    min_length: int = 4,
) -> HellySelection:
    """Greedy search for a sub-ladder along which F_k stabilizes.

    From each starting size the ladder is walked once, keeping k whenever
    its CDF is within ``tol`` (sup-norm over grid nodes) of the last kept
    one.  The longest such run wins, ties going to the earliest start.
    """
    ks = [int(k) for k in ks]
    if len(ks) < 8:
        raise SizeError(f"helly_subsequence needs a ladder of at least 8 sizes, got {len(ks)}")
    if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise SizeError("ks must be strictly increasing")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    grid = grid or Grid.unit()
    cdfs = _cdfs(seq, ks, grid)
    n = len(ks)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = cdfs[i].sup_distance(cdfs[j])

    best: list[int] = []
    for start in range(n):
        kept = [start]
        for j in range(start + 1, n):
            if dist[kept[-1], j] < tol:
                kept.append(j)
        if len(kept) > len(best):
            best = kept
    off_diag = dist[~np.eye(n, dtype=bool)]
    best_sup = float(off_diag.min())
    trace = [float(dist[i, j]) for i, j in zip(best, best[1:])]
    if len(best) < min_length:
        return HellySelection(False, [ks[i] for i in best], trace, None, best_sup, tol)
    return HellySelection(True, [ks[i] for i in best], trace, cdfs[best[-1]], best_sup, tol)
