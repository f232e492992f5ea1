"""Jacobi (real symmetric tridiagonal) matrices stored as two bands."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .errors import DomainError, ShapeError, SimilarityError


def _band(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """Symmetric tridiagonal matrix with ``k`` diagonal and ``k - 1`` off-diagonal entries."""

    diagonal: np.ndarray
    offdiagonal: np.ndarray

    @property
    def k(self) -> int:
        return self.diagonal.size

    def _max_abs(self) -> tuple[float, float]:
        amax = float(np.max(np.abs(self.diagonal)))
        bmax = float(np.max(np.abs(self.offdiagonal))) if self.k > 1 else 0.0
        return amax, bmax

    def sqrt3_bound(self) -> float:
        """sqrt(3) * (max|a_i| + max|b_i|).

        Not a valid spectral bound in general: T_k(0, 1) has eigenvalues
        2cos(pi/(k+1)) > sqrt(3) once k >= 6.  Use :meth:`spectrum_bound`.
        """
        amax, bmax = self._max_abs()
        return math.sqrt(3.0) * (amax + bmax)

    def spectrum_bound(self) -> float:
        """M with sigma(J) inside [-M, M]; the larger of sqrt3_bound() and max|a| + 2 max|b|."""
        amax, bmax = self._max_abs()
        return max(self.sqrt3_bound(), amax + 2.0 * bmax)

    def gershgorin_interval(self) -> tuple[float, float]:
        """Row-wise Gershgorin enclosure of the spectrum."""
        radius = np.zeros(self.k)
        off = np.abs(self.offdiagonal)
        radius[:-1] += off
        radius[1:] += off
        return float(np.min(self.diagonal - radius)), float(np.max(self.diagonal + radius))

    def trace(self) -> float:
        return math.fsum(self.diagonal)

    def to_csv(self, fh: TextIO | None = None) -> str | None:
        """Write ``index,diag,offdiag`` rows (1-based; offdiag blank on the last row)."""
        return write_bands_csv(self.diagonal, self.offdiagonal, fh)


def assemble(diagonal, offdiagonal) -> JacobiMatrix:
    d = _band(diagonal, "diagonal")
    e = _band(offdiagonal, "offdiagonal")
    if d.size == 0:
        raise ShapeError("diagonal must have at least one entry")
    if e.size != d.size - 1:
        raise ShapeError(
            f"offdiagonal length {e.size} does not match diagonal length {d.size} - 1"
        )
    return JacobiMatrix(d, e)


def symmetrize_similar(diagonal, lower, upper) -> JacobiMatrix:
    """Jacobi matrix similar to the tridiagonal matrix with given sub/super diagonals.

    A diagonal similarity D T D^{-1} makes the off-diagonal pair symmetric,
    with common value sqrt(lower_i * upper_i).  The product form avoids
    building D, whose entries underflow for Hermite-type recurrences.
    """
    lo = _band(lower, "lower")
    up = _band(upper, "upper")
    if lo.shape != up.shape:
        raise ShapeError(f"lower and upper lengths differ: {lo.size} != {up.size}")
    prod = lo * up
    bad = np.flatnonzero(~(prod > 0))
    if bad.size:
        i = int(bad[0])
        raise SimilarityError(
            f"lower[{i + 1}] * upper[{i + 1}] = {prod[i]!r} is not positive"
        )
    return assemble(diagonal, np.sqrt(prod))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_bands_csv(diagonal, offdiagonal, fh: TextIO | None = None) -> str | None:
    out = fh if fh is not None else io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["index", "diag", "offdiag"])
    k = len(diagonal)
    for i in range(k):
        writer.writerow([i + 1, _fmt(diagonal[i]), _fmt(offdiagonal[i]) if i < k - 1 else ""])
    if fh is None:
        return out.getvalue()
    return None


def read_bands_csv(fh: TextIO) -> JacobiMatrix:
    reader = csv.DictReader(fh)
    if reader.fieldnames != ["index", "diag", "offdiag"]:
        raise ShapeError(f"unexpected CSV columns {reader.fieldnames}")
    diag, off = [], []
    for row in reader:
        diag.append(float(row["diag"]))
        if row["offdiag"]:
            off.append(float(row["offdiag"]))
    return assemble(diag, off)
