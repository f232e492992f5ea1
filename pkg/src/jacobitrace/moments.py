"""Combinatorial approximation of Trace[J^n] and its comparison with exact traces.

For bands in a small-deviation class,

    Trace[J^n] = sum_{j=0}^{n//2} n! / ((j!)^2 (n-2j)!) * sum_{i=1}^k a_i^(n-2j) b_i^(2j) + o(k).

The inner sum runs over k off-diagonal values while the matrix has only
k - 1; the missing b_k is taken equal to b_{k-1} (zero when k = 1).  Any
bounded choice changes the sum by O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eigensolve import all_eigenvalues
from .errors import DomainError, OverflowGuardError, SizeError
from .jacobi import assemble
from .sequences import CoefficientSequence

MAX_ORDER = 40


def multinomial_coeff(n: int, j: int) -> int:
    """Exact n! / ((j!)^2 (n - 2j)!), the number of words with j L's, j L^T's and n-2j D's."""
    if n < 0 or j < 0:
        raise DomainError(f"n and j must be nonnegative, got n={n}, j={j}")
    if 2 * j > n:
        raise DomainError(f"2j must not exceed n, got n={n}, j={j}")
    if n > MAX_ORDER:
        raise OverflowGuardError(f"order n={n} exceeds the supported maximum {MAX_ORDER}")
    return math.factorial(n) // (math.factorial(j) ** 2 * math.factorial(n - 2 * j))


def with_phantom(b: np.ndarray, k: int) -> np.ndarray:
    """Extend the k-1 off-diagonal values to k by repeating the last one."""
    b = np.asarray(b, dtype=float)
    if b.size == k:
        return b
    if b.size != k - 1:
        raise SizeError(f"expected {k - 1} off-diagonal values, got {b.size}")
    last = b[-1] if b.size else 0.0
    return np.append(b, last)


def approx_moment_trace(a, b, n: int) -> float:
    """Right-hand side of the moment trace formula (without the o(k) term)."""
    a = np.asarray(a, dtype=float)
    k = a.size
    if k == 0:
        raise SizeError("need at least one diagonal entry")
    bk = with_phantom(b, k)
    if n > MAX_ORDER:
        raise OverflowGuardError(f"order n={n} exceeds the supported maximum {MAX_ORDER}")
    if n < 0:
        raise DomainError(f"order n must be nonnegative, got {n}")
    b2 = bk * bk
    total = 0.0
    for j in range(n // 2 + 1):
        # numpy evaluates 0.0 ** 0 as 1.0, the convention needed here
        terms = a ** (n - 2 * j) * b2 ** j
        total += multinomial_coeff(n, j) * math.fsum(terms)
    return total


@dataclass(frozen=True)
class MomentReport:
    n: int
    k: int
    exact_trace: float
    approx_trace: float

    @property
    def deviation_per_k(self) -> float:
        return abs(self.exact_trace - self.approx_trace) / self.k


def moment_report(a, b, n: int, abs_tol: float | None = None) -> MomentReport:
    spectrum = all_eigenvalues(assemble(a, b), abs_tol)
    return MomentReport(n, spectrum.k, spectrum.power_sum(n), approx_moment_trace(a, b, n))


def moment_deviation_ladder(
    seq: CoefficientSequence,
    n: int,
    ks: Sequence[int],
    abs_tol: float | None = None,
) -> list[MomentReport]:
    """One :class:`MomentReport` per k, exact traces from the certified spectrum."""
    ks = list(ks)
    if not ks:
        raise SizeError("ks must be nonempty")
    if any(k2 <= k1 for k1, k2 in zip(ks, ks[1:])):
        raise SizeError(f"ks must be strictly increasing, got {ks}")
    if n > MAX_ORDER:
        raise OverflowGuardError(f"order n={n} exceeds the supported maximum {MAX_ORDER}")
    return [moment_report(*seq.generate(k), n, abs_tol) for k in ks]
