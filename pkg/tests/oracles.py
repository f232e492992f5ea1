"""Independent reference computations used only by the tests.

Nothing here calls the package's eigensolver or quadrature.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def dense(diag, off) -> np.ndarray:
    d = np.asarray(diag, dtype=float)
    e = np.asarray(off, dtype=float)
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def cyclic_jacobi_eigenvalues(A, sweeps: int = 100, tol: float = 1e-15) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(sum(A[p, q] ** 2 for p in range(n) for q in range(n) if p != q))
        if off <= tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-290:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                if abs(theta) > 1e100:
                    t = 1 / (2 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                R = np.eye(n)
                R[p, p] = R[q, q] = c
                R[p, q] = s
                R[q, p] = -s
                A = R.T @ A @ R
    return np.sort(np.diag(A))


def _leibniz_det(M):
    """Determinant of a square matrix of polynomial coefficient lists."""
    n = len(M)
    total = [Fraction(0)]
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = [Fraction(1)]
        for i in range(n):
            term = _pmul(term, M[i][perm[i]])
        if inversions % 2:
            term = [-c for c in term]
        total = _padd(total, term)
    return total


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _padd(p, q):
    n = max(len(p), len(q))
    p = p + [Fraction(0)] * (n - len(p))
    q = q + [Fraction(0)] * (n - len(q))
    return [a + b for a, b in zip(p, q)]


def charpoly(A) -> list[Fraction]:
    """Coefficients (constant term first) of det(lambda I - A) by Leibniz expansion.

    Works for any square matrix, symmetric or not.
    """
    A = [[Fraction(x) for x in row] for row in np.asarray(A, dtype=float).tolist()]
    n = len(A)
    M = [[([-A[i][j], Fraction(1)] if i == j else [-A[i][j]]) for j in range(n)] for i in range(n)]
    return _leibniz_det(M)


def polyval(coeffs, x: float) -> float:
    return float(sum(float(c) * x ** i for i, c in enumerate(coeffs)))


def toeplitz_eigenvalues(a: float, b: float, k: int) -> np.ndarray:
    j = np.arange(1, k + 1)
    return np.sort(a + 2 * b * np.cos(j * np.pi / (k + 1)))


def scipy_spectrum(diag, off) -> np.ndarray:
    from scipy.linalg import eigvalsh_tridiagonal

    return eigvalsh_tridiagonal(np.asarray(diag, float), np.asarray(off, float))


def quad_moment(density, lo: float, hi: float, n: int) -> float:
    """Adaptive-quadrature moment of a density given pointwise."""
    from scipy.integrate import quad

    value, _ = quad(lambda x: x ** n * density(x), lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)
    return value


def catalan(p: int) -> int:
    return math.comb(2 * p, p) // (p + 1)
