"""Limit measures on the coefficient plane and closed-form spectral densities.

Every :class:`LimitMeasure` reduces to a weighted point set ``(x, y, w)``:
atoms exactly, curve pushforwards through composite Gauss-Legendre nodes
in the curve parameter, grid densities through their cell weights.
Integration and the trace functional both work from that point set.

One-dimensional densities with inverse-square-root edges are integrated in
the angle variable (x = a + 2b cos t and similar), where the edge
singularity cancels against dx/dt.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .quadrature import (
    DEFAULT_ORDER,
    DEFAULT_PANELS,
    gauss_legendre,
    graded_gauss_legendre,
)

Box = tuple[tuple[float, float], tuple[float, float]]

_MASS_TOL = 1e-12


class LimitMeasure:
    """Probability measure on R^2 given by quadrature points."""

    def quadrature(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def support_box(self) -> Box:
        x, y, w = self.quadrature()
        keep = w > 0
        return (
            (float(np.min(x[keep])), float(np.max(x[keep]))),
            (float(np.min(y[keep])), float(np.max(y[keep]))),
        )

    def integrate(self, psi: Callable) -> float:
        return integrate(self, psi)


def integrate(mu: LimitMeasure, psi: Callable) -> float:
    """Integral of psi(x, y) against ``mu``."""
    x, y, w = mu.quadrature()
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(psi(x, y), dtype=float), x.shape)
    if not np.all(np.isfinite(values[w != 0])):
        raise DomainError("test function is not finite on the support of the measure")
    return math.fsum(w * values)


@dataclass(frozen=True, eq=False)
class ProductAtom(LimitMeasure):
    """Dirac mass at (a, b)."""

    a: float
    b: float

    def quadrature(self):
        return np.array([float(self.a)]), np.array([float(self.b)]), np.array([1.0])


@dataclass(frozen=True, eq=False)
class WeightedAtoms(LimitMeasure):
    """sum_p w_p delta_(a_p, b_p) with nonnegative weights summing to one."""

    atoms: Sequence[tuple[float, float, float]]

    def __post_init__(self):
        arr = np.array(self.atoms, dtype=float).reshape(-1, 3)
        if arr.shape[0] == 0:
            raise ParameterError("need at least one atom")
        if np.any(arr[:, 2] < 0) or not np.all(np.isfinite(arr)):
            raise ParameterError("atom weights must be finite and nonnegative")
        if abs(arr[:, 2].sum() - 1.0) > _MASS_TOL:
            raise ParameterError(f"atom weights sum to {arr[:, 2].sum()!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "atoms", arr)

    def quadrature(self):
        arr = self.atoms
        return arr[:, 0], arr[:, 1], arr[:, 2]


@dataclass(frozen=True, eq=False)
class CurvePushforward(LimitMeasure):
    """Law of (a(s), b(s)) for s uniform on [0, 1].

    Nodes are composite Gauss-Legendre in s (``panels`` x ``order``).
    """

    a: Callable[[np.ndarray], np.ndarray]
    b: Callable[[np.ndarray], np.ndarray]
    panels: int = DEFAULT_PANELS
    order: int = DEFAULT_ORDER
    _cache: dict = field(default_factory=dict, repr=False)

    def quadrature(self):
        if "nodes" not in self._cache:
            s, w = gauss_legendre(0.0, 1.0, self.panels, self.order)
            with np.errstate(all="ignore"):
                x = np.broadcast_to(np.asarray(self.a(s), dtype=float), s.shape).copy()
                y = np.broadcast_to(np.asarray(self.b(s), dtype=float), s.shape).copy()
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                raise DomainError("curve maps produce non-finite values on [0, 1]")
            for arr in (x, y, w):
                arr.setflags(write=False)
            self._cache["nodes"] = (x, y, w)
        return self._cache["nodes"]

    def refined(self, factor: int = 2) -> "CurvePushforward":
        return CurvePushforward(self.a, self.b, self.panels * factor, self.order)


@dataclass(frozen=True, eq=False)
class GridDensity(LimitMeasure):
    """Weights on a tensor grid of nodes ``xs`` x ``ys``, normalized to total mass one."""

    xs: np.ndarray
    ys: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).reshape(-1)
        ys = np.array(self.ys, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float)
        if w.shape != (xs.size, ys.size):
            raise ParameterError(f"weights shape {w.shape} != ({xs.size}, {ys.size})")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ParameterError("grid weights must be finite and nonnegative")
        total = w.sum()
        if total <= 0:
            raise ParameterError("grid weights have zero total mass")
        w = w / total
        for arr in (xs, ys, w):
            arr.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_density(
        cls,
        density: Callable[[np.ndarray, np.ndarray], np.ndarray],
        box: Box,
        panels: int = 16,
        order: int = DEFAULT_ORDER,
    ) -> "GridDensity":
        """Tensor Gauss-Legendre discretization of a density on ``box``."""
        (x0, x1), (y0, y1) = box
        xs, wx = gauss_legendre(x0, x1, panels, order)
        ys, wy = gauss_legendre(y0, y1, panels, order)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        f = np.broadcast_to(np.asarray(density(X, Y), dtype=float), X.shape)
        return cls(xs, ys, f * wx[:, None] * wy[None, :])

    def quadrature(self):
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return X.ravel(), Y.ravel(), self.weights.ravel()


def uniform_square(panels: int = 4, order: int = DEFAULT_ORDER) -> GridDensity:
    """Product Lebesgue measure on [0, 1]^2."""
    return GridDensity.from_density(lambda x, y: np.ones_like(x), ((0.0, 1.0), (0.0, 1.0)), panels, order)


# ---------------------------------------------------------------------------
# One-dimensional densities
# ---------------------------------------------------------------------------

_ANGLE_PANELS = 64


def _angle_rule(panels: int = _ANGLE_PANELS, order: int = DEFAULT_ORDER):
    return gauss_legendre(0.0, math.pi, panels, order)


class DensityCurve:
    """Probability density on an interval with a quadrature rule for expectations.

    ``rule()`` returns nodes and weights such that sum(w * phi(x)) is the
    integral of phi against the density.  Moments are memoized.
    """

    def __init__(
        self,
        name: str,
        support: tuple[float, float],
        evaluator: Callable[[np.ndarray], np.ndarray],
        rule: Callable[[], tuple[np.ndarray, np.ndarray]],
    ):
        self.name = name
        self.support = (float(support[0]), float(support[1]))
        self._evaluator = evaluator
        self._rule_factory = rule
        self._rule = None
        self._moments: dict[int, float] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"DensityCurve({self.name!r}, support={self.support})"

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x > lo) & (x < hi)
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = self._evaluator(x[inside])
        return out

    def rule(self) -> tuple[np.ndarray, np.ndarray]:
        if self._rule is None:
            with self._lock:
                if self._rule is None:
                    self._rule = self._rule_factory()
        return self._rule

    def expectation(self, phi: Callable) -> float:
        x, w = self.rule()
        values = np.broadcast_to(np.asarray(phi(x), dtype=float), x.shape)
        return math.fsum(w * values)

    def mass(self) -> float:
        return self.expectation(lambda x: np.ones_like(x))

    def moment(self, n: int) -> float:
        if n not in self._moments:
            value = self.expectation(lambda x: x ** n)
            with self._lock:
                self._moments.setdefault(n, value)
        return self._moments[n]

    def moments(self, up_to: int) -> list[float]:
        return [self.moment(n) for n in range(up_to + 1)]


def arcsine_density(a: float, b: float) -> DensityCurve:
    """(1/pi) / sqrt((a+2b-x)(x-a+2b)) on (a-2b, a+2b): spectral density of T_k(a, b)."""
    a, b = float(a), float(b)
    if not b > 0:
        raise ParameterError(f"arcsine density needs b > 0, got {b!r}")

    def evaluate(x):
        return 1.0 / (math.pi * np.sqrt((a + 2 * b - x) * (x - a + 2 * b)))

    def rule():
        t, w = _angle_rule()
        return a + 2 * b * np.cos(t), w / math.pi

    return DensityCurve(f"arcsine({a:g},{b:g})", (a - 2 * b, a + 2 * b), evaluate, rule)


def semicircle_density(radius: float = 1.0) -> DensityCurve:
    """(2/(pi R^2)) sqrt(R^2 - x^2) on (-R, R)."""
    R = float(radius)
    if not R > 0:
        raise ParameterError(f"radius must be positive, got {radius!r}")

    def evaluate(x):
        return 2.0 / (math.pi * R * R) * np.sqrt(R * R - x * x)

    def rule():
        # x = R cos t gives density dx = (2/pi) sin^2 t dt
        t, w = _angle_rule()
        return R * np.cos(t), (2.0 / math.pi) * np.sin(t) ** 2 * w

    return DensityCurve(f"semicircle({R:g})", (-R, R), evaluate, rule)


def marchenko_pastur_density() -> DensityCurve:
    """(1/(2 pi)) sqrt(4x - x^2) / x on (0, 4]."""

    def evaluate(x):
        return np.sqrt(4 * x - x * x) / (2 * math.pi * x)

    def rule():
        # x = 2 + 2 cos t gives density dx = (1/pi)(1 - cos t) dt
        t, w = _angle_rule()
        return 2 + 2 * np.cos(t), (1 - np.cos(t)) * w / math.pi

    return DensityCurve("marchenko-pastur", (0.0, 4.0), evaluate, rule)


def _ullman_positive(x: float, beta: float, a: float, b: float, order: int) -> float:
    """v(x) for x > 0 through the angle form of the Mellin convolution.

    With u = a + 2b cos t and y = x/u the convolution becomes
    (beta x^(beta-1) / pi) * integral over {t : u(t) >= x} of u(t)^(-beta) dt.
    """
    lo_u, hi_u = a - 2 * b, a + 2 * b
    if x >= hi_u:
        return 0.0
    c = (max(x, lo_u) - a) / (2 * b)
    t_end = math.acos(min(1.0, max(-1.0, c)))
    if t_end <= 0.0:
        return 0.0
    # u vanishes at t0 when the arcsine support straddles zero; the
    # integrand then peaks on the scale (t0 - t_end) near t_end.
    gap = t_end / 8
    if abs(a) < 2 * b:
        t0 = math.acos(-a / (2 * b))
        if t0 >= t_end:
            gap = min(gap, t0 - t_end)
    t, w = graded_gauss_legendre(0.0, t_end, gap, order=order)
    u = a + 2 * b * np.cos(t)
    return beta * x ** (beta - 1) / math.pi * math.fsum(w * u ** (-beta))


def nevai_ullman_density(alpha: float, a: float, b: float, grid: int = 256) -> DensityCurve:
    """Mellin convolution of a power-law kernel with the arcsine density omega_{a,b}.

    v(x) = integral_0^1 kappa(y) omega_{a,b}(x / y) dy / y with
    kappa(y) = (1/alpha) y^(1/alpha - 1), the law of s^alpha for s uniform
    on (0, 1).  This is the limit density of Jacobi matrices whose
    coefficients are a (j/k)^alpha, b (j/k)^alpha.

    ``grid`` is the number of angle nodes per side of zero used for
    expectations.
    """
    alpha, a, b = float(alpha), float(a), float(b)
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not b > 0:
        raise ParameterError(f"b must be positive, got {b!r}")
    if grid < 8:
        raise ParameterError("grid must be at least 8")
    beta = 1.0 / alpha
    inner_order = 16
    lo_u, hi_u = a - 2 * b, a + 2 * b
    support = (min(lo_u, 0.0), max(hi_u, 0.0))

    def value_at(x: float) -> float:
        if x > 0:
            return _ullman_positive(x, beta, a, b, inner_order)
        if x < 0:
            return _ullman_positive(-x, beta, -a, b, inner_order)
        if lo_u < 0 < hi_u:
            return beta / (math.pi * (beta - 1) * math.sqrt(4 * b * b - a * a))
        return 0.0

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.array([value_at(float(v)) for v in x.ravel()]).reshape(x.shape)

    def rule():
        nodes, weights = [], []
        theta, wt = gauss_legendre(0.0, math.pi, max(1, grid // DEFAULT_ORDER), DEFAULT_ORDER)
        # split at zero and at the arcsine edges, where v has kinks
        cuts = sorted({support[0], support[1], 0.0, lo_u, hi_u})
        pieces = []
        for lo, hi in zip(cuts, cuts[1:]):
            # v - v(0) ~ |x|^(beta - 1) next to zero: grade geometrically there
            if lo == 0.0 or hi == 0.0:
                mid = 0.5 * (lo + hi)
                half = abs(mid)
                r, gw = graded_gauss_legendre(0.0, half, half * 1e-13, order=DEFAULT_ORDER)
                g = math.copysign(1.0, mid) * (half - r)
                nodes.append(g)
                weights.append(evaluate(g) * gw)
                lo, hi = (mid, hi) if lo == 0.0 else (lo, mid)
            pieces.append((lo, hi))
        for lo, hi in pieces:
            x = lo + (hi - lo) * (1 - np.cos(theta)) / 2
            jac = (hi - lo) / 2 * np.sin(theta)
            nodes.append(x)
            weights.append(evaluate(x) * jac * wt)
        return np.concatenate(nodes), np.concatenate(weights)

    return DensityCurve(f"nevai-ullman({alpha:g},{a:g},{b:g})", support, evaluate, rule)
