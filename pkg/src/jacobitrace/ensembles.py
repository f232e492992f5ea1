"""Ready-made (sequence, contraction, limit measure) triples.

``builtin(id, **params)`` returns an :class:`Ensemble` whose ``sequence``
already includes the contraction, so its spectra can be compared directly
with ``limit_functional(ensemble.mu, phi)``.  ``raw`` keeps the
uncontracted coefficients.

Registry ids: toeplitz, legendre, chebyshev, jacobi, ramp, two_atom,
van_vleck, hermite, laguerre, nevai_ullman, gaussian, order_statistics,
alternating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, ParameterError, RegistryError
from .measures import (
    CurvePushforward,
    DensityCurve,
    LimitMeasure,
    ProductAtom,
    WeightedAtoms,
    arcsine_density,
    marchenko_pastur_density,
    nevai_ullman_density,
    semicircle_density,
)
from .quadrature import gauss_legendre
from .sequences import (
    CoefficientSequence,
    DeclaredClass,
    Kind,
    constant,
    contract,
    random_sequence,
    recurrence,
    sampled,
)


@dataclass(frozen=True, eq=False)
class Ensemble:
    id: str
    sequence: CoefficientSequence
    mu: Optional[LimitMeasure]
    contraction: Optional[Callable[[int], float]] = None
    expected_density: Optional[DensityCurve] = None
    provenance: str = ""
    raw: Optional[CoefficientSequence] = None
    params: tuple = ()

    @property
    def is_random(self) -> bool:
        return self.sequence.kind is Kind.RANDOM


# ---------------------------------------------------------------------------
# Registry entries
# ---------------------------------------------------------------------------


def _toeplitz(a: float = 0.0, b: float = 0.5) -> Ensemble:
    seq = constant(a, b, id=f"toeplitz({a:g},{b:g})")
    return Ensemble(
        "toeplitz",
        seq,
        ProductAtom(a, b),
        expected_density=arcsine_density(a, b) if b > 0 else None,
        provenance="constant bands T_k(a, b); arcsine limit on (a - 2b, a + 2b)",
    )


def _legendre() -> Ensemble:
    # orthonormal Legendre recurrence: x p_j = b_j p_{j+1} + b_{j-1} p_{j-1}
    seq = recurrence(
        lambda j, k: np.zeros_like(j),
        lambda j, k: j / np.sqrt(4 * j * j - 1),
        id="legendre",
        bounded=True,
    )
    return Ensemble(
        "legendre",
        seq,
        ProductAtom(0.0, 0.5),
        expected_density=arcsine_density(0.0, 0.5),
        provenance="Legendre polynomials, M(0, 1/2) class",
    )


def _chebyshev() -> Ensemble:
    seq = recurrence(
        lambda j, k: np.zeros_like(j),
        lambda j, k: np.where(j == 1, math.sqrt(0.5), 0.5),
        id="chebyshev",
        bounded=True,
    )
    return Ensemble(
        "chebyshev",
        seq,
        ProductAtom(0.0, 0.5),
        expected_density=arcsine_density(0.0, 0.5),
        provenance="Chebyshev polynomials of the first kind, M(0, 1/2) class",
    )


def _jacobi(alpha: float = 0.0, beta: float = 0.0) -> Ensemble:
    """Orthonormal Jacobi recurrence for weight (1-x)^alpha (1+x)^beta."""
    if not (alpha > -1 and beta > -1):
        raise ParameterError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")
    s = alpha + beta

    def diag(j, k):
        n = j - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (beta ** 2 - alpha ** 2) / ((2 * n + s) * (2 * n + s + 2))
        return np.where(n == 0, (beta - alpha) / (s + 2), out)

    def off(j, k):
        n = j - 1
        with np.errstate(divide="ignore", invalid="ignore"):
            general = (2 / (2 * n + s + 2)) * np.sqrt(
                (n + 1) * (n + 1 + alpha) * (n + 1 + beta) * (n + 1 + s)
                / ((2 * n + s + 1) * (2 * n + s + 3))
            )
        first = 2 / (s + 2) * math.sqrt((alpha + 1) * (beta + 1) / (s + 3))
        return np.where(n == 0, first, general)

    seq = recurrence(diag, off, id=f"jacobi({alpha:g},{beta:g})", bounded=True)
    return Ensemble(
        "jacobi",
        seq,
        ProductAtom(0.0, 0.5),
        expected_density=arcsine_density(0.0, 0.5),
        provenance="Jacobi polynomials; coefficients converge to (0, 1/2)",
        params=(("alpha", alpha), ("beta", beta)),
    )


def _ramp(b: float = 0.5) -> Ensemble:
    seq = recurrence(lambda j, k: j / k, lambda j, k: np.full_like(j, b), id="ramp", bounded=True, monotone=True)
    mu = CurvePushforward(lambda s: s, lambda s: np.full_like(s, b))
    return Ensemble("ramp", seq, mu, provenance="a_i = i/k, constant b; class S by monotonicity")


def _two_atom(a0: float = 0.0, a1: float = 1.0, b: float = 0.5) -> Ensemble:
    """Diagonal equal to a0 on the first half and a1 on the second."""
    seq = recurrence(
        lambda j, k: np.where(j <= k // 2, a0, a1),
        lambda j, k: np.full_like(j, b),
        id="two_atom",
        bounded=True,
    )
    mu = WeightedAtoms([(a0, b, 0.5), (a1, b, 0.5)])
    return Ensemble("two_atom", seq, mu, provenance="two accumulation points with equal weights")


def _van_vleck() -> Ensemble:
    seq = recurrence(
        lambda j, k: (j - 1) / k,
        lambda j, k: (j / k) * np.sqrt(1 - (j / k) ** 2),
        id="van_vleck",
        declared_class=DeclaredClass.S,
        bounded=True,
    )
    mu = CurvePushforward(lambda s: s, lambda s: s * np.sqrt(np.clip(1 - s * s, 0, None)))
    return Ensemble(
        "van_vleck",
        seq,
        mu,
        provenance="a_j = (j-1)/k, b_j = (j/k) sqrt(1 - (j/k)^2); mu is the law of (s, s sqrt(1 - s^2))",
    )


def _hermite() -> Ensemble:
    raw = recurrence(
        lambda j, k: np.zeros_like(j),
        lambda j, k: np.sqrt(j / 2),
        id="hermite",
    )
    r = lambda k: math.sqrt(2 * k)  # noqa: E731
    seq = contract(raw, r, label="sqrt(2k)")
    mu = CurvePushforward(lambda s: np.zeros_like(s), lambda s: 0.5 * np.sqrt(s))
    return Ensemble(
        "hermite",
        seq,
        mu,
        contraction=r,
        expected_density=semicircle_density(1.0),
        provenance="Hermite zeros divided by sqrt(2k); semicircle of radius 1",
        raw=raw,
    )


def _laguerre() -> Ensemble:
    raw = recurrence(lambda j, k: 2 * j - 1, lambda j, k: j, id="laguerre")
    r = lambda k: float(k)  # noqa: E731
    seq = contract(raw, r, label="k")
    mu = CurvePushforward(lambda s: 2 * s, lambda s: s)
    return Ensemble(
        "laguerre",
        seq,
        mu,
        contraction=r,
        expected_density=marchenko_pastur_density(),
        provenance="Laguerre zeros divided by k; Marchenko-Pastur on (0, 4]",
        raw=raw,
    )


def _nevai_ullman(alpha: float = 0.5, a: float = 0.0, b: float = 0.5) -> Ensemble:
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    seq = recurrence(
        lambda j, k: a * (j / k) ** alpha,
        lambda j, k: b * (j / k) ** alpha,
        id=f"nevai_ullman({alpha:g},{a:g},{b:g})",
        monotone=True,
    )
    mu = CurvePushforward(lambda s: a * s ** alpha, lambda s: b * s ** alpha)
    return Ensemble(
        "nevai_ullman",
        seq,
        mu,
        expected_density=nevai_ullman_density(alpha, a, b),
        provenance="regularly varying coefficients (a, b) (j/k)^alpha; Nevai-Ullman density",
        params=(("alpha", alpha), ("a", a), ("b", b)),
    )


def _require_seed(name: str, seed) -> int:
    if seed is None:
        raise ConfigurationError(f"ensemble {name!r} is random and needs a seed", field="seed")
    return int(seed)


def _gaussian(seed: int | None = None, delta: float = 0.5) -> Ensemble:
    seed = _require_seed("gaussian", seed)

    def sampler(rng, k):
        sigma = k ** (-delta)
        return rng.normal(0.0, sigma, k), rng.normal(0.0, sigma, k - 1)

    seq = random_sequence(sampler, seed, id=f"gaussian(delta={delta:g})", params={"delta": delta})
    return Ensemble(
        "gaussian",
        seq,
        ProductAtom(0.0, 0.0),
        provenance="i.i.d. N(0, k^(-2 delta)) bands; trace averages tend to phi(0)",
        params=(("seed", seed), ("delta", delta)),
    )


def _order_statistics(seed: int | None = None) -> Ensemble:
    """Sorted i.i.d. U(0, 1) draws on both bands.

    Sorting each band separately pairs the j-th order statistics, which both
    sit near j/k; the pairs therefore follow the diagonal law of (s, s).
    """
    seed = _require_seed("order_statistics", seed)

    def sampler(rng, k):
        x = np.sort(rng.uniform(0.0, 1.0, k))
        y = np.sort(rng.uniform(0.0, 1.0, k))
        # b_j = Y_(j) for j < k: the k-1 smallest order statistics of k draws
        return x, y[: k - 1]

    seq = random_sequence(
        sampler,
        seed,
        id="order_statistics",
        declared_class=DeclaredClass.S,
        monotone=True,
        bounded=True,
    )
    mu = CurvePushforward(lambda s: s, lambda s: s)
    return Ensemble(
        "order_statistics",
        seq,
        mu,
        provenance="order statistics of uniform samples; empirical pairs follow (s, s)",
        params=(("seed", seed),),
    )


def _alternating() -> Ensemble:
    seq = recurrence(
        lambda j, k: np.full_like(j, 0.0 if k % 2 == 0 else 1.0),
        lambda j, k: np.ones_like(j),
        id="alternating",
        declared_class=DeclaredClass.S,
        bounded=True,
    )
    return Ensemble(
        "alternating",
        seq,
        None,
        provenance="(0, 1) for even k, (1, 1) for odd k; not mu-distributed along all k",
    )


_REGISTRY: dict[str, Callable[..., Ensemble]] = {
    "toeplitz": _toeplitz,
    "legendre": _legendre,
    "chebyshev": _chebyshev,
    "jacobi": _jacobi,
    "ramp": _ramp,
    "two_atom": _two_atom,
    "van_vleck": _van_vleck,
    "hermite": _hermite,
    "laguerre": _laguerre,
    "nevai_ullman": _nevai_ullman,
    "gaussian": _gaussian,
    "order_statistics": _order_statistics,
    "alternating": _alternating,
}

RANDOM_IDS = frozenset({"gaussian", "order_statistics"})


def registry_ids() -> list[str]:
    return list(_REGISTRY)


def builtin(id: str, **params: Any) -> Ensemble:
    try:
        factory = _REGISTRY[id]
    except KeyError:
        raise RegistryError(f"unknown ensemble {id!r}; known: {', '.join(_REGISTRY)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigurationError(f"ensemble {id!r}: {exc}", field="params") from None


def ksc_from_functions(
    a: Callable[[np.ndarray], np.ndarray],
    b: Callable[[np.ndarray], np.ndarray],
    id: str = "ksc",
) -> Ensemble:
    """Ensemble sampled from bounded functions: a_j = a(j/k), b_j = b(j/k).

    The limit measure is the law of (a(s), b(s)) for s uniform on [0, 1];
    it collapses to a single atom when both functions are constant.
    """
    s, _ = gauss_legendre(0.0, 1.0, 64, 8)
    s = np.concatenate([[0.0], s, [1.0]])
    with np.errstate(all="ignore"):
        va = np.broadcast_to(np.asarray(a(s), dtype=float), s.shape)
        vb = np.broadcast_to(np.asarray(b(s), dtype=float), s.shape)
    if not (np.all(np.isfinite(va)) and np.all(np.isfinite(vb))):
        raise DomainError("coefficient functions must be finite on [0, 1]")
    seq = sampled(a, b, id=id)
    if np.ptp(va) == 0 and np.ptp(vb) == 0:
        mu: LimitMeasure = ProductAtom(float(va[0]), float(vb[0]))
    else:
        mu = CurvePushforward(a, b)
    return Ensemble(id, seq, mu, provenance="sampled from coefficient functions on [0, 1]")
