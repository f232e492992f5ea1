"""Coefficient sequences: generators of the band pairs (a^k, b^k) for any size k.

A :class:`CoefficientSequence` is an immutable description plus a pure
generator ``(k, stream_seed) -> (diagonal, offdiagonal)``.  The diagonal has
``k`` entries and the off-diagonal ``k - 1`` entries, matching the bands of a
``k x k`` Jacobi matrix.

Random sequences draw from numpy's PCG64 bit generator.  The stream for size
``k`` is seeded with ``seed ^ k`` so that each rung of a k-ladder is
reproducible on its own.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence, Union

import numpy as np

from ._expr import compile_expr
from .errors import (
    BoundViolationError,
    ConfigurationError,
    ShapeError,
    ScalingError,
    SizeError,
)

Bands = tuple[np.ndarray, np.ndarray]
Generator = Callable[[int, Optional[int]], Bands]
Scale = Union[float, Callable[[int], float]]


class Kind(str, enum.Enum):
    EXPLICIT_TABLE = "explicit-table"
    SAMPLED_FUNCTION = "sampled-function"
    RECURRENCE_FAMILY = "recurrence-family"
    RANDOM = "random"


class DeclaredClass(str, enum.Enum):
    S = "S"
    S_PRIME = "S-prime"
    NEITHER = "neither"
    UNKNOWN = "unknown"


def stream_seed(seed: int, k: int) -> int:
    """Per-size sub-seed for random sequences (64-bit XOR of seed and k)."""
    return (int(seed) ^ int(k)) & 0xFFFF_FFFF_FFFF_FFFF


def rng_for(seed: int, k: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(stream_seed(seed, k)))


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Deterministic family k -> (a^k, b^k).

    ``bounded`` and ``monotone`` are optional metadata flags; ``params``
    keeps the JSON-level description for sequences built from configs.
    """

    id: str
    kind: Kind
    generator: Generator
    seed: Optional[int] = None
    declared_class: DeclaredClass = DeclaredClass.UNKNOWN
    bounded: Optional[bool] = None
    monotone: Optional[bool] = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "declared_class", DeclaredClass(self.declared_class))
        if self.seed is not None:
            if self.kind is not Kind.RANDOM:
                raise ConfigurationError(
                    f"sequence {self.id!r}: seed is only valid for random sequences",
                    field="seed",
                )
            if not 0 <= int(self.seed) < 2**64:
                raise ConfigurationError(
                    f"sequence {self.id!r}: seed must be a 64-bit unsigned integer",
                    field="seed",
                )

    def generate(self, k: int) -> Bands:
        return generate(self, k)

    def with_seed(self, seed: int) -> "CoefficientSequence":
        return replace(self, seed=seed)


def _as_size(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise SizeError(f"size k must be an integer, got {k!r}")
    if k < 1:
        raise SizeError(f"size k must be >= 1, got {k}")
    return int(k)


def generate(seq: CoefficientSequence, k: int) -> Bands:
    """Return ``(diagonal, offdiagonal)`` of lengths ``k`` and ``k - 1``.

    The arrays are read-only float64 copies.
    """
    k = _as_size(k)
    sub_seed = None
    if seq.kind is Kind.RANDOM:
        if seq.seed is None:
            raise ConfigurationError(
                f"random sequence {seq.id!r} requires a seed", field="seed"
            )
        sub_seed = stream_seed(seq.seed, k)
    a, b = seq.generator(k, sub_seed)
    a = np.array(a, dtype=float).reshape(-1)
    b = np.array(b, dtype=float).reshape(-1)
    if a.shape != (k,) or b.shape != (k - 1,):
        raise ShapeError(
            f"sequence {seq.id!r} emitted lengths ({a.size}, {b.size}) for k={k}, "
            f"expected ({k}, {k - 1})"
        )
    if seq.declared_class is DeclaredClass.S:
        for name, v in (("a", a), ("b", b)):
            bad = np.flatnonzero(~((v >= 0.0) & (v <= 1.0)))
            if bad.size:
                i = int(bad[0])
                raise BoundViolationError(k, i + 1, float(v[i]), 1.0)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _broadcast(values, n: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(values, dtype=float), (n,)).copy()


def constant(a: float, b: float, id: str | None = None, **meta) -> CoefficientSequence:
    """Toeplitz bands: a_i = a, b_i = b for every size."""

    def gen(k, _seed):
        return np.full(k, float(a)), np.full(k - 1, float(b))

    meta.setdefault("bounded", True)
    meta.setdefault("monotone", True)
    return CoefficientSequence(
        id or f"constant({a},{b})",
        Kind.RECURRENCE_FAMILY,
        gen,
        params={"a": a, "b": b},
        **meta,
    )


def recurrence(
    a: Callable[[np.ndarray, int], np.ndarray],
    b: Callable[[np.ndarray, int], np.ndarray],
    id: str = "recurrence",
    **meta,
) -> CoefficientSequence:
    """Entries given by index formulas ``a(j, k)`` (j = 1..k) and ``b(j, k)`` (j = 1..k-1)."""

    def gen(k, _seed):
        j = np.arange(1, k + 1, dtype=float)
        return _broadcast(a(j, k), k), _broadcast(b(j[:-1], k), k - 1)

    return CoefficientSequence(id, Kind.RECURRENCE_FAMILY, gen, **meta)


def sampled(
    a: Callable[[np.ndarray], np.ndarray],
    b: Callable[[np.ndarray], np.ndarray],
    id: str = "sampled",
    **meta,
) -> CoefficientSequence:
    """Sample functions on the grid s = 1/k, 2/k, ..., 1.

    The off-diagonal keeps the first ``k - 1`` samples of ``b``; dropping
    b(1) moves trace averages by O(1/k).
    """

    def gen(k, _seed):
        s = np.arange(1, k + 1, dtype=float) / k
        return _broadcast(a(s), k), _broadcast(b(s), k)[: k - 1]

    return CoefficientSequence(id, Kind.SAMPLED_FUNCTION, gen, **meta)


def table(
    a: Sequence[float] | Mapping[int, Sequence[float]],
    b: Sequence[float] | Mapping[int, Sequence[float]] | None = None,
    id: str = "table",
    **meta,
) -> CoefficientSequence:
    """Explicit data.

    With flat arrays the size-k bands are prefixes, a^k = (a_1, ..., a_k),
    and sizes beyond the table raise :class:`SizeError`.  With mappings
    ``{k: values}`` each size is looked up directly.
    """
    if isinstance(a, Mapping):
        if not isinstance(b, Mapping):
            raise ConfigurationError("per-size tables need per-size b as well", field="b")
        rows = {int(k): (np.asarray(a[k], float), np.asarray(b[k], float)) for k in a}

        def gen(k, _seed):
            if k not in rows:
                raise SizeError(f"table {id!r} has no entry for k={k}")
            return rows[k]

    else:
        av = np.asarray(a, dtype=float)
        bv = np.asarray(b if b is not None else [], dtype=float)

        def gen(k, _seed):
            if k > av.size or k - 1 > bv.size:
                raise SizeError(f"table {id!r} holds at most k={min(av.size, bv.size + 1)}")
            return av[:k], bv[: k - 1]

    return CoefficientSequence(id, Kind.EXPLICIT_TABLE, gen, **meta)


def random_sequence(
    sampler: Callable[[np.random.Generator, int], Bands],
    seed: int | None,
    id: str = "random",
    **meta,
) -> CoefficientSequence:
    """Random family; ``sampler(rng, k)`` draws one realization of size k."""

    def gen(k, sub_seed):
        return sampler(np.random.Generator(np.random.PCG64(sub_seed)), k)

    return CoefficientSequence(id, Kind.RANDOM, gen, seed=seed, **meta)


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------


def normalize_to_unit_box(seq: CoefficientSequence, bound: float) -> CoefficientSequence:
    """Affine map x -> 1/2 + x/(2M) sending [-M, M] onto [0, 1]."""
    bound = float(bound)
    if not (bound > 0 and math.isfinite(bound)):
        raise ScalingError(f"bound must be positive and finite, got {bound!r}")

    def gen(k, sub_seed):
        a, b = seq.generator(k, sub_seed)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        for v in (a, b):
            bad = np.flatnonzero(~(np.abs(v) <= bound))
            if bad.size:
                i = int(bad[0])
                raise BoundViolationError(k, i + 1, float(v[i]), bound)
        return 0.5 + a / (2 * bound), 0.5 + b / (2 * bound)

    return replace(
        seq,
        id=f"{seq.id}/unit-box({bound:g})",
        generator=gen,
        declared_class=DeclaredClass.S if seq.declared_class is DeclaredClass.S else DeclaredClass.UNKNOWN,
        bounded=True,
    )


def _scale_fn(r: Scale) -> Callable[[int], float]:
    if callable(r):
        return r
    value = float(r)
    return lambda _k: value


def contract(seq: CoefficientSequence, r: Scale, label: str | None = None) -> CoefficientSequence:
    """Divide both bands of size k by r(k) > 0."""
    scale = _scale_fn(r)

    def gen(k, sub_seed):
        rk = float(scale(k))
        if not (rk > 0 and math.isfinite(rk)):
            raise ScalingError(f"contraction r({k}) = {rk!r} must be positive and finite")
        a, b = seq.generator(k, sub_seed)
        return np.asarray(a, dtype=float) / rk, np.asarray(b, dtype=float) / rk

    return replace(
        seq,
        id=f"{seq.id}/{label or 'r'}",
        generator=gen,
        declared_class=DeclaredClass.UNKNOWN,
    )


# ---------------------------------------------------------------------------
# JSON configuration
# ---------------------------------------------------------------------------

_RANDOM_DISTRIBUTIONS = ("normal", "uniform")


def _require(params: Mapping, key: str, where: str):
    if key not in params:
        raise ConfigurationError(f"{where}: missing field {key!r}", field=f"params.{key}")
    return params[key]


def from_config(config: Mapping[str, Any]) -> CoefficientSequence:
    """Build a sequence from ``{id, kind, params, seed?, declared_class}``.

    ``params`` per kind:

    * ``explicit-table``: ``{"a": [...], "b": [...]}`` (prefix tables) or
      ``{"tables": {"<k>": {"a": [...], "b": [...]}}}``.
    * ``sampled-function``: ``{"a": expr(s), "b": expr(s)}``.
    * ``recurrence-family``: ``{"a": expr(j, k, s), "b": expr(j, k, s)}``
      with ``s = j / k``.
    * ``random``: ``{"distribution": "normal" | "uniform", "scale": expr(k),
      "sort": bool}``; normal draws N(0, scale^2), uniform draws U(0, scale).
    """
    if not isinstance(config, Mapping):
        raise ConfigurationError("sequence config must be a JSON object")
    seq_id = config.get("id")
    if not isinstance(seq_id, str) or not seq_id:
        raise ConfigurationError("sequence config needs a non-empty string 'id'", field="id")
    try:
        kind = Kind(config.get("kind"))
    except ValueError:
        raise ConfigurationError(
            f"{seq_id}: unknown kind {config.get('kind')!r}", field="kind"
        ) from None
    try:
        declared = DeclaredClass(config.get("declared_class", "unknown"))
    except ValueError:
        raise ConfigurationError(
            f"{seq_id}: unknown declared_class {config.get('declared_class')!r}",
            field="declared_class",
        ) from None
    params = config.get("params", {})
    if not isinstance(params, Mapping):
        raise ConfigurationError(f"{seq_id}: params must be an object", field="params")
    seed = config.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigurationError(f"{seq_id}: seed must be an integer", field="seed")
    if seed is not None and kind is not Kind.RANDOM:
        raise ConfigurationError(f"{seq_id}: seed is only valid for random sequences", field="seed")
    meta = dict(declared_class=declared, params=dict(params))

    if kind is Kind.EXPLICIT_TABLE:
        if "tables" in params:
            tables = params["tables"]
            try:
                a = {int(k): v["a"] for k, v in tables.items()}
                b = {int(k): v.get("b", []) for k, v in tables.items()}
            except (AttributeError, KeyError, TypeError, ValueError):
                raise ConfigurationError(
                    f"{seq_id}: malformed tables", field="params.tables"
                ) from None
            return table(a, b, id=seq_id, **meta)
        return table(_require(params, "a", seq_id), params.get("b", []), id=seq_id, **meta)

    if kind is Kind.SAMPLED_FUNCTION:
        fa = compile_expr(_require(params, "a", seq_id), ("s",))
        fb = compile_expr(_require(params, "b", seq_id), ("s",))
        return sampled(lambda s: fa(s=s), lambda s: fb(s=s), id=seq_id, **meta)

    if kind is Kind.RECURRENCE_FAMILY:
        fa = compile_expr(_require(params, "a", seq_id), ("j", "k", "s"))
        fb = compile_expr(_require(params, "b", seq_id), ("j", "k", "s"))
        return recurrence(
            lambda j, k: fa(j=j, k=float(k), s=j / k),
            lambda j, k: fb(j=j, k=float(k), s=j / k),
            id=seq_id,
            **meta,
        )

    dist = params.get("distribution", "normal")
    if dist not in _RANDOM_DISTRIBUTIONS:
        raise ConfigurationError(
            f"{seq_id}: distribution must be one of {_RANDOM_DISTRIBUTIONS}",
            field="params.distribution",
        )
    scale = compile_expr(params.get("scale", 1.0), ("k",))
    do_sort = bool(params.get("sort", False))

    def sampler(rng, k):
        sigma = float(scale(k=float(k)))
        if dist == "normal":
            a, b = rng.normal(0.0, sigma, k), rng.normal(0.0, sigma, k)
        else:
            a, b = rng.uniform(0.0, sigma, k), rng.uniform(0.0, sigma, k)
        if do_sort:
            a, b = np.sort(a), np.sort(b)
        return a, b[: k - 1]

    return random_sequence(sampler, seed, id=seq_id, monotone=do_sort or None, **meta)


def load_config(path: str | Path) -> CoefficientSequence:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}", field="config") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}", field="config") from None
    return from_config(data)
