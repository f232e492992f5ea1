"""Restricted arithmetic expressions for JSON-declared sequences and measures.

Expressions are parsed with :mod:`ast` and only a whitelisted subset of
nodes is evaluated, so configuration files cannot execute arbitrary code::

    >>> f = compile_expr("sqrt(j / 2)", ("j", "k"))
    >>> float(f(j=8, k=10))
    2.0
"""

from __future__ import annotations

import ast
import operator
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigurationError

_FUNCTIONS: dict[str, Callable] = {
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "log1p": np.log1p,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "arccos": np.arccos,
    "arcsin": np.arcsin,
    "abs": np.abs,
    "floor": np.floor,
    "ceil": np.ceil,
    "sign": np.sign,
    "minimum": np.minimum,
    "maximum": np.maximum,
    "where": np.where,
}

_CONSTANTS = {"pi": np.pi, "e": np.e}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
    ast.Pow: operator.pow,
}

_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}

_COMPARE = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
    ast.Eq: operator.eq,
    ast.NotEq: operator.ne,
}


def _check(node: ast.AST, names: frozenset[str], source: str) -> None:
    for sub in ast.walk(node):
        if isinstance(sub, (ast.Expression, ast.Load)):
            continue
        if isinstance(sub, ast.Constant):
            if not isinstance(sub.value, (int, float)) or isinstance(sub.value, bool):
                raise ConfigurationError(f"unsupported literal in {source!r}")
        elif isinstance(sub, ast.Name):
            if sub.id not in names and sub.id not in _CONSTANTS and sub.id not in _FUNCTIONS:
                raise ConfigurationError(f"unknown name {sub.id!r} in {source!r}")
        elif isinstance(sub, ast.Call):
            if not isinstance(sub.func, ast.Name) or sub.func.id not in _FUNCTIONS:
                raise ConfigurationError(f"unsupported call in {source!r}")
            if sub.keywords:
                raise ConfigurationError(f"keyword arguments not allowed in {source!r}")
        elif isinstance(sub, ast.BinOp):
            if type(sub.op) not in _BINOPS:
                raise ConfigurationError(f"unsupported operator in {source!r}")
        elif isinstance(sub, ast.UnaryOp):
            if type(sub.op) not in _UNARY:
                raise ConfigurationError(f"unsupported operator in {source!r}")
        elif isinstance(sub, ast.Compare):
            if any(type(op) not in _COMPARE for op in sub.ops):
                raise ConfigurationError(f"unsupported comparison in {source!r}")
        elif isinstance(sub, tuple(_BINOPS) + tuple(_UNARY) + tuple(_COMPARE)):
            continue
        else:
            raise ConfigurationError(
                f"unsupported syntax {type(sub).__name__} in {source!r}"
            )


def _eval(node: ast.AST, env: dict):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        return _CONSTANTS[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, env))
    if isinstance(node, ast.Call):
        return _FUNCTIONS[node.func.id](*(_eval(a, env) for a in node.args))
    if isinstance(node, ast.Compare):
        left = _eval(node.left, env)
        result = None
        for op, comp in zip(node.ops, node.comparators):
            right = _eval(comp, env)
            step = _COMPARE[type(op)](left, right)
            result = step if result is None else np.logical_and(result, step)
            left = right
        return result
    raise ConfigurationError(f"cannot evaluate {type(node).__name__}")


def compile_expr(source: str | int | float, names: Iterable[str]) -> Callable[..., np.ndarray]:
    """Compile ``source`` into a callable taking the given variable names as keywords.

    Numeric literals are accepted directly and produce constant functions.
    The returned callable broadcasts its result against its array arguments.
    """
    names = frozenset(names)
    if isinstance(source, (int, float)) and not isinstance(source, bool):
        value = float(source)

        def constant(**env):
            shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
            return np.full(shape, value)

        return constant
    if not isinstance(source, str):
        raise ConfigurationError(f"expression must be a string or number, got {source!r}")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse expression {source!r}: {exc.msg}") from None
    _check(tree, names, source)

    def evaluate(**env):
        unknown = set(env) - names
        if unknown:
            raise ConfigurationError(f"unexpected variables {sorted(unknown)}")
        with np.errstate(all="ignore"):
            out = np.asarray(_eval(tree, env), dtype=float)
        shape = np.broadcast_shapes(out.shape, *(np.shape(v) for v in env.values()))
        return np.broadcast_to(out, shape).copy()

    evaluate.source = source  # type: ignore[attr-defined]
    return evaluate
