import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobitrace.ensembles import builtin
from jacobitrace.errors import DomainError, OverflowGuardError, SizeError
from jacobitrace.moments import (
    approx_moment_trace,
    moment_deviation_ladder,
    moment_report,
    multinomial_coeff,
    with_phantom,
)
from jacobitrace.sequences import constant, recurrence

from oracles import cyclic_jacobi_eigenvalues, dense


def _factorial_table(n):
    table = [1]
    for i in range(1, n + 1):
        table.append(table[-1] * i)
    return table


@pytest.mark.parametrize("n,j,expected", [(2, 1, 2), (4, 1, 12), (4, 2, 6), (6, 3, 20)])
def test_multinomial_examples(n, j, expected):
    assert multinomial_coeff(n, j) == expected


def test_multinomial_against_factorial_table():
    f = _factorial_table(40)
    for n in range(41):
        for j in range(n // 2 + 1):
            assert multinomial_coeff(n, j) == f[n] // (f[j] * f[j] * f[n - 2 * j])


def test_multinomial_errors():
    with pytest.raises(DomainError):
        multinomial_coeff(3, 2)
    with pytest.raises(OverflowGuardError):
        multinomial_coeff(41, 0)


def test_approx_examples():
    a, b = np.full(4, 0.5), np.full(3, 0.25)
    assert approx_moment_trace(a, b, 2) == pytest.approx(1.5, abs=1e-15)
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=9), rng.normal(size=8)
    assert approx_moment_trace(a, b, 1) == pytest.approx(math.fsum(a), abs=1e-14)
    assert approx_moment_trace(a, b, 0) == 9


@pytest.mark.parametrize("k", [6, 9, 25])
def test_fourth_moment_of_free_toeplitz(k):
    # closed walks of length 4 on a path: sum deg^2 + #(distance-2 ordered pairs) = 6k - 10
    a, b = np.zeros(k), np.ones(k - 1)
    approx = approx_moment_trace(a, b, 4)
    assert approx == 6 * k
    exact = float(np.sum(cyclic_jacobi_eigenvalues(dense(a, b)) ** 4))
    assert exact == pytest.approx(6 * k - 10, abs=1e-9)
    assert moment_report(a, b, 4).deviation_per_k == pytest.approx(10 / k, abs=1e-9)


def test_phantom_convention():
    assert with_phantom(np.array([0.1, 0.2]), 3).tolist() == [0.1, 0.2, 0.2]
    assert with_phantom(np.array([]), 1).tolist() == [0.0]
    with pytest.raises(SizeError):
        with_phantom(np.array([0.1]), 4)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32))
def test_low_orders_exact(k, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, k), rng.uniform(-1, 1, k - 1)
    for n in (0, 1):
        assert moment_report(a, b, n).deviation_per_k < 1e-9
    r = moment_report(a, b, 2)
    # only the phantom term 2 b_k^2 separates the two sides
    assert abs(r.approx_trace - r.exact_trace - 2 * b[-1] ** 2) < 1e-8
    assert r.deviation_per_k <= 2 / k + 1e-9


@given(st.lists(st.floats(-2, 2), min_size=2, max_size=30), st.integers(0, 8))
def test_reversal_invariance(values, n):
    a = np.array(values)
    b = np.abs(a)
    fwd = approx_moment_trace(a, b, n)
    rev = approx_moment_trace(a[::-1], b[::-1], n)
    assert math.isclose(fwd, rev, rel_tol=1e-12, abs_tol=1e-12)


def test_ladder_validation():
    seq = constant(0.5, 0.25)
    with pytest.raises(SizeError):
        moment_deviation_ladder(seq, 2, [])
    with pytest.raises(SizeError):
        moment_deviation_ladder(seq, 2, [10, 10])
    with pytest.raises(OverflowGuardError):
        moment_deviation_ladder(seq, 41, [10])
    assert all(r.deviation_per_k == 0 or r.deviation_per_k < 1e-12 for r in moment_deviation_ladder(seq, 0, [5, 10]))


def test_ramp_third_moment_decreases():
    seq = builtin("ramp").sequence
    devs = [r.deviation_per_k for r in moment_deviation_ladder(seq, 3, [250, 500, 1000, 2000])]
    assert all(d2 < d1 for d1, d2 in zip(devs, devs[1:]))


@pytest.mark.parametrize("eid", ["toeplitz", "ramp", "van_vleck", "two_atom", "legendre"])
def test_halving_property_for_s_class_fixtures(eid):
    seq = builtin(eid).sequence
    for n in (2, 3, 4, 5, 6):
        small, large = moment_deviation_ladder(seq, n, [200, 400])
        assert large.deviation_per_k < small.deviation_per_k or large.deviation_per_k < 1e-12
