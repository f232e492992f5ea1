import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobitrace.eigensolve import (
    PIVOT_FLOOR,
    all_eigenvalues,
    default_tolerance,
    spectrum_of,
    sturm_count,
    trace_average,
)
from jacobitrace.errors import DomainError, ToleranceError
from jacobitrace.jacobi import assemble

from oracles import charpoly, cyclic_jacobi_eigenvalues, dense, polyval, scipy_spectrum, toeplitz_eigenvalues

T3 = assemble([0, 0, 0], [1, 1])


def test_t3_characteristic_polynomial_is_cubic_minus_2x():
    assert [float(c) for c in charpoly(dense([0, 0, 0], [1, 1]))] == [0, -2, 0, 1]


def test_sturm_count_examples():
    assert sturm_count(T3, 0.0) == 1
    assert sturm_count(T3, -T3.spectrum_bound() - 1) == 0
    assert sturm_count(T3, T3.spectrum_bound() + 1) == 3
    assert sturm_count(T3, math.inf) == 3
    assert sturm_count(T3, -math.inf) == 0
    with pytest.raises(DomainError):
        sturm_count(T3, math.nan)


def test_t3_spectrum():
    s = all_eigenvalues(T3, 1e-12)
    np.testing.assert_allclose(s.eigenvalues, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-12)
    assert s.residual_bound == 1e-12


def test_scalar():
    assert all_eigenvalues(assemble([5.0], [])).eigenvalues.tolist() == [5.0]


@pytest.mark.parametrize("tol", [0.0, -1e-3])
def test_nonpositive_tolerance(tol):
    with pytest.raises(ToleranceError):
        all_eigenvalues(T3, tol)


def test_tolerance_below_resolution():
    with pytest.raises(ToleranceError):
        all_eigenvalues(assemble([1e6, 0], [1]), 1e-12)


def test_default_tolerance():
    assert default_tolerance(T3) == pytest.approx(1e-10 * T3.spectrum_bound())


@pytest.mark.parametrize("k", [2, 3])
def test_toeplitz_closed_form_on_small_sizes(k):
    a, b = 0.3, 0.2
    coeffs = charpoly(dense(np.full(k, a), np.full(k - 1, b)))
    roots = toeplitz_eigenvalues(a, b, k)
    for r in roots:
        assert abs(polyval(coeffs, r)) < 1e-14
    # the j pi / k variant is not a root
    wrong = a + 2 * b * math.cos(math.pi / k)
    assert abs(polyval(coeffs, wrong)) > 1e-3


def test_trace_average_examples():
    s = all_eigenvalues(T3, 1e-13)
    assert trace_average(s, lambda x: np.ones_like(x)) == 1.0
    assert abs(trace_average(s, lambda x: x)) < 1e-13
    assert trace_average(s, lambda x: x ** 2) == pytest.approx(4 / 3, abs=1e-12)


def _tridiag(k):
    return st.tuples(
        st.lists(st.floats(-3, 3), min_size=k, max_size=k),
        st.lists(st.floats(-3, 3), min_size=k - 1, max_size=k - 1),
    )


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8).flatmap(_tridiag))
def test_matches_cyclic_jacobi(bands):
    d, e = bands
    s = all_eigenvalues(assemble(d, e), 1e-11)
    np.testing.assert_allclose(s.eigenvalues, cyclic_jacobi_eigenvalues(dense(d, e)), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40).flatmap(_tridiag), st.floats(-7, 7))
def test_sturm_count_matches_oracle(bands, x):
    d, e = bands
    lam = scipy_spectrum(d, e)
    if np.min(np.abs(lam - x)) < 1e-9:
        return
    assert sturm_count(assemble(d, e), x) == int(np.count_nonzero(lam < x))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30).flatmap(_tridiag))
def test_sturm_monotone(bands):
    d, e = bands
    J = assemble(d, e)
    xs = np.linspace(-10, 10, 81)
    counts = [sturm_count(J, x) for x in xs]
    assert counts == sorted(counts)
    assert counts[-1] == J.k


@settings(max_examples=30, deadline=None)
@given(
    st.integers(3, 30).flatmap(
        lambda k: st.tuples(
            st.lists(st.floats(-2, 2), min_size=k, max_size=k),
            st.lists(st.floats(0.05, 2), min_size=k - 1, max_size=k - 1),
        )
    )
)
def test_interlacing_and_simplicity(bands):
    d, e = bands
    full = all_eigenvalues(assemble(d, e), 1e-12).eigenvalues
    sub = all_eigenvalues(assemble(d[:-1], e[:-1]), 1e-12).eigenvalues
    assert np.all(np.diff(full) > 0)
    assert np.all(full[:-1] <= sub + 1e-11) and np.all(sub <= full[1:] + 1e-11)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60).flatmap(_tridiag))
def test_trace_identities(bands):
    d, e = bands
    s = all_eigenvalues(assemble(d, e))
    assert abs(math.fsum(s.eigenvalues) - math.fsum(d)) <= 10 * s.k * s.residual_bound
    target = math.fsum(np.square(d)) + 2 * math.fsum(np.square(e))
    assert abs(s.power_sum(2) - target) <= 10 * s.k * s.residual_bound * (1 + 2 * np.max(np.abs(s.eigenvalues)))


def test_against_lapack_large():
    rng = np.random.default_rng(0)
    d = rng.normal(size=3000)
    e = rng.normal(size=2999)
    s = spectrum_of(d, e)
    np.testing.assert_allclose(s.eigenvalues, scipy_spectrum(d, e), atol=1e-9)


def test_graded_and_tiny_offdiagonals():
    # widely graded entries and exact zeros exercise the pivot guard
    d = np.array([1e-300, 0.0, 1e3, -1e3, 0.0])
    e = np.array([0.0, 1e-200, 1.0, 0.0])
    s = spectrum_of(d, e)
    np.testing.assert_allclose(s.eigenvalues, scipy_spectrum(d, e), atol=1e-7)
    assert PIVOT_FLOOR > 0


def test_spectrum_inside_gershgorin():
    rng = np.random.default_rng(1)
    for _ in range(20):
        d = rng.uniform(-1, 1, 50)
        e = rng.uniform(-1, 1, 49)
        J = assemble(d, e)
        s = all_eigenvalues(J)
        lo, hi = J.gershgorin_interval()
        assert lo - 1e-9 <= s.eigenvalues[0] and s.eigenvalues[-1] <= hi + 1e-9
        assert np.max(np.abs(s.eigenvalues)) <= J.spectrum_bound() + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 200), st.integers(0, 2**32))
def test_unit_box_spectrum_within_minus2_3(k, seed):
    rng = np.random.default_rng(seed)
    s = spectrum_of(rng.uniform(0, 1, k), rng.uniform(0, 1, k - 1))
    assert -2 - 1e-9 <= s.eigenvalues[0] and s.eigenvalues[-1] <= 3 + 1e-9


def test_unit_box_corner_approaches_gershgorin_edge():
    # a = b = 1 pushes the top eigenvalue toward 3, still inside 2 sqrt(3)
    s = spectrum_of(np.ones(400), np.ones(399))
    assert 2.99 < s.eigenvalues[-1] <= 3.0
    assert s.eigenvalues[-1] < 2 * math.sqrt(3)


def test_threads_env_does_not_change_results(monkeypatch):
    rng = np.random.default_rng(2)
    d, e = rng.normal(size=2048), rng.normal(size=2047)
    monkeypatch.setenv("JS_THREADS", "1")
    one = spectrum_of(d, e).eigenvalues
    monkeypatch.setenv("JS_THREADS", "4")
    four = spectrum_of(d, e).eigenvalues
    assert one.tobytes() == four.tobytes()
