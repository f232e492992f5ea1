import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobitrace.errors import DomainError, ShapeError, SimilarityError
from jacobitrace.jacobi import assemble, read_bands_csv, symmetrize_similar, write_bands_csv

from oracles import charpoly, cyclic_jacobi_eigenvalues, dense


def test_assemble_toeplitz_and_scalar():
    J = assemble([0, 0, 0], [1, 1])
    assert J.k == 3
    np.testing.assert_array_equal(dense(J.diagonal, J.offdiagonal), [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert assemble([0.5], []).k == 1


def test_van_vleck_k2_entries():
    k = 2
    j = np.arange(1, k + 1)
    a = (j - 1) / k
    b = (j[:-1] / k) * np.sqrt(1 - (j[:-1] / k) ** 2)
    J = assemble(a, b)
    np.testing.assert_allclose(J.diagonal, [0, 0.5])
    np.testing.assert_allclose(J.offdiagonal, [math.sqrt(3) / 4])


def test_shape_and_domain_errors():
    with pytest.raises(ShapeError):
        assemble([0, 0], [1, 1])
    with pytest.raises(ShapeError):
        assemble([], [])
    with pytest.raises(DomainError):
        assemble([0, np.nan], [1])


def test_symmetrize_hermite_h3():
    J = symmetrize_similar([0, 0, 0], [1, 2], [0.5, 0.5])
    np.testing.assert_allclose(J.offdiagonal, [math.sqrt(0.5), 1.0])


def test_symmetrize_identity_and_squares():
    J = symmetrize_similar([1, 2, 3], [0.3, 0.7], [0.3, 0.7])
    np.testing.assert_allclose(J.offdiagonal, [0.3, 0.7])
    J = symmetrize_similar([0, 0, 0], [4, 9], [1, 1])
    np.testing.assert_allclose(J.offdiagonal, [2, 3])
    nonsym = np.diag([0.0, 0, 0]) + np.diag([1.0, 1], 1) + np.diag([4.0, 9], -1)
    expected = np.sort(np.linalg.eigvals(nonsym).real)
    np.testing.assert_allclose(cyclic_jacobi_eigenvalues(dense(J.diagonal, J.offdiagonal)), expected, atol=1e-12)


@pytest.mark.parametrize("lower,upper", [([1, -1], [1, 1]), ([0, 1], [1, 1])])
def test_symmetrize_rejects_nonpositive_products(lower, upper):
    with pytest.raises(SimilarityError):
        symmetrize_similar([0, 0, 0], lower, upper)


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 6).flatmap(
        lambda k: st.tuples(
            st.lists(st.floats(-2, 2), min_size=k, max_size=k),
            st.lists(st.floats(0.1, 3), min_size=k - 1, max_size=k - 1),
            st.lists(st.floats(0.1, 3), min_size=k - 1, max_size=k - 1),
        )
    )
)
def test_symmetrize_preserves_characteristic_polynomial(bands):
    d, lower, upper = bands
    J = symmetrize_similar(d, lower, upper)
    nonsym = np.diag(d) + np.diag(upper, 1) + np.diag(lower, -1)
    p_sym = charpoly(dense(J.diagonal, J.offdiagonal))
    p_gen = charpoly(nonsym)
    for c1, c2 in zip(p_sym, p_gen):
        assert math.isclose(float(c1), float(c2), rel_tol=1e-10, abs_tol=1e-10)


def test_trace_is_exact_sum():
    J = assemble([0.1, 0.2, 0.3], [1, 1])
    assert J.trace() == math.fsum([0.1, 0.2, 0.3])


def test_sqrt3_bound_is_not_an_enclosure():
    # T_6(0, 1) has top eigenvalue 2 cos(pi/7) ~ 1.80 > sqrt(3)
    J = assemble(np.zeros(6), np.ones(5))
    top = max(cyclic_jacobi_eigenvalues(dense(J.diagonal, J.offdiagonal)))
    assert top > J.sqrt3_bound()
    assert top <= J.spectrum_bound()


def test_gershgorin_interval():
    J = assemble([0.0, 1.0, 0.5], [0.5, 0.25])
    lo, hi = J.gershgorin_interval()
    assert (lo, hi) == (-0.5, 1.75)


def test_bands_csv_roundtrip():
    J = assemble([0.1, 1 / 3, 2.0], [math.pi, math.e])
    text = write_bands_csv(J.diagonal, J.offdiagonal)
    assert text.splitlines()[0] == "index,diag,offdiag"
    assert text.splitlines()[-1].endswith(",")
    back = read_bands_csv(io.StringIO(text))
    assert back.diagonal.tobytes() == J.diagonal.tobytes()
    assert back.offdiagonal.tobytes() == J.offdiagonal.tobytes()
