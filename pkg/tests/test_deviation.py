import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacobitrace.deviation import class_slope, deviation_report, discrepancy
from jacobitrace.ensembles import builtin
from jacobitrace.errors import RegressionError, SizeError
from jacobitrace.sequences import constant, random_sequence, recurrence


def test_ramp_example():
    r = deviation_report(np.arange(1, 6) / 5)
    assert r.total_variation == pytest.approx(0.8)
    assert r.monotone_fraction == 1.0
    assert r.discrepancy == pytest.approx(0.2)


def test_constant_example():
    r = deviation_report(np.full(10, 0.3))
    assert r.total_variation == 0.0
    assert r.monotone_fraction == 1.0


def test_alternating_example():
    r = deviation_report(np.arange(100) % 2)
    assert r.total_variation == 99
    assert r.tv_per_k == pytest.approx(0.99)


def test_discrepancy_only_in_unit_interval():
    assert deviation_report(np.array([0.0, 2.0])).discrepancy is None
    assert deviation_report(np.array([0.0, 2.0]), unit_interval=True).discrepancy is not None


def test_size_error():
    with pytest.raises(SizeError):
        deviation_report(np.array([1.0]))


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=200))
def test_reversal_and_brute_force_counts(values):
    a = np.array(values)
    fwd, rev = deviation_report(a), deviation_report(a[::-1])
    assert fwd.total_variation == pytest.approx(rev.total_variation, rel=1e-12, abs=1e-12)
    brute = sum(1 for i in range(len(values) - 1) if values[i] <= values[i + 1]) / (len(values) - 1)
    assert fwd.monotone_fraction == brute
    assert fwd.total_variation >= 0 and 0 <= fwd.monotone_fraction <= 1


@given(st.integers(1, 300))
def test_discrepancy_of_uniform_grid(k):
    assert discrepancy(np.arange(1, k + 1) / k) == pytest.approx(1 / k)


LADDER = [250, 500, 1000, 2000, 4000]


def test_ramp_slope_bounded():
    slope = class_slope(builtin("ramp").sequence, LADDER)
    assert abs(slope.tv_exponent) < 0.05
    assert slope.maxabs_growth == "bounded"
    assert slope.consistent_with_s


def test_iid_noise_slope_near_one():
    exps = []
    for seed in range(4):
        seq = random_sequence(lambda rng, k: (rng.uniform(0, 1, k), rng.uniform(0, 1, k - 1)), seed)
        exps.append(class_slope(seq, LADDER).tv_exponent)
    assert all(0.95 < e < 1.05 for e in exps)
    assert not class_slope(seq, LADDER).consistent_with_s


def test_logarithmic_growth():
    seq = recurrence(lambda j, k: np.log(j + 1), lambda j, k: np.zeros_like(j))
    assert class_slope(seq, LADDER).maxabs_growth == "logarithmic"
    fast = recurrence(lambda j, k: np.sqrt(j), lambda j, k: np.zeros_like(j))
    assert class_slope(fast, LADDER).maxabs_growth == "faster"


@pytest.mark.parametrize("eid", ["ramp", "van_vleck", "two_atom", "legendre", "nevai_ullman"])
def test_s_fixtures_have_sublinear_variation(eid):
    assert class_slope(builtin(eid).sequence, [1000, 2000, 5000, 10000]).tv_exponent < 1 - 1e-2


def test_degenerate_ladders():
    with pytest.raises(RegressionError):
        class_slope(constant(0, 1), [10, 20, 40])
    with pytest.raises(RegressionError):
        class_slope(constant(0, 1), [2, 4, 8, 16])
