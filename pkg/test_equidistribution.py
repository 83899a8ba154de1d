#!/usr/bin/env python3
"""
Fixed-point rotations, discrepancy and the eigenvalue equidistribution check
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from signcorr.equidistribution import (
    SCALE,
    FixedPointFraction,
    frac_sequence,
    h2_report,
    iter_fixed,
    power_of_two_checkpoints,
    quarter_sign,
    star_discrepancy,
    weyl_profile,
    weyl_sum,
)
from signcorr.errors import InvalidInputError
from signcorr.special_functions import hermite_eigenvalue


def test_star_discrepancy_single_point():
    assert star_discrepancy([0.5]) == pytest.approx(0.5)
    assert star_discrepancy([0.0]) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 7, 100, 1000])
def test_centered_grid_is_optimal(n):
    points = (np.arange(n) + 0.5) / n
    assert star_discrepancy(points) == pytest.approx(1 / (2 * n))


@given(st.lists(st.floats(min_value=0.0, max_value=0.999999, allow_nan=False), min_size=1, max_size=200))
@settings(max_examples=100, deadline=None)
def test_star_discrepancy_bounds(points):
    d = star_discrepancy(points)
    assert 1 / (2 * len(points)) - 1e-12 <= d <= 1.0
    assert star_discrepancy(list(reversed(points))) == d


def test_empty_point_set_rejected():
    with pytest.raises(InvalidInputError):
        star_discrepancy([])


def test_golden_rotation_has_small_discrepancy():
    golden = FixedPointFraction.from_surd(5, -1, 2)
    points = list(frac_sequence(golden, 1000))
    assert star_discrepancy(points) < 0.01
    assert weyl_sum(points, 1) < 0.01


def test_rational_rotation_tracks_exact_values():
    values = list(frac_sequence(Fraction(1, 10), 30))
    for n, value in enumerate(values):
        gap = abs(value - (n / 10) % 1)
        assert min(gap, 1 - gap) < 1e-12


def test_fixed_point_rotation_does_not_drift():
    alpha = FixedPointFraction.from_fraction(Fraction(1, 3))
    raws = list(iter_fixed(alpha, 3 * 10**5 + 1))
    assert raws[-1] == (alpha * (3 * 10**5)).raw
    assert raws[-1] == (alpha.raw * 3 * 10**5) % SCALE


def test_surd_is_correctly_rounded():
    root2 = FixedPointFraction.from_surd(2)
    exact = Fraction(math.isqrt(2 << 400), 1 << 200) % 1
    assert abs(root2.to_fraction() - exact) <= Fraction(1, SCALE)
    assert root2.to_float() == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    with pytest.raises(InvalidInputError):
        FixedPointFraction.from_surd(-2)


def test_quarter_points_have_zero_sign():
    assert FixedPointFraction.from_fraction(Fraction(1, 4)).quarter_sign() == 0
    assert FixedPointFraction.from_fraction(Fraction(3, 4)).quarter_sign() == 0
    assert FixedPointFraction.from_fraction(Fraction(1, 10)).quarter_sign() == 1
    assert quarter_sign(SCALE // 2) == -1


def test_coerce():
    assert FixedPointFraction.coerce(0.5).raw == SCALE // 2
    assert FixedPointFraction.coerce(Fraction(5, 4)).to_fraction() == Fraction(1, 4)
    with pytest.raises(InvalidInputError):
        FixedPointFraction.coerce("0.5")
    with pytest.raises(InvalidInputError):
        FixedPointFraction.from_float(math.inf)


def test_weyl_sums():
    with pytest.raises(InvalidInputError):
        weyl_sum([0.1, 0.2], 0)
    grid = np.arange(64) / 64
    assert weyl_sum(grid, 1) == pytest.approx(0.0, abs=1e-12)
    assert weyl_sum(grid, 64) == pytest.approx(1.0)
    assert set(weyl_profile(grid)) == {1, 2, 3}


def test_frac_sequence_rejects_empty_run():
    with pytest.raises(InvalidInputError):
        list(frac_sequence(0.1, 0))


def test_power_of_two_checkpoints():
    assert power_of_two_checkpoints(10) == [1, 2, 4, 8, 10]
    assert power_of_two_checkpoints(8) == [1, 2, 4, 8]
    assert power_of_two_checkpoints(1) == [1]
    with pytest.raises(InvalidInputError):
        power_of_two_checkpoints(0)


def test_h2_report_structure():
    lambdas = [hermite_eigenvalue(n) for n in range(200)]
    report = h2_report(lambdas, 0.3)
    assert [s.parity for s in report.series] == ["even", "odd"]
    assert all(s.count == 100 for s in report.series)
    assert [c.n for c in report.series[0].checkpoints] == [1, 2, 4, 8, 16, 32, 64, 100]
    even = np.mod(np.sqrt(np.asarray(lambdas[0::2])) * 0.3, 1.0)
    assert report.discrepancy_at("even", 64) == pytest.approx(star_discrepancy(even[:64]))
    assert report.disclaimer
    with pytest.raises(KeyError):
        report.discrepancy_at("odd", 3)


def test_h2_report_threshold_and_errors():
    lambdas = [hermite_eigenvalue(n) for n in range(40)]
    strict = h2_report(lambdas, 0.3, threshold=0.0)
    assert not strict.equidistributed
    loose = h2_report(lambdas, 0.3, threshold=1.0)
    assert loose.equidistributed
    with pytest.raises(InvalidInputError):
        h2_report(lambdas, 0.0)
    with pytest.raises(InvalidInputError):
        h2_report([1.0], 0.3)
    with pytest.raises(InvalidInputError):
        h2_report(lambdas, 0.3, checkpoints=[50])
