#!/usr/bin/env python3
"""
Closed-form sign correlation limits
"""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from signcorr.errors import InvalidInputError
from signcorr.predictors import (
    IRRATIONAL,
    PredictorMethod,
    RationalRatio,
    WkbFamily,
    chebyshev_orbit_density,
    hermite_limit,
    laguerre_limit,
    parse_ratio,
    predict,
    theorem1_limit,
    theorem1_range,
    theorem2_limit,
    to_exact,
    wkb_family_limit,
)
from signcorr.special_functions import AngleFraction

ODD = [k for k in range(-99, 100) if k % 2 != 0]


def test_theorem1_bounds_over_random_rays():
    rng = random.Random(2024)
    checked = 0
    while checked < 10_000:
        p, q = rng.choice(ODD), rng.choice(ODD)
        if math.gcd(p, q) != 1 or abs(p * q) < 3:
            continue
        value = theorem1_limit(RationalRatio(p, q), rng.random())
        assert 1 / 3 - 1e-12 <= value <= 2 / 3 + 1e-12
        checked += 1


def test_theorem1_extremes_are_attained():
    assert theorem1_limit(RationalRatio(1, 3), Fraction(0)) == pytest.approx(1 / 3, abs=1e-15)
    assert theorem1_limit(RationalRatio(1, 3), Fraction(1, 4)) == pytest.approx(2 / 3, abs=1e-15)
    assert theorem1_range(RationalRatio(1, 3)) == pytest.approx((1 / 3, 2 / 3))
    assert theorem1_range(RationalRatio(2, 3)) == (0.5, 0.5)


def test_theorem2_equals_two_phase_family():
    family = WkbFamily.schrodinger()
    for p in ODD:
        for q in ODD:
            if math.gcd(p, q) != 1:
                continue
            ratio = RationalRatio(p, q)
            assert abs(theorem2_limit(ratio) - wkb_family_limit(ratio, family)) <= 1e-14


@pytest.mark.parametrize("ratio, expected", [
    ("1/5", 0.6),
    ("1/3", 0.5),
    ("3/7", 0.5 + 1 / 42),
    ("1/2", 0.5),
    ("irrational", 0.5),
])
def test_theorem2_values(ratio, expected):
    assert theorem2_limit(parse_ratio(ratio)) == pytest.approx(expected)


def test_hermite_limits():
    assert hermite_limit("0.3", "1.5") == pytest.approx(0.6)
    assert hermite_limit("0.3", "0.9") == pytest.approx(0.5)
    assert hermite_limit("0.3", "-0.3") == pytest.approx(0.5)
    assert hermite_limit(Fraction(1, 7), Fraction(9, 7)) == pytest.approx(0.5 + 1 / 18)
    with pytest.raises(InvalidInputError):
        hermite_limit("0.3", "0.5")


def test_laguerre_limits():
    assert laguerre_limit("0.5", "1.5", 3) == pytest.approx(2 / 3)
    assert laguerre_limit("0.5", "1.5", 2) == pytest.approx(0.5)
    assert laguerre_limit("1", "2", 3) == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        laguerre_limit("0.5", "1.5", 0)


def test_laguerre_family_matches_single_phase():
    odd = range(1, 50, 2)
    for d in range(1, 9):
        family = WkbFamily.laguerre(d)
        for p in odd:
            for q in odd:
                if math.gcd(p, q) != 1:
                    continue
                expected = wkb_family_limit(RationalRatio(p, q), family)
                assert laguerre_limit(p, q, d) == pytest.approx(expected, abs=1e-14)


def test_laguerre_phase_wraps_for_high_dimension():
    assert WkbFamily.laguerre(9).phase_classes == ((0.0, 1.0),)
    assert laguerre_limit(1, 3, 9) == pytest.approx(laguerre_limit(1, 3, 1))


def test_hermite_limit_matches_theorem2():
    x = Fraction(3, 10)
    for m in [k for k in range(-99, 100) if abs(k) >= 2]:
        assert hermite_limit(x, m * x) == pytest.approx(theorem2_limit(RationalRatio(1, m)), abs=1e-15)


def test_theorem2_is_symmetric():
    values = range(-25, 26)
    for p in values:
        for q in values:
            if p == 0 or q == 0 or math.gcd(p, q) != 1:
                continue
            value = theorem2_limit(RationalRatio(p, q))
            assert theorem2_limit(RationalRatio(q, p)) == value
            assert theorem2_limit(RationalRatio(-p, -q)) == value


@pytest.mark.parametrize("classes", [
    ((1.0, 1.0),),
    ((-0.25, 1.0),),
    ((0.0, 0.5), (1.25, 0.5)),
])
def test_wkb_family_rejects_phases_outside_unit_interval(classes):
    with pytest.raises(InvalidInputError):
        WkbFamily(classes)


def test_wkb_family_rejects_bad_weights():
    with pytest.raises(InvalidInputError):
        WkbFamily(())
    with pytest.raises(InvalidInputError):
        WkbFamily(((0.0, 0.5), (0.25, 0.25)))
    with pytest.raises(InvalidInputError):
        WkbFamily(((0.0, 1.5), (0.25, -0.5)))

def test_chebyshev_orbit_density_at_tenth():
    assert chebyshev_orbit_density(AngleFraction.rational(1, 10), 3) == Fraction(1, 5)


@given(st.integers(min_value=-10**6, max_value=10**6), st.integers(min_value=1, max_value=10**6))
@settings(max_examples=100, deadline=None)
def test_parse_ratio_reduces(p, q):
    if p == 0:
        return
    ratio = parse_ratio(f"{p}/{q}")
    assert Fraction(ratio.p, ratio.q) == Fraction(p, q)
    assert math.gcd(ratio.p, ratio.q) == 1
    assert ratio.q > 0


def test_parse_ratio_rejects_decimals():
    with pytest.raises(InvalidInputError):
        parse_ratio("0.5")
    with pytest.raises(InvalidInputError):
        parse_ratio("0/3")
    assert parse_ratio("IRRATIONAL") is IRRATIONAL
    assert str(parse_ratio("1/-3")) == "-1/3"


def test_exact_inputs_only():
    with pytest.raises(InvalidInputError):
        to_exact(0.3)
    with pytest.raises(InvalidInputError):
        to_exact(True)
    assert to_exact("0.3") == Fraction(3, 10)
    with pytest.raises(InvalidInputError):
        RationalRatio(2, 4)


def test_predict_records_flags():
    result = predict(PredictorMethod.THEOREM1, ratio=RationalRatio(1, 1))
    assert result.flags
    assert result.limit == pytest.approx(1.0)
    result = predict(PredictorMethod.THEOREM2, ratio=parse_ratio("1/5"))
    assert result.limit == pytest.approx(0.6)
    assert result.params == {"ratio": "1/5"}
    result = predict(PredictorMethod.ORBIT, angle=AngleFraction.rational(1, 10), ratio=3)
    assert result.params["exact"] == "1/5"
    assert result.params["angle"] == "1/10"
