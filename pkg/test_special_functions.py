#!/usr/bin/env python3
"""
Sign streams of Hermite, Laguerre and Chebyshev families
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from scipy import integrate, special

from signcorr.errors import InvalidInputError
from signcorr.special_functions import (
    AngleFraction,
    ChebyshevSequence,
    HermitePoint,
    HermiteSequence,
    LaguerreParams,
    LaguerreSequence,
    chebyshev_sign_sequence,
    hermite_eigenvalue,
    hermite_function_values,
    hermite_sign_sequence,
    laguerre_eigenvalue,
    laguerre_sign_sequence,
    laguerre_values,
)
from signcorr.torus_dynamics import cosine_sign


@pytest.mark.parametrize("x", [0.3, 1.5, -0.7])
def test_hermite_signs_match_scipy(x):
    t = math.sqrt(2 * math.pi) * x
    signs = hermite_sign_sequence(HermitePoint(x), 40).signs
    expected = [int(np.sign(special.eval_hermite(n, t))) for n in range(40)]
    assert signs.tolist() == expected


def test_hermite_values_are_normalized():
    x = np.linspace(-8, 8, 40_001)
    for n in (0, 3, 10):
        values = hermite_function_values(n, x)
        norm = integrate.trapezoid(values ** 2, x)
        # psi_n(sqrt(2 pi) x) has squared norm 1/sqrt(2 pi) in x
        assert norm == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-6)


def test_hermite_stream_survives_large_index():
    seq = HermiteSequence(HermitePoint(4.0))
    signs = seq.take_signs(20_000)
    state = seq.state()
    assert state.n == 20_000
    assert math.isfinite(state.current) and math.isfinite(state.log_scale)
    assert set(np.unique(signs).tolist()) <= {-1, 1}


def test_recurrence_resumes_from_state():
    point = HermitePoint(0.9)
    full = HermiteSequence(point).take_signs(3_000)
    head = HermiteSequence(point)
    first = head.take_signs(1_234)
    tail = HermiteSequence(point, head.state()).take_signs(3_000 - 1_234)
    assert np.array_equal(np.concatenate([first, tail]), full)


@pytest.mark.parametrize("d, r", [(2, 0.5), (3, 1.5), (1, 0.8)])
def test_laguerre_signs_match_scipy(d, r):
    params = LaguerreParams.from_dimension(d, r)
    signs = laguerre_sign_sequence(params, 40).signs
    expected = [int(np.sign(special.eval_genlaguerre(n, params.nu, params.z))) for n in range(40)]
    assert signs.tolist() == expected


def test_laguerre_values_match_scipy():
    z = np.linspace(0.1, 20, 50)
    assert np.allclose(laguerre_values(7, 0.5, z), special.eval_genlaguerre(7, 0.5, z), rtol=1e-10, atol=1e-12)


def test_laguerre_stream_resumes():
    params = LaguerreParams.from_dimension(3, 1.5)
    full = LaguerreSequence(params).take_signs(2_000)
    head = LaguerreSequence(params)
    first = head.take_signs(700)
    tail = LaguerreSequence(params, head.state()).take_signs(1_300)
    assert np.array_equal(np.concatenate([first, tail]), full)


def test_laguerre_params_validation():
    with pytest.raises(InvalidInputError):
        LaguerreParams(nu=-1.0, r=1.0)
    with pytest.raises(InvalidInputError):
        LaguerreParams(nu=0.5, r=0.0)
    with pytest.raises(InvalidInputError):
        LaguerreParams(nu=0.0, r=1.0, d=3)
    assert LaguerreParams.from_dimension(3, 1.0).nu == 0.5


def test_chebyshev_rational_signs_are_exact():
    angle = AngleFraction.rational(1, 10)
    signs = chebyshev_sign_sequence(angle, 100).signs
    expected = [cosine_sign(Fraction(n, 10)) for n in range(100)]
    assert signs.tolist() == expected


def test_chebyshev_zero_hits_at_quarter():
    result = chebyshev_sign_sequence(AngleFraction.rational(1, 4), 12)
    assert result.signs.tolist() == [1, 0, -1, 0] * 3
    assert result.zero_hits == [1, 3, 5, 7, 9, 11]


@given(st.integers(min_value=0, max_value=10**12))
@settings(max_examples=50, deadline=None)
def test_chebyshev_direct_positioning(start):
    angle = AngleFraction.parse("(sqrt(5)-1)/8")
    direct = ChebyshevSequence(angle, start).take_signs(16)
    expected = [
        1 if (f < 0.25 or f > 0.75) else -1
        for f in ((start + k) * angle.fixed.to_fraction() % 1 for k in range(16))
    ]
    assert direct.tolist() == expected


def test_angle_fraction_parsing():
    golden = AngleFraction.parse("(sqrt(5)-1)/8")
    assert not golden.is_rational
    assert golden.value == pytest.approx((math.sqrt(5) - 1) / 8, abs=1e-15)
    assert AngleFraction.parse("1/10").exact == Fraction(1, 10)
    assert AngleFraction.parse("(sqrt(4)-1)/8").exact == Fraction(1, 8)
    assert golden.scaled(3).value == pytest.approx(3 * (math.sqrt(5) - 1) / 8, abs=1e-14)
    with pytest.raises(InvalidInputError):
        AngleFraction.parse("3/4")
    with pytest.raises(InvalidInputError):
        AngleFraction.rational(1, 4).scaled(3)


def test_eigenvalues():
    assert hermite_eigenvalue(3) == pytest.approx(7 / (2 * math.pi))
    assert laguerre_eigenvalue(2, 0.5) == pytest.approx(11 / (2 * math.pi))


@given(st.floats(min_value=0.05, max_value=4.0, allow_nan=False))
@settings(max_examples=25, deadline=None)
def test_hermite_parity(x):
    N = 10_000
    plus = hermite_sign_sequence(HermitePoint(x), N).signs.astype(int)
    minus = hermite_sign_sequence(HermitePoint(-x), N).signs.astype(int)
    parity = np.where(np.arange(N) % 2 == 0, 1, -1)
    live = plus != 0
    assert np.array_equal(minus[live], parity[live] * plus[live])


def test_hermite_functions_are_bounded():
    x = np.linspace(-6.0, 6.0, 4_001)
    for n in (0, 1, 2, 5, 10, 50, 100, 200, 300):
        assert np.max(np.abs(hermite_function_values(n, x))) <= 1.0 + 1e-9


@given(st.integers(min_value=3, max_value=200), st.data())
@settings(max_examples=60, deadline=None)
def test_rational_chebyshev_signs_repeat_with_the_denominator(den, data):
    num = data.draw(st.integers(min_value=1, max_value=(den - 1) // 2))
    if math.gcd(num, den) != 1:
        return
    signs = chebyshev_sign_sequence(AngleFraction.rational(num, den), 3 * den).signs
    assert np.array_equal(signs[:den], signs[den:2 * den])
    assert np.array_equal(signs[:den], signs[2 * den:])


@pytest.mark.parametrize("d, r", [(1, 0.3), (2, 0.5), (3, 1.5), (5, 0.8)])
def test_laguerre_signs_keep_oscillating(d, r):
    signs = laguerre_sign_sequence(LaguerreParams.from_dimension(d, r), 5_000).signs
    live = signs[signs != 0]
    changes = np.flatnonzero(live[1:] != live[:-1])
    assert len(changes) >= 10
    assert np.count_nonzero(changes >= 2_500) > 0


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.5])
def test_laguerre_orthogonality(nu):
    def inner(m, n):
        integrand = lambda z: float(laguerre_values(m, nu, z) * laguerre_values(n, nu, z)) * z ** nu * math.exp(-z)
        value, _ = integrate.quad(integrand, 0.0, np.inf, limit=200, epsabs=1e-13, epsrel=1e-12)
        return value

    for m in range(5):
        assert inner(m, m) == pytest.approx(math.gamma(m + nu + 1) / math.factorial(m), rel=1e-8)
        for n in range(m + 1, 5):
            assert abs(inner(m, n)) < 1e-8


def test_decimal_angles_are_exact():
    tenth = AngleFraction.parse("0.1")
    assert tenth.is_rational
    assert tenth.exact == Fraction(1, 10)
    assert tenth.fixed == AngleFraction.parse("1/10").fixed
    assert AngleFraction.parse("0.125").scaled(3).exact == Fraction(3, 8)
    for bad in ("0.75", "abc", "nan"):
        with pytest.raises(InvalidInputError):
            AngleFraction.parse(bad)
