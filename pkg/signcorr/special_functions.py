"""
Sign sequences of Hermite functions, Laguerre polynomials and Chebyshev
polynomials at fixed points, for all indices in one recurrence pass.

Recurrence values are carried as (mantissa, log-scale) pairs and rescaled by
exact powers of two, so neither overflow nor underflow can corrupt a sign and
a sequence resumed from a recorded state reproduces the same values bit for
bit.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterator, List, Optional

import numpy as np

from .equidistribution import HALF, MASK, FixedPointFraction, quarter_sign, raw_to_float
from .errors import InvalidInputError

logger = logging.getLogger(__name__)

# A recurrence value is a zero-hit when it is this small relative to the
# terms it was computed from.
ZERO_RELATIVE_TOLERANCE = 1e-12
_RESCALE_HIGH = 2.0 ** 300
_RESCALE_LOW = 2.0 ** -300
_INV_PI_QUARTER = math.pi ** -0.25


@dataclass(frozen=True)
class SignSample:
    n: int
    sign: int
    value: float


@dataclass
class SignSequence:
    """Materialized signs sigma(0..N-1) with the indices that were zero-hits."""

    signs: np.ndarray
    zero_hits: List[int] = field(default_factory=list)


@dataclass(frozen=True)
class RecurrenceState:
    """Two consecutive recurrence values, true value = mantissa * exp(log_scale)."""

    n: int
    previous: float
    current: float
    current_sign: int
    log_scale: float


def _rescaled(previous: float, current: float, log_scale: float):
    magnitude = max(abs(previous), abs(current))
    if magnitude == 0.0 or _RESCALE_LOW < magnitude < _RESCALE_HIGH:
        return previous, current, log_scale
    exponent = math.frexp(magnitude)[1]
    return (
        math.ldexp(previous, -exponent),
        math.ldexp(current, -exponent),
        log_scale + exponent * math.log(2.0),
    )


class _RecurrenceSequence:
    """Single-cursor stream over a three-term recurrence."""

    def __init__(self, state: RecurrenceState):
        self._state = state

    def state(self) -> RecurrenceState:
        return self._state

    def _step(self, n: int, previous: float, current: float):
        raise NotImplementedError

    def __iter__(self) -> Iterator[SignSample]:
        return self

    def __next__(self) -> SignSample:
        s = self._state
        sample = SignSample(s.n, s.current_sign, s.current * math.exp(s.log_scale))
        self.advance()
        return sample

    def advance(self) -> int:
        """Move to the next index; returns the sign of the value just left."""
        s = self._state
        new, scale = self._step(s.n, s.previous, s.current)
        if abs(new) <= ZERO_RELATIVE_TOLERANCE * scale:
            sign = 0
        else:
            sign = 1 if new > 0 else -1
        previous, current, log_scale = _rescaled(s.current, new, s.log_scale)
        self._state = RecurrenceState(s.n + 1, previous, current, sign, log_scale)
        return s.current_sign

    def take_signs(self, count: int) -> np.ndarray:
        """Signs of the next `count` indices as an int8 array."""
        out = np.empty(count, dtype=np.int8)
        for i in range(count):
            out[i] = self.advance()
        return out


@dataclass(frozen=True)
class HermitePoint:
    """Evaluation point x; the recurrence runs at t = sqrt(2 pi) x."""

    x: float

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise InvalidInputError(f"Hermite point must be finite, got {self.x}")

    @property
    def t(self) -> float:
        return math.sqrt(2.0 * math.pi) * self.x


class HermiteSequence(_RecurrenceSequence):
    """
    Normalized Hermite functions psi_n(t):
        psi_0 = pi^(-1/4) e^(-t^2/2),  psi_1 = sqrt(2) t psi_0,
        psi_{n+1} = sqrt(2/(n+1)) t psi_n - sqrt(n/(n+1)) psi_{n-1}.
    """

    def __init__(self, point: HermitePoint, state: Optional[RecurrenceState] = None):
        self.point = point
        self._t = point.t
        if state is None:
            state = RecurrenceState(0, 0.0, _INV_PI_QUARTER, 1, -0.5 * self._t * self._t)
        super().__init__(state)

    def _step(self, n, previous, current):
        a = math.sqrt(2.0 / (n + 1)) * self._t * current
        b = math.sqrt(n / (n + 1)) * previous
        return a - b, max(abs(a), abs(b))


@dataclass(frozen=True)
class LaguerreParams:
    nu: float
    r: float
    d: Optional[int] = None

    def __post_init__(self):
        if not self.nu > -1:
            raise InvalidInputError(f"Laguerre parameter nu must be > -1, got {self.nu}")
        if not self.r > 0:
            raise InvalidInputError(f"Radius must be positive, got {self.r}")
        if self.d is not None and self.nu != self.d / 2 - 1:
            raise InvalidInputError(f"nu={self.nu} does not match dimension d={self.d}")

    @classmethod
    def from_dimension(cls, d: int, r: float) -> "LaguerreParams":
        if d < 1:
            raise InvalidInputError(f"Dimension must be >= 1, got {d}")
        return cls(nu=d / 2 - 1, r=r, d=d)

    @property
    def z(self) -> float:
        return 2.0 * math.pi * self.r * self.r


class LaguerreSequence(_RecurrenceSequence):
    """(n+1) L_{n+1} = (2n+1+nu-z) L_n - (n+nu) L_{n-1}, L_0 = 1, at z = 2 pi r^2."""

    def __init__(self, params: LaguerreParams, state: Optional[RecurrenceState] = None):
        self.params = params
        self._nu = params.nu
        self._z = params.z
        if state is None:
            state = RecurrenceState(0, 0.0, 1.0, 1, 0.0)
        super().__init__(state)

    def _step(self, n, previous, current):
        grow = (2 * n + 1 + self._nu) * current
        shift = self._z * current
        back = (n + self._nu) * previous
        new = (grow - shift - back) / (n + 1)
        return new, max(abs(grow), abs(shift), abs(back)) / (n + 1)


_SURD = re.compile(
    r"^\(?\s*sqrt\(\s*(\d+)\s*\)\s*(?:([+-])\s*(\d+))?\s*\)?\s*(?:/\s*(\d+))?$"
)


@dataclass(frozen=True)
class AngleFraction:
    """
    a in (0, 1/2) with x = cos(2 pi a), so T_n(x) = cos(2 pi n a).

    Rational values keep their exact Fraction; irrational ones live only as a
    128-bit fixed-point fraction.
    """

    fixed: FixedPointFraction
    exact: Optional[Fraction] = None
    label: str = ""

    def __post_init__(self):
        if self.exact is not None:
            if not 0 < self.exact < Fraction(1, 2):
                raise InvalidInputError(f"Angle fraction must lie in (0, 1/2), got {self.exact}")
        elif not 0 < self.fixed.raw < HALF:
            raise InvalidInputError(f"Angle fraction must lie in (0, 1/2), got {self.fixed.to_float()}")

    @classmethod
    def rational(cls, num: int, den: int) -> "AngleFraction":
        value = Fraction(num, den)
        return cls(FixedPointFraction.from_fraction(value), value, str(value))

    @classmethod
    def parse(cls, text: str) -> "AngleFraction":
        """'p/q' or a decimal string (both exact) or '(sqrt(D)+b)/c' (quadratic surd)."""
        text = text.strip()
        if re.fullmatch(r"-?\d+\s*/\s*\d+", text):
            num, den = (int(s) for s in text.split("/"))
            if den == 0:
                raise InvalidInputError(f"Zero denominator in {text!r}")
            return cls.rational(num, den)
        match = _SURD.match(text)
        if match:
            radicand = int(match.group(1))
            offset = int(match.group(3) or 0) * (-1 if match.group(2) == "-" else 1)
            divisor = int(match.group(4) or 1)
            root = math.isqrt(radicand)
            if root * root == radicand:
                return cls.rational(root + offset, divisor)
            return cls(FixedPointFraction.from_surd(radicand, offset, divisor), None, text)
        try:
            value = Fraction(Decimal(text))
        except (InvalidOperation, ValueError, OverflowError):
            raise InvalidInputError(f"Angle must be p/q, a decimal or (sqrt(D)+b)/c, got {text!r}")
        return cls.rational(value.numerator, value.denominator)

    @property
    def is_rational(self) -> bool:
        return self.exact is not None

    @property
    def value(self) -> float:
        return float(self.exact) if self.exact is not None else self.fixed.to_float()

    def scaled(self, factor: int) -> "AngleFraction":
        """factor * a, which must itself lie in (0, 1/2)."""
        if factor < 1:
            raise InvalidInputError(f"Angle ratio must be a positive integer, got {factor}")
        if self.exact is not None:
            value = self.exact * factor
            if not 0 < value < Fraction(1, 2):
                raise InvalidInputError(f"Scaled angle fraction {value} outside (0, 1/2)")
            return AngleFraction(FixedPointFraction.from_fraction(value), value, str(value))
        raw = self.fixed.raw * factor
        if not 0 < raw < HALF:
            raise InvalidInputError(f"Scaled angle fraction {factor}*{self.label} outside (0, 1/2)")
        return AngleFraction(FixedPointFraction(raw), None, f"{factor}*({self.label})")


class ChebyshevSequence:
    """
    sgn T_n(cos 2 pi a) = sgn cos(2 pi frac(n a)), positioned directly at any n.

    Rational a = num/den uses integer residues mod den; irrational a a
    fixed-point accumulator.
    """

    def __init__(self, angle: AngleFraction, start: int = 0):
        self.angle = angle
        self.n = start
        if angle.exact is not None:
            self._num = angle.exact.numerator
            self._den = angle.exact.denominator
            self._residue = (start * self._num) % self._den
        else:
            self._step = angle.fixed.raw
            self._acc = (start * self._step) & MASK

    def __iter__(self) -> Iterator[SignSample]:
        return self

    def __next__(self) -> SignSample:
        if self.angle.exact is not None:
            value = math.cos(2.0 * math.pi * self._residue / self._den)
        else:
            value = math.cos(2.0 * math.pi * raw_to_float(self._acc))
        n = self.n
        return SignSample(n, self.advance(), value)

    def advance(self) -> int:
        if self.angle.exact is not None:
            r4, den = 4 * self._residue, self._den
            if r4 == den or r4 == 3 * den:
                sign = 0
            else:
                sign = 1 if (r4 < den or r4 > 3 * den) else -1
            self._residue = (self._residue + self._num) % den
        else:
            sign = quarter_sign(self._acc)
            self._acc = (self._acc + self._step) & MASK
        self.n += 1
        return sign

    def take_signs(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.int8)
        for i in range(count):
            out[i] = self.advance()
        return out


def _collect(sequence, N: int) -> SignSequence:
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    signs = sequence.take_signs(N)
    return SignSequence(signs=signs, zero_hits=np.flatnonzero(signs == 0).tolist())


def hermite_sign_sequence(point: HermitePoint, N: int) -> SignSequence:
    """sgn psi_n(sqrt(2 pi) x) for n < N."""
    return _collect(HermiteSequence(point), N)


def laguerre_sign_sequence(params: LaguerreParams, N: int) -> SignSequence:
    """sgn L_n^nu(2 pi r^2) for n < N; the positive Gaussian weight never flips a sign."""
    return _collect(LaguerreSequence(params), N)


def chebyshev_sign_sequence(a: AngleFraction, N: int) -> SignSequence:
    """sgn T_n(cos 2 pi a) for n < N."""
    return _collect(ChebyshevSequence(a), N)


def hermite_function_values(n: int, x: np.ndarray) -> np.ndarray:
    """psi_n(sqrt(2 pi) x) on an array of points (moderate |x|, no tail rescaling)."""
    t = math.sqrt(2.0 * math.pi) * np.asarray(x, dtype=np.float64)
    previous = np.zeros_like(t)
    current = _INV_PI_QUARTER * np.exp(-0.5 * t * t)
    for k in range(n):
        previous, current = current, math.sqrt(2.0 / (k + 1)) * t * current - math.sqrt(k / (k + 1)) * previous
    return current


def laguerre_values(n: int, nu: float, z: np.ndarray) -> np.ndarray:
    """Generalized Laguerre polynomial L_n^nu(z) by forward recurrence."""
    z = np.asarray(z, dtype=np.float64)
    previous = np.zeros_like(z)
    current = np.ones_like(z)
    for k in range(n):
        previous, current = current, ((2 * k + 1 + nu - z) * current - (k + nu) * previous) / (k + 1)
    return current


def hermite_eigenvalue(n: int) -> float:
    """Eigenvalue (2n+1)/(2 pi) of -(1/4 pi^2) d^2/dx^2 + x^2."""
    return (2 * n + 1) / (2.0 * math.pi)


def laguerre_eigenvalue(n: int, nu: float) -> float:
    """Radial eigenvalue (4n+2nu+2)/(2 pi) of -(1/4 pi^2) Laplacian + |x|^2."""
    return (4 * n + 2 * nu + 2) / (2.0 * math.pi)
