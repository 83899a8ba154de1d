"""
Averages of the sign-product function over rays of the two-dimensional torus.

    Phi(x, y) = sgn(cos(2 pi x) cos(2 pi y))

Rational rays (p t - alpha, q t - beta) close up after unit time, so their
long-time average is a finite integral with a closed form (triangle wave in
p beta - q alpha). Lines of irrational slope equidistribute and average to 0.
An independent breakpoint integrator serves as the exact oracle for the
closed form.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInputError

logger = logging.getLogger(__name__)

Phase = Union[float, Fraction]

# A cosine factor is zero when its argument (mod 1) is this close to 1/4 or 3/4.
ZERO_TOLERANCE = 1e-12
# Float breakpoints closer than this are merged.
DEDUP_TOLERANCE = 1e-14


def _reduce_phase(value: Union[int, float, Fraction]) -> Phase:
    """Reduce a phase into [0, 1), keeping exact values exact."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Fraction(value) % 1
    if isinstance(value, float):
        reduced = value % 1.0
        # -1e-20 % 1.0 rounds to 1.0
        return 0.0 if reduced >= 1.0 else reduced
    raise InvalidInputError(f"Phase must be int, float or Fraction, got {type(value).__name__}")


@dataclass(frozen=True)
class TorusRay:
    """The closed ray t -> (p t - alpha, q t - beta) on the torus, gcd(|p|, |q|) = 1."""

    p: int
    q: int
    alpha: Phase = 0.0
    beta: Phase = 0.0

    def __post_init__(self):
        if not isinstance(self.p, int) or not isinstance(self.q, int):
            raise InvalidInputError("Ray direction must be integers")
        if self.p == 0 or self.q == 0:
            raise InvalidInputError(f"Ray direction must be nonzero, got p={self.p}, q={self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise InvalidInputError(
                f"Ray direction ({self.p}, {self.q}) is not in lowest terms; use TorusRay.from_direction"
            )
        object.__setattr__(self, "alpha", _reduce_phase(self.alpha))
        object.__setattr__(self, "beta", _reduce_phase(self.beta))

    @classmethod
    def from_direction(cls, A: int, B: int, alpha: Phase = 0.0, beta: Phase = 0.0) -> "TorusRay":
        """Ray (A t - alpha, B t - beta) for integer A, B; reduces A/B to lowest terms."""
        if A == 0 or B == 0:
            raise InvalidInputError(f"Ray direction must be nonzero, got A={A}, B={B}")
        g = math.gcd(A, B)
        return cls(A // g, B // g, alpha, beta)

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha, Fraction) and isinstance(self.beta, Fraction)

    @property
    def phase_shift(self) -> Phase:
        """p beta - q alpha; the closed-form average depends only on this mod 1."""
        return self.p * self.beta - self.q * self.alpha


@dataclass(frozen=True)
class IrrationalRay:
    """The line t -> (t, a t + b), slope declared irrational by the caller."""

    a: float
    b: float = 0.0


@dataclass(frozen=True)
class RayAverage:
    """Finite-horizon average of Phi along an irrational line."""

    value: float
    horizon: float
    breakpoints: int
    non_decaying: bool


class SignPattern(str, Enum):
    AGREE = "+,+"
    DISAGREE = "+,-"

    @classmethod
    def parse(cls, pattern: Union["SignPattern", str, Sequence[int]]) -> "SignPattern":
        """Accept an enum, a '+,-' string or a pair of signs, identified up to global flip."""
        if isinstance(pattern, SignPattern):
            return pattern
        if isinstance(pattern, str):
            parts = [s.strip() for s in pattern.split(",")]
            signs = [{"+": 1, "-": -1}.get(s, 0) for s in parts]
        else:
            signs = [int(s) for s in pattern]
        if len(signs) != 2 or 0 in signs or any(abs(s) != 1 for s in signs):
            raise InvalidInputError(f"Invalid sign pattern {pattern!r}; expected a pair of +1/-1")
        return cls.AGREE if signs[0] == signs[1] else cls.DISAGREE


def cosine_sign(z: Phase) -> int:
    """sgn cos(2 pi z), decided on z mod 1; exact for Fractions."""
    r = z % 1
    if isinstance(r, Fraction):
        if r == Fraction(1, 4) or r == Fraction(3, 4):
            return 0
        return 1 if (r < Fraction(1, 4) or r > Fraction(3, 4)) else -1
    if abs(r - 0.25) <= ZERO_TOLERANCE or abs(r - 0.75) <= ZERO_TOLERANCE:
        return 0
    return 1 if (r < 0.25 or r > 0.75) else -1


def cosine_sign_array(z: np.ndarray) -> np.ndarray:
    """Vectorized cosine_sign for float arrays, int8 result."""
    r = np.mod(z, 1.0)
    signs = np.where((r < 0.25) | (r > 0.75), 1, -1).astype(np.int8)
    zero = (np.abs(r - 0.25) <= ZERO_TOLERANCE) | (np.abs(r - 0.75) <= ZERO_TOLERANCE)
    signs[zero] = 0
    return signs


def phi(x: Phase, y: Phase) -> int:
    """The sign-product function Phi(x, y) in {-1, 0, +1}."""
    return cosine_sign(x) * cosine_sign(y)


def triangle_wave(u: Phase) -> float:
    """
    S(u) = sum_{l>=0} cos(2 pi (2l+1) u) / (2l+1)^2 in closed form.

    S(u) = (pi^2/8)(1 - 4|u~|) with u~ = u - nearest integer, |u~| <= 1/2.
    """
    centered = u - round(u)
    return (math.pi ** 2 / 8.0) * float(1 - 4 * abs(centered))


def triangle_wave_series(u: Union[float, np.ndarray], terms: int = 1_000_000) -> Union[float, np.ndarray]:
    """Partial sum of S(u) with `terms` odd harmonics."""
    if terms < 1:
        raise InvalidInputError("terms must be >= 1")
    odd = 2.0 * np.arange(terms, dtype=np.float64) + 1.0
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    sums = np.array([np.sum(np.cos(2.0 * np.pi * odd * value) / odd ** 2) for value in u_arr])
    if np.ndim(u) == 0:
        return float(sums[0])
    return sums


def ray_average_closed_form(ray: TorusRay) -> float:
    """
    lim (1/T) int_0^T Phi(p t - alpha, q t - beta) dt.

    Zero when p or q is even; otherwise
    (-1)^((p+q)/2 + 1) * 8 / (pi^2 p q) * S(p beta - q alpha).
    """
    p, q = ray.p, ray.q
    if p % 2 == 0 or q % 2 == 0:
        return 0.0
    exponent = (p + q) // 2 + 1
    sign = 1 if exponent % 2 == 0 else -1
    return sign * 8.0 / (math.pi ** 2 * p * q) * triangle_wave(ray.phase_shift)


def _coordinate_breakpoints(slope: int, phase: Phase, exact: bool) -> List[Phase]:
    """Times t in [0, 1] where slope * t - phase hits 1/4 + k/2."""
    lo, hi = sorted((-phase, slope - phase))
    quarter = Fraction(1, 4) if exact else 0.25
    k_min = math.ceil(2 * (lo - quarter))
    k_max = math.floor(2 * (hi - quarter))
    points = []
    for k in range(k_min, k_max + 1):
        if exact:
            t = (quarter + Fraction(k, 2) + phase) / slope
        else:
            t = (quarter + 0.5 * k + phase) / slope
        if 0 <= t <= 1:
            points.append(t)
    return points


def _dedup_sorted(points: List[Phase], exact: bool) -> List[Phase]:
    points.sort()
    merged = [points[0]]
    for t in points[1:]:
        if exact:
            if t != merged[-1]:
                merged.append(t)
        elif t - merged[-1] > DEDUP_TOLERANCE:
            merged.append(t)
    return merged


def ray_average_breakpoints(ray: TorusRay) -> float:
    """
    Exact integral of Phi(p t - alpha, q t - beta) over [0, 1].

    The integrand is piecewise constant between the zeros of either cosine
    factor; sum the signed subinterval lengths. Rational phases are handled
    in exact arithmetic.
    """
    exact = ray.exact
    if exact:
        alpha, beta, start, end = ray.alpha, ray.beta, Fraction(0), Fraction(1)
    else:
        alpha, beta, start, end = float(ray.alpha), float(ray.beta), 0.0, 1.0

    points = [start, end]
    points += _coordinate_breakpoints(ray.p, alpha, exact)
    points += _coordinate_breakpoints(ray.q, beta, exact)
    points = _dedup_sorted(points, exact)

    total = Fraction(0) if exact else 0.0
    for left, right in zip(points, points[1:]):
        mid = (left + right) / 2
        sign = phi(ray.p * mid - alpha, ray.q * mid - beta)
        total += sign * (right - left)
    return float(total)


def ray_average_monte_carlo(ray: IrrationalRay, T: float) -> RayAverage:
    """
    (1/T) int_0^T Phi(t, a t + b) dt by exact piecewise integration.

    Tends to 0 for irrational a. A caller passing a rational slope gets the
    closed-orbit value instead; such results are flagged non_decaying.
    """
    if not T > 0:
        raise InvalidInputError(f"Horizon T must be positive, got {T}")
    a, b = float(ray.a), float(ray.b)

    first = np.arange(0.25, T, 0.5)
    if a != 0.0:
        lo, hi = sorted((b, a * T + b))
        k = np.arange(math.ceil(2 * (lo - 0.25)), math.floor(2 * (hi - 0.25)) + 1, dtype=np.float64)
        second = (0.25 + 0.5 * k - b) / a
    else:
        second = np.empty(0)

    times = np.concatenate(([0.0, T], first, second))
    times = np.unique(times[(times >= 0.0) & (times <= T)])
    lengths = np.diff(times)
    mids = times[:-1] + 0.5 * lengths
    signs = cosine_sign_array(mids).astype(np.float64) * cosine_sign_array(a * mids + b)
    value = float(np.sum(lengths * signs) / T)

    non_decaying = abs(value) * math.sqrt(T) > 1.0
    if non_decaying:
        logger.warning(
            f"Average along slope {a} does not decay (value {value:.6g} at T={T:g}); "
            f"slope is probably rational"
        )
    return RayAverage(value=value, horizon=float(T), breakpoints=int(len(times)), non_decaying=non_decaying)


def ray_average(ray: Union[TorusRay, IrrationalRay], horizon: float = 1e4) -> float:
    """Dispatch on the declared ray type: closed orbit or irrational line."""
    if isinstance(ray, TorusRay):
        return ray_average_closed_form(ray)
    if isinstance(ray, IrrationalRay):
        return ray_average_monte_carlo(ray, horizon).value
    raise InvalidInputError(f"Unsupported ray type {type(ray).__name__}")


def sign_pattern_integral(
    ray: TorusRay,
    pattern: Union[SignPattern, str, Tuple[int, int]],
    theta: Optional[Phase] = None,
) -> float:
    """
    Measure of {t in [0,1]: signs of the two cosines match `pattern` up to flip}.

    With `theta` the ray is taken as (p t - theta, q t - theta).
    (+,+) gives (1 + int Phi)/2 and (+,-) gives (1 - int Phi)/2.
    """
    pattern = SignPattern.parse(pattern)
    if theta is not None:
        ray = TorusRay(ray.p, ray.q, theta, theta)
    average = ray_average_closed_form(ray)
    if pattern is SignPattern.AGREE:
        return 0.5 * (1.0 + average)
    return 0.5 * (1.0 - average)
