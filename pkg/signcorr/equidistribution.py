"""
Equidistribution diagnostics: star discrepancy, Weyl sums and drift-free
fractional parts of n * alpha in 128-bit fixed point.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field

from .errors import InvalidInputError

logger = logging.getLogger(__name__)

FRAC_BITS = 128
SCALE = 1 << FRAC_BITS
MASK = SCALE - 1
QUARTER = SCALE >> 2
THREE_QUARTERS = 3 * QUARTER
HALF = SCALE >> 1
# Guard bits used while rounding surds and fractions to FRAC_BITS.
GUARD_BITS = 16

H2_DISCLAIMER = (
    "Equidistribution of sqrt(lambda_n) x is checked empirically on finitely many "
    "eigenvalues; a small discrepancy is evidence, not a certificate."
)


@dataclass(frozen=True, order=True)
class FixedPointFraction:
    """A number in [0, 1) stored as raw / 2**128; addition is exact mod 1."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw < SCALE:
            raise InvalidInputError(f"Fixed-point raw value out of range: {self.raw}")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "FixedPointFraction":
        """Round value mod 1 to the nearest multiple of 2**-128."""
        value = Fraction(value) % 1
        scaled = value * SCALE
        raw = (2 * scaled.numerator + scaled.denominator) // (2 * scaled.denominator)
        return cls(raw & MASK)

    @classmethod
    def from_float(cls, value: float) -> "FixedPointFraction":
        if not math.isfinite(value):
            raise InvalidInputError(f"Cannot convert {value} to a fixed-point fraction")
        return cls.from_fraction(Fraction(value))

    @classmethod
    def from_surd(cls, radicand: int, offset: int = 0, divisor: int = 1) -> "FixedPointFraction":
        """(sqrt(radicand) + offset) / divisor mod 1, correctly rounded."""
        if radicand < 0 or divisor <= 0:
            raise InvalidInputError("Surd needs radicand >= 0 and divisor > 0")
        bits = FRAC_BITS + GUARD_BITS
        root = math.isqrt(radicand << (2 * bits))
        scaled = (root + (offset << bits)) // divisor
        raw = (scaled + (1 << (GUARD_BITS - 1))) >> GUARD_BITS
        return cls(raw & MASK)

    @classmethod
    def coerce(cls, value: Union["FixedPointFraction", float, int, Fraction]) -> "FixedPointFraction":
        if isinstance(value, FixedPointFraction):
            return value
        if isinstance(value, float):
            return cls.from_float(value)
        if isinstance(value, (int, Fraction)):
            return cls.from_fraction(Fraction(value))
        raise InvalidInputError(f"Cannot convert {type(value).__name__} to a fixed-point fraction")

    def __add__(self, other: "FixedPointFraction") -> "FixedPointFraction":
        return FixedPointFraction((self.raw + other.raw) & MASK)

    def __mul__(self, n: int) -> "FixedPointFraction":
        """n * value mod 1, exact in the fixed-point representation."""
        if not isinstance(n, int):
            return NotImplemented
        return FixedPointFraction((self.raw * n) & MASK)

    __rmul__ = __mul__

    def to_float(self) -> float:
        """Truncated to 53 bits so the result is always < 1.0."""
        return raw_to_float(self.raw)

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, SCALE)

    def quarter_sign(self) -> int:
        """sgn cos(2 pi value), decided by exact comparison with 1/4 and 3/4."""
        return quarter_sign(self.raw)


def raw_to_float(raw: int) -> float:
    return (raw >> (FRAC_BITS - 53)) * 2.0 ** -53


def quarter_sign(raw: int) -> int:
    if raw == QUARTER or raw == THREE_QUARTERS:
        return 0
    return 1 if (raw < QUARTER or raw > THREE_QUARTERS) else -1


def iter_fixed(alpha: Union[FixedPointFraction, float, Fraction], N: int, start: int = 0) -> Iterator[int]:
    """Raw fixed-point values of frac(n alpha) for n = start .. start+N-1."""
    step = FixedPointFraction.coerce(alpha).raw
    acc = (start * step) & MASK
    for _ in range(N):
        yield acc
        acc = (acc + step) & MASK


def frac_sequence(alpha: Union[FixedPointFraction, float, Fraction], N: int, start: int = 0) -> Iterator[float]:
    """Stream frac(n alpha), n = start .. start+N-1, by exact fixed-point addition."""
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    for raw in iter_fixed(alpha, N, start):
        yield raw_to_float(raw)


def _as_points(points: Sequence[float]) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidInputError("Point set must be nonempty")
    return arr


def star_discrepancy(points: Sequence[float]) -> float:
    """D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N) over the sorted points."""
    x = np.sort(_as_points(points))
    n = x.size
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def weyl_sum(points: Sequence[float], k: int) -> float:
    """(1/N) |sum_n exp(2 pi i k x_n)|."""
    if k == 0:
        raise InvalidInputError("Weyl sum frequency k must be nonzero")
    x = _as_points(points)
    phase = 2.0 * np.pi * k * x
    return float(math.hypot(np.sum(np.cos(phase)), np.sum(np.sin(phase))) / x.size)


def weyl_profile(points: Sequence[float], ks: Sequence[int] = (1, 2, 3)) -> Dict[int, float]:
    return {k: weyl_sum(points, k) for k in ks}


def power_of_two_checkpoints(N: int) -> List[int]:
    """1, 2, 4, ... <= N, plus N itself."""
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    checkpoints = [1 << j for j in range(N.bit_length()) if (1 << j) <= N]
    if checkpoints[-1] != N:
        checkpoints.append(N)
    return checkpoints


class DiscrepancyCheckpoint(BaseModel):
    n: int
    discrepancy: float
    weyl: Dict[int, float] = Field(default_factory=dict)


class ParitySeries(BaseModel):
    parity: str
    count: int
    checkpoints: List[DiscrepancyCheckpoint]
    final_discrepancy: float
    equidistributed: bool


class H2Report(BaseModel):
    x: float
    threshold: float
    series: List[ParitySeries]
    disclaimer: str = H2_DISCLAIMER

    @property
    def equidistributed(self) -> bool:
        return all(s.equidistributed for s in self.series)

    def discrepancy_at(self, parity: str, n: int) -> float:
        for s in self.series:
            if s.parity == parity:
                for c in s.checkpoints:
                    if c.n == n:
                        return c.discrepancy
        raise KeyError(f"No checkpoint {n} for parity {parity}")


def h2_report(
    lambdas: Sequence[float],
    x: float,
    checkpoints: Optional[Sequence[int]] = None,
    threshold: float = 0.1,
    ks: Sequence[int] = (1, 2, 3),
) -> H2Report:
    """
    Discrepancy and Weyl sums of {sqrt(lambda_{2m}) x} and {sqrt(lambda_{2m+1}) x}.

    `lambdas` is indexed by the global eigen-index n. Checkpoints default to
    powers of two per parity class plus the class length; a class is declared
    equidistributed when its final discrepancy is at most `threshold`.
    """
    if x == 0:
        raise InvalidInputError("x must be nonzero")
    lam = np.asarray(lambdas, dtype=np.float64)
    if lam.size < 2:
        raise InvalidInputError("Need at least one eigenvalue of each parity")

    series = []
    for parity, subset in (("even", lam[0::2]), ("odd", lam[1::2])):
        values = np.mod(np.sqrt(subset) * x, 1.0)
        schedule = list(checkpoints) if checkpoints else power_of_two_checkpoints(values.size)
        entries = []
        for n in schedule:
            if not 1 <= n <= values.size:
                raise InvalidInputError(f"Checkpoint {n} outside 1..{values.size} for {parity} class")
            head = values[:n]
            entries.append(DiscrepancyCheckpoint(n=n, discrepancy=star_discrepancy(head), weyl=weyl_profile(head, ks)))
        final = star_discrepancy(values)
        ok = final <= threshold
        if not ok:
            logger.warning(f"Equidistribution check failed for {parity} class at x={x}: D*={final:.4f} > {threshold}")
        series.append(ParitySeries(
            parity=parity, count=int(values.size), checkpoints=entries,
            final_discrepancy=final, equidistributed=ok,
        ))
    return H2Report(x=float(x), threshold=threshold, series=series)
