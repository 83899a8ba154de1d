"""
Closed-form sign-correlation limits.

Rationality is an input contract: ratios arrive as exact integers,
Fractions or strings, or as the IRRATIONAL marker, and are never inferred
from floating-point values. Negative p, q are admitted; residues mod 4 use
the representative in {0, 1, 2, 3}.
"""

import logging
import math
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from .errors import InvalidInputError
from .special_functions import AngleFraction, ChebyshevSequence
from .torus_dynamics import Phase, TorusRay, ray_average_closed_form

logger = logging.getLogger(__name__)

Exact = Union[int, Fraction, Decimal, str]


def to_exact(value: Exact) -> Fraction:
    """Exact rational from an int, Fraction, Decimal or decimal/fraction string."""
    if isinstance(value, bool):
        raise InvalidInputError("Booleans are not numbers here")
    if isinstance(value, float):
        raise InvalidInputError(
            f"Float {value!r} given where an exact value is required; pass a string or Fraction"
        )
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError):
        raise InvalidInputError(f"Not an exact rational: {value!r}")


@dataclass(frozen=True)
class RationalRatio:
    """x/y = p/q with p, q nonzero and coprime."""

    p: int
    q: int

    def __post_init__(self):
        if self.p == 0 or self.q == 0:
            raise InvalidInputError(f"Ratio needs nonzero p, q, got {self.p}/{self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise InvalidInputError(f"Ratio {self.p}/{self.q} is not in lowest terms")

    @classmethod
    def of(cls, x: Exact, y: Exact) -> "RationalRatio":
        """Reduced ratio of two exact values."""
        fx, fy = to_exact(x), to_exact(y)
        if fx == 0 or fy == 0:
            raise InvalidInputError("Points must be nonzero")
        ratio = fx / fy
        return cls(ratio.numerator, ratio.denominator)

    @property
    def odd(self) -> bool:
        return self.p % 2 != 0 and self.q % 2 != 0

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class IrrationalRatio:
    """Marker for a ratio declared irrational by the caller."""

    def __str__(self) -> str:
        return "irrational"


IRRATIONAL = IrrationalRatio()
Ratio = Union[RationalRatio, IrrationalRatio]


def parse_ratio(text: str) -> Ratio:
    """'p/q' integer pair or the literal token 'irrational'; decimals are rejected."""
    text = text.strip()
    if text.lower() == "irrational":
        return IRRATIONAL
    parts = text.split("/")
    if len(parts) == 1:
        parts.append("1")
    try:
        p, q = (int(s) for s in parts)
    except ValueError:
        raise InvalidInputError(f"Ratio must be 'p/q' with integers or 'irrational', got {text!r}")
    if q == 0 or p == 0:
        raise InvalidInputError(f"Ratio needs nonzero p, q, got {text!r}")
    g = math.gcd(p, q)
    sign = -1 if q < 0 else 1
    return RationalRatio(sign * p // g, sign * q // g)


@dataclass(frozen=True)
class WkbFamily:
    """
    Sequence w_n(x) ~ phi(x, n) cos(2 pi (mu_n varphi(x) - theta_n)) whose
    phases theta_n fall into finitely many classes with given densities.
    """

    phase_classes: Tuple[Tuple[float, float], ...]
    frequency_map: str = "varphi(x) = x"
    amplitude_positive: bool = True

    def __post_init__(self):
        if not self.phase_classes:
            raise InvalidInputError("A family needs at least one phase class")
        phases = [theta for theta, _ in self.phase_classes]
        if any(not 0 <= theta < 1 for theta in phases):
            raise InvalidInputError(f"Phase offsets must lie in [0, 1), got {phases}")
        weights = [w for _, w in self.phase_classes]
        if any(w <= 0 for w in weights):
            raise InvalidInputError(f"Phase class weights must be positive, got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise InvalidInputError(f"Phase class weights must sum to 1, got {sum(weights)}")

    @classmethod
    def single(cls, theta: float, frequency_map: str = "varphi(x) = x") -> "WkbFamily":
        return cls(((theta, 1.0),), frequency_map)

    @classmethod
    def schrodinger(cls) -> "WkbFamily":
        """Phases n/4: classes n = 0, 2 and n = 1, 3 collapse up to global sign."""
        return cls(((0.0, 0.5), (0.25, 0.5)), "varphi(x) = x, mu_n = sqrt(lambda_n)")

    @classmethod
    def laguerre(cls, d: int) -> "WkbFamily":
        if d < 1:
            raise InvalidInputError(f"Dimension must be >= 1, got {d}")
        return cls.single(((d - 1) / 8.0) % 1.0, "varphi(r) = r, mu_n = sqrt((4n+2nu+2)/(2 pi))")

    @classmethod
    def chebyshev(cls) -> "WkbFamily":
        return cls.single(0.0, "varphi(x) = arccos(x)/(2 pi), mu_n = n")


def _ratio_ray(ratio: RationalRatio, theta: Phase) -> TorusRay:
    return TorusRay(ratio.p, ratio.q, theta, theta)


def theorem1_hypothesis_holds(ratio: RationalRatio) -> bool:
    """varphi(x) != +-varphi(y) forces |pq| >= 3 whenever the limit can differ from 1/2."""
    return abs(ratio.p * ratio.q) >= 3


def theorem1_limit(ratio: RationalRatio, theta: Phase = 0.0) -> float:
    """1/2 + 1/2 int_0^1 Phi(p t - theta, q t - theta) dt; lies in [1/3, 2/3] when |pq| >= 3."""
    if not theorem1_hypothesis_holds(ratio):
        logger.warning(f"|pq| < 3 for ratio {ratio}: varphi(x) = +-varphi(y), bounds [1/3, 2/3] do not apply")
    return 0.5 + 0.5 * ray_average_closed_form(_ratio_ray(ratio, theta))


def theorem1_range(ratio: RationalRatio) -> Tuple[float, float]:
    """Smallest and largest theorem1_limit over all theta."""
    if not ratio.odd:
        return 0.5, 0.5
    spread = 1.0 / (2.0 * abs(ratio.p * ratio.q))
    return 0.5 - spread, 0.5 + spread


def theorem2_limit(ratio: Ratio) -> float:
    """1/2 + 1/(2pq) when p = q = 1 or p = q = 3 (mod 4), else 1/2; 1/2 for irrational ratios."""
    if isinstance(ratio, IrrationalRatio):
        return 0.5
    p4, q4 = ratio.p % 4, ratio.q % 4
    if p4 == q4 and p4 in (1, 3):
        return 0.5 + 1.0 / (2.0 * ratio.p * ratio.q)
    return 0.5


def wkb_family_limit(ratio: RationalRatio, family: WkbFamily) -> float:
    """1/2 + sum_c weight_c * 1/2 * (ray average at phase theta_c)."""
    if not family.amplitude_positive:
        raise InvalidInputError("Amplitudes must have a common sign at both points")
    total = 0.5
    for theta, weight in family.phase_classes:
        total += weight * 0.5 * ray_average_closed_form(_ratio_ray(ratio, theta))
    return total


def hermite_limit(x: Exact, y: Exact) -> float:
    """Hermite functions with y/x = m integer: 1/2 + x/(2y) if m = 1 (mod 4), else 1/2."""
    fx, fy = to_exact(x), to_exact(y)
    if fx == 0 or fy == 0:
        raise InvalidInputError("Hermite points must be nonzero")
    m = fy / fx
    if m.denominator != 1:
        raise InvalidInputError(f"y/x = {m} is not an integer")
    m = m.numerator
    if m % 4 == 1:
        return 0.5 + 1.0 / (2.0 * m)
    return 0.5


def laguerre_limit(r1: Exact, r2: Exact, d: int) -> float:
    """Laguerre functions in dimension d at radii with r1/r2 = p/q."""
    if d < 1:
        raise InvalidInputError(f"Dimension must be >= 1, got {d}")
    f1, f2 = to_exact(r1), to_exact(r2)
    if f1 <= 0 or f2 <= 0:
        raise InvalidInputError("Radii must be positive")
    ratio = f1 / f2
    p, q = ratio.numerator, ratio.denominator
    if p % 2 == 0 or q % 2 == 0:
        return 0.5
    twice_shift = (p - q) * (d - 1)
    if (twice_shift // 2) % 2 == 1:
        return 0.5
    exponent = (p + q) // 2 + twice_shift // 4
    return 0.5 - (1.0 / (2.0 * p * q)) * (-1) ** exponent


def chebyshev_orbit_density(angle: AngleFraction, ratio: int) -> Fraction:
    """Exact agreement density of sgn T_n at cos(2 pi a) and cos(2 pi ratio a), a rational."""
    if not angle.is_rational:
        raise InvalidInputError("Orbit density needs a rational angle fraction")
    other = angle.scaled(ratio)
    period = angle.exact.denominator
    xs = ChebyshevSequence(angle).take_signs(period)
    ys = ChebyshevSequence(other).take_signs(period)
    agree = int(((xs == ys) & (xs != 0)).sum())
    return Fraction(agree, period)


class PredictorMethod(str, Enum):
    THEOREM1 = "theorem1"
    THEOREM2 = "theorem2"
    WKB = "wkb"
    PROP1 = "prop1"
    PROP2 = "prop2"
    ORBIT = "orbit"


class Prediction(BaseModel):
    method: PredictorMethod
    params: Dict[str, Any] = Field(default_factory=dict)
    limit: float
    flags: List[str] = Field(default_factory=list)


def predict(method: PredictorMethod, **params) -> Prediction:
    """Evaluate one predictor and record the parameters and any flags."""
    method = PredictorMethod(method)
    flags: List[str] = []
    shown = {k: getattr(v, "label", None) or str(v) for k, v in params.items() if v is not None}

    if method is PredictorMethod.THEOREM1:
        ratio = params["ratio"]
        if isinstance(ratio, IrrationalRatio):
            limit = 0.5
        else:
            if not theorem1_hypothesis_holds(ratio):
                flags.append("hypothesis_violated: |pq| < 3")
            limit = theorem1_limit(ratio, params.get("theta", 0.0))
    elif method is PredictorMethod.THEOREM2:
        limit = theorem2_limit(params["ratio"])
    elif method is PredictorMethod.WKB:
        limit = wkb_family_limit(params["ratio"], params.get("family") or WkbFamily.schrodinger())
    elif method is PredictorMethod.PROP1:
        limit = hermite_limit(params["x"], params["y"])
    elif method is PredictorMethod.PROP2:
        limit = laguerre_limit(params["r1"], params["r2"], int(params["d"]))
    else:
        density = chebyshev_orbit_density(params["angle"], int(params["ratio"]))
        shown["exact"] = str(density)
        limit = float(density)

    return Prediction(method=method, params=shown, limit=limit, flags=flags)
