"""
Eigenpairs of H_V = -(1/4 pi^2) d^2/dx^2 + V(x) for even polynomial potentials.

Each parity class is shot from x = 0 with Numerov's method on [0, L]:
even states start from w(0) = 1, w'(0) = 0 and odd states from w(0) = 0,
w'(0) = 1. Eigenvalues are bracketed by node counting and bisected for all
requested indices of a class at once. The global index n has parity n mod 2
and floor(n/2) nodes on (0, L).
"""

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from scipy import integrate, optimize

from .errors import ConfigError, InvalidInputError, NodeCountMismatch, NonConvergenceError, SourceFailure
from .sources import SignBlock, SignPairSource

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
# Trial solutions are rescaled once they exceed this magnitude.
RESCALE_THRESHOLD = 1e100
# Interpolated values below this fraction of max |w| count as zero-hits.
ZERO_RELATIVE_TOLERANCE = 1e-12
# Bohr-Sommerfeld estimates of the top eigenvalue are inflated by this factor
# before sizing the domain.
DOMAIN_SLACK = 1.05
MAX_DOMAIN_ATTEMPTS = 3
CACHE_VERSION = 1


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

    @classmethod
    def of(cls, n: int) -> "Parity":
        return cls.EVEN if n % 2 == 0 else cls.ODD


class PotentialSpec(BaseModel):
    """V(x) = sum_k c_k x^(2k) with positive leading coefficient."""

    coefficients: List[float] = Field(..., min_length=2, description="c_k for V(x) = sum c_k x^(2k)")

    @field_validator("coefficients")
    @classmethod
    def _confining(cls, value: List[float]) -> List[float]:
        if not all(math.isfinite(c) for c in value):
            raise ValueError("coefficients must be finite")
        if value[-1] <= 0:
            raise ValueError("leading coefficient must be positive")
        return value

    @classmethod
    def parse(cls, text: str) -> "PotentialSpec":
        """Comma-separated even coefficients, e.g. '0,0,1' for V = x^4."""
        try:
            return cls(coefficients=[float(s) for s in text.split(",")])
        except (ValueError, ValidationError) as e:
            raise ConfigError(f"Invalid potential {text!r}: {e}")

    @property
    def polynomial(self) -> np.polynomial.Polynomial:
        full = np.zeros(2 * len(self.coefficients) - 1)
        full[0::2] = self.coefficients
        return np.polynomial.Polynomial(full)

    def __call__(self, x):
        return self.polynomial(x)

    def __str__(self) -> str:
        terms = [f"{c:g} x^{2 * k}" for k, c in enumerate(self.coefficients) if c != 0]
        return "V(x) = " + " + ".join(terms)

    def minimum(self) -> float:
        poly = self.polynomial
        critical = [r.real for r in poly.deriv().roots() if abs(r.imag) < 1e-9 and r.real >= 0]
        return float(min(poly(np.array([0.0] + critical))))

    def outer_root(self, level: float) -> float:
        """Largest x >= 0 with V(x) = level; 0 when V > level everywhere."""
        roots = (self.polynomial - level).roots()
        real = [r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and r.real >= 0]
        return float(max(real)) if real else 0.0


class SolverConfig(BaseModel):
    n_max: int = Field(..., ge=0, description="Highest global index")
    points_per_wavelength: float = Field(50.0, gt=0)
    domain_margin: float = Field(2.0, gt=0, description="V(L) >= margin * lambda_max")
    eigenvalue_tolerance: float = Field(1e-10, gt=0, description="Relative bracket width")
    decay_exponent: float = Field(36.0, gt=0, description="WKB tunnelling exponent required at L")
    max_iterations: int = Field(200, gt=0)


@dataclass(frozen=True, eq=False)
class Eigenpair:
    """Solved eigenpair sampled at x_k = k * step, k = 0 .. K on [0, L]."""

    n: int
    parity: Parity
    eigenvalue: float
    w0: float
    dw0: float
    step: float
    values: np.ndarray

    @property
    def length(self) -> float:
        return self.step * (len(self.values) - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.step

    def nodes(self) -> int:
        start = 1 if self.parity is Parity.ODD else 0
        signs = np.sign(self.values[start:])
        signs = signs[signs != 0]
        return int(np.count_nonzero(signs[1:] != signs[:-1]))

    def sign_normalized(self) -> bool:
        m = self.n // 2
        leading = self.w0 if self.parity is Parity.EVEN else self.dw0
        return int(np.sign(leading)) == (-1) ** m

    def value_at(self, x: float) -> float:
        """Linear interpolation, reflected by parity for x < 0."""
        reflect = -1.0 if (x < 0 and self.parity is Parity.ODD) else 1.0
        return reflect * float(np.interp(abs(x), self.grid, self.values))

    @cached_property
    def peak(self) -> float:
        """max |w_n| over the grid."""
        return float(np.max(np.abs(self.values)))

    def sign_at(self, x: float) -> int:
        """sgn w_n(x) from the two bracketing grid values."""
        xa = abs(x)
        if xa > self.length:
            raise InvalidInputError(f"x = {x} outside solved domain [-{self.length}, {self.length}]")
        k = min(int(xa // self.step), len(self.values) - 2)
        left, right = self.values[k], self.values[k + 1]
        s_left, s_right = int(np.sign(left)), int(np.sign(right))
        if s_left == s_right:
            sign = s_left
        else:
            t = xa / self.step - k
            interpolated = left + (right - left) * t
            sign = 0 if abs(interpolated) <= ZERO_RELATIVE_TOLERANCE * self.peak else int(np.sign(interpolated))
        if x < 0 and self.parity is Parity.ODD:
            sign = -sign
        return sign


def _action(potential: PotentialSpec, lam: float) -> float:
    """2 * int_0^X 2 pi sqrt(lam - V) dx over the classically allowed region."""
    turning = potential.outer_root(lam)
    if turning <= 0:
        return 0.0
    integrand = lambda x: math.sqrt(max(lam - float(potential(x)), 0.0))
    value, _ = integrate.quad(integrand, 0.0, turning, limit=200)
    return 2.0 * TWO_PI * value


def bohr_sommerfeld_eigenvalue(potential: PotentialSpec, n: int) -> float:
    """lambda with action pi (n + 1/2); exact for V = x^2."""
    if n < 0:
        raise InvalidInputError(f"Index must be >= 0, got {n}")
    target = math.pi * (n + 0.5)
    lo = potential.minimum()
    hi = lo + 1.0
    while _action(potential, hi) < target:
        hi = lo + 2.0 * (hi - lo)
    return float(optimize.brentq(lambda lam: _action(potential, lam) - target, lo, hi, xtol=1e-12))


def _decay_length(potential: PotentialSpec, lam: float, exponent: float) -> float:
    """Smallest L with 2 pi int_a^L sqrt(V - lam) dx = exponent, a the outer turning point."""
    turning = potential.outer_root(lam)
    integrand = lambda x: math.sqrt(max(float(potential(x)) - lam, 0.0))

    def excess(L):
        value, _ = integrate.quad(integrand, turning, L, limit=200)
        return TWO_PI * value - exponent

    hi = turning + 1.0
    while excess(hi) < 0:
        hi = turning + 2.0 * (hi - turning)
    return float(optimize.brentq(excess, turning, hi, xtol=1e-10))


def _domain(potential: PotentialSpec, lam_max: float, config: SolverConfig) -> Tuple[float, float]:
    """Domain length L and largest admissible step for a top eigenvalue lam_max."""
    level = config.domain_margin * lam_max if lam_max > 0 else lam_max + config.domain_margin
    length = max(potential.outer_root(level), _decay_length(potential, lam_max, config.decay_exponent))
    wavenumber = math.sqrt(max(lam_max, lam_max - potential.minimum()))
    return length, 1.0 / (config.points_per_wavelength * wavenumber)


def _numerov(V: np.ndarray, h: float, lams: np.ndarray, odd: bool, store: bool = False):
    """
    Shoot one trial solution per entry of `lams` across the grid.

    Returns node counts on (0, L], plus the full trajectories when `store`
    (no rescaling in that case).
    """
    c = (TWO_PI * h) ** 2 / 12.0
    K = len(V) - 1
    g_prev = 1.0 + c * (lams - V[0])
    g_curr = 1.0 + c * (lams - V[1])
    if odd:
        y_prev = np.zeros_like(lams)
        y_curr = h - (TWO_PI ** 2) * (lams - V[0]) * h ** 3 / 6.0
    else:
        y_prev = np.ones_like(lams)
        y_curr = (12.0 - 10.0 * g_prev) / (2.0 * g_curr)

    nodes = np.zeros(lams.shape, dtype=np.int64)
    if not odd:
        nodes += np.signbit(y_curr) != np.signbit(y_prev)
    values = None
    if store:
        values = np.empty((len(lams), K + 1))
        values[:, 0], values[:, 1] = y_prev, y_curr

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, K):
            g_next = 1.0 + c * (lams - V[k + 1])
            y_next = ((12.0 - 10.0 * g_curr) * y_curr - g_prev * y_prev) / g_next
            nodes += np.signbit(y_next) != np.signbit(y_curr)
            if store:
                values[:, k + 1] = y_next
            else:
                big = np.abs(y_next) > RESCALE_THRESHOLD
                if big.any():
                    factor = np.where(big, 1.0 / RESCALE_THRESHOLD, 1.0)
                    y_curr = y_curr * factor
                    y_next = y_next * factor
            y_prev, y_curr = y_curr, y_next
            g_prev, g_curr = g_curr, g_next
    return nodes, values


def _bisect_class(
    V: np.ndarray, h: float, ms: np.ndarray, odd: bool, floor: float, ceiling: float, config: SolverConfig,
) -> np.ndarray:
    """lambda_m = inf {lambda : nodes(lambda) >= m + 1} for every class index m."""
    lo = np.full(ms.shape, floor, dtype=np.float64)
    hi = np.full(ms.shape, ceiling, dtype=np.float64)

    for _ in range(64):
        nodes, _ = _numerov(V, h, hi, odd)
        short = nodes < ms + 1
        if not short.any():
            break
        hi[short] = floor + 2.0 * (hi[short] - floor)
    else:
        raise NonConvergenceError("Could not bracket eigenvalues from above", index=int(2 * ms[-1] + odd))

    for iteration in range(config.max_iterations):
        width = hi - lo
        open_ = width > config.eigenvalue_tolerance * np.maximum(np.abs(hi), np.finfo(float).tiny)
        if not open_.any():
            break
        mid = 0.5 * (lo[open_] + hi[open_])
        nodes, _ = _numerov(V, h, mid, odd)
        above = nodes >= ms[open_] + 1
        lo_open, hi_open = lo[open_], hi[open_]
        hi_open[above] = mid[above]
        lo_open[~above] = mid[~above]
        lo[open_], hi[open_] = lo_open, hi_open
    else:
        worst = int(np.argmax(hi - lo))
        n = int(2 * ms[worst] + odd)
        logger.error(f"Bisection did not converge for n={n} after {config.max_iterations} iterations")
        raise NonConvergenceError(
            "Eigenvalue bisection did not converge; grid or domain too coarse",
            index=n, eigenvalue=float(0.5 * (lo[worst] + hi[worst])),
        )
    return 0.5 * (lo + hi)


def _finish(potential: PotentialSpec, raw: np.ndarray, n: int, lam: float, h: float) -> Eigenpair:
    """Tail cleanup, normalization 2 int_0^L w^2 = 1 and sign fixing."""
    parity = Parity.of(n)
    values = raw.copy()
    turning = int(math.ceil(potential.outer_root(lam) / h))
    if turning < len(values) - 1:
        tail = np.abs(values[turning:])
        tail = np.where(np.isfinite(tail), tail, np.inf)
        cut = turning + int(np.argmin(tail))
        values[cut:] = 0.0

    norm = math.sqrt(2.0 * integrate.simpson(values ** 2, dx=h))
    sign = (-1) ** (n // 2)
    values *= sign / norm
    if parity is Parity.EVEN:
        w0, dw0 = float(values[0]), 0.0
    else:
        w0, dw0 = 0.0, sign / norm

    pair = Eigenpair(n=n, parity=parity, eigenvalue=float(lam), w0=w0, dw0=dw0, step=h, values=values)
    expected = n // 2
    found = pair.nodes()
    if found != expected:
        logger.error(f"n={n}: {found} nodes on (0, L), expected {expected}")
        raise NodeCountMismatch(f"Found {found} nodes, expected {expected}", index=n, eigenvalue=float(lam))
    return pair


def _solve_class(
    potential: PotentialSpec, grid: np.ndarray, h: float, indices: List[int], config: SolverConfig,
    ceiling: float,
) -> List[Eigenpair]:
    if not indices:
        return []
    odd = indices[0] % 2 == 1
    V = potential(grid)
    ms = np.array([n // 2 for n in indices], dtype=np.int64)
    floor = float(np.min(V))
    lams = _bisect_class(V, h, ms, odd, floor, ceiling, config)
    if np.any(np.diff(lams) <= 0):
        raise NodeCountMismatch("Eigenvalues within a parity class are not strictly increasing", index=indices[0])

    _, trajectories = _numerov(V, h, lams, odd, store=True)
    return [_finish(potential, trajectories[i], n, lams[i], h) for i, n in enumerate(indices)]


def solve_eigenpairs(
    potential: PotentialSpec, config: SolverConfig, indices: Optional[Iterable[int]] = None,
) -> List[Eigenpair]:
    """
    Eigenpairs for n = 0 .. config.n_max (or the given indices), in index order.

    The two parity classes are solved concurrently. The domain is sized from
    a Bohr-Sommerfeld estimate and checked again against the solved top
    eigenvalue; the solve is repeated on a larger domain when the check fails.
    """
    wanted = sorted(set(indices)) if indices is not None else list(range(config.n_max + 1))
    if not wanted or wanted[0] < 0:
        raise InvalidInputError(f"Indices must be a nonempty set of n >= 0, got {wanted}")
    lam_top = DOMAIN_SLACK * bohr_sommerfeld_eigenvalue(potential, wanted[-1])

    for attempt in range(MAX_DOMAIN_ATTEMPTS):
        length, h_max = _domain(potential, lam_top, config)
        K = int(math.ceil(length / h_max))
        h = length / K
        grid = np.arange(K + 1) * h
        ceiling = potential.minimum() + 2.0 * (lam_top - potential.minimum()) + 1.0
        logger.info(f"Solving {len(wanted)} eigenpairs of {potential} on [0, {length:.4f}] with {K} steps")

        classes = [[n for n in wanted if n % 2 == 0], [n for n in wanted if n % 2 == 1]]
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(_solve_class, potential, grid, h, c, config, ceiling) for c in classes]
            pairs = [p for future in futures for p in future.result()]
        pairs.sort(key=lambda p: p.n)

        actual = max(p.eigenvalue for p in pairs)
        need_length, need_step = _domain(potential, actual, config)
        if need_length <= length and h <= need_step:
            return pairs
        logger.info(f"Top eigenvalue {actual:.6g} needs L={need_length:.4f}; re-solving (attempt {attempt + 2})")
        lam_top = DOMAIN_SLACK * actual

    raise NonConvergenceError(
        "Domain did not stabilize around the solved eigenvalues", index=wanted[-1], eigenvalue=lam_top,
    )


def wkb_residual(pair: Eigenpair, K: float) -> float:
    """sup over grid points in [0, K] of |w_n - A cos(2 pi (sqrt(lambda) x - n/4))| / A."""
    if K <= 0:
        raise InvalidInputError(f"K must be positive, got {K}")
    if K > pair.length:
        raise InvalidInputError(f"K = {K} exceeds the solved domain length {pair.length}")
    if pair.eigenvalue <= 0:
        raise InvalidInputError(f"WKB form needs a positive eigenvalue, got {pair.eigenvalue}")
    root = math.sqrt(pair.eigenvalue)
    amplitude = math.hypot(pair.w0, pair.dw0 / (TWO_PI * root))
    x = pair.grid
    inside = x <= K
    model = amplitude * np.cos(TWO_PI * (root * x[inside] - pair.n / 4.0))
    return float(np.max(np.abs(pair.values[inside] - model)) / amplitude)


def classically_forbidden(potential: PotentialSpec, eigenvalue: float, x: float) -> bool:
    """V(x) > lambda: x lies outside the classically allowed region of the level."""
    return float(potential(abs(x))) > eigenvalue


def semiclassical_sign(potential: PotentialSpec, n: int, eigenvalue: float, x: float) -> int:
    """
    Sign of the WKB form cos(2 pi int_0^|x| sqrt(lambda - V) ds - n pi/2),
    reflected by parity; 0 where x is classically forbidden.
    """
    if classically_forbidden(potential, eigenvalue, x):
        return 0
    integrand = lambda s: math.sqrt(max(eigenvalue - float(potential(s)), 0.0))
    phase, _ = integrate.quad(integrand, 0.0, abs(x), limit=200)
    sign = int(np.sign(math.cos(TWO_PI * phase - n * math.pi / 2.0)))
    if x < 0 and n % 2 == 1:
        sign = -sign
    return sign


class EigenpairSource(SignPairSource):
    """Signs of solved eigenfunctions at two points; indices must run 0 .. len - 1."""

    family = "potential"

    def __init__(
        self, pairs: Sequence[Eigenpair], x: float, y: float, potential: Optional[PotentialSpec] = None,
    ):
        self.pairs = sorted(pairs, key=lambda p: p.n)
        if [p.n for p in self.pairs] != list(range(len(self.pairs))):
            raise InvalidInputError("Eigenpairs must cover indices 0 .. N-1 without gaps")
        if x == 0 or y == 0:
            raise InvalidInputError("Points must be nonzero")
        limit = min(p.length for p in self.pairs)
        for point in (x, y):
            if abs(point) > limit:
                raise InvalidInputError(f"Point {point} outside solved domain [-{limit}, {limit}]")
        self.x, self.y = float(x), float(y)
        self.potential = potential

    def sign_block(self, start: int, stop: int) -> SignBlock:
        if stop > len(self.pairs):
            raise SourceFailure("Not enough solved eigenpairs", index=len(self.pairs))
        chunk = self.pairs[start:stop]
        xs = np.array([p.sign_at(self.x) for p in chunk], dtype=np.int8)
        ys = np.array([p.sign_at(self.y) for p in chunk], dtype=np.int8)
        return xs, ys

    def forbidden_mask(self, point: float, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Indices in [start, stop) whose level does not reach `point`."""
        if self.potential is None:
            raise InvalidInputError("Classical regions need the potential the pairs were solved for")
        return np.array(
            [classically_forbidden(self.potential, p.eigenvalue, point) for p in self.pairs[start:stop]], dtype=bool,
        )

    def semiclassical_block(self, start: int = 0, stop: Optional[int] = None) -> SignBlock:
        """WKB signs at both points for indices in [start, stop)."""
        if self.potential is None:
            raise InvalidInputError("WKB signs need the potential the pairs were solved for")
        chunk = self.pairs[start:stop]
        xs = np.array([semiclassical_sign(self.potential, p.n, p.eigenvalue, self.x) for p in chunk], dtype=np.int8)
        ys = np.array([semiclassical_sign(self.potential, p.n, p.eigenvalue, self.y) for p in chunk], dtype=np.int8)
        return xs, ys

    def metadata(self) -> Dict[str, Any]:
        return {"family": self.family, "x": self.x, "y": self.y, "eigenpairs": len(self.pairs)}


def eigenpair_sign_source(
    pairs: Sequence[Eigenpair], x: float, y: float, potential: Optional[PotentialSpec] = None,
) -> EigenpairSource:
    return EigenpairSource(pairs, x, y, potential)


class SemiclassicalComparison(BaseModel):
    """Solved signs over [start, stop) against the WKB form, forbidden indices set apart."""

    start: int
    stop: int
    forbidden_x: int
    forbidden_y: int
    allowed: int = Field(..., description="Indices where both points are classically allowed")
    zero_hits_allowed: int
    mismatches: int = Field(..., description="Allowed indices whose solved and WKB signs differ at x or y")
    allowed_estimate: Optional[float] = None
    semiclassical_estimate: Optional[float] = None


def semiclassical_comparison(
    source: EigenpairSource, start: int = 0, stop: Optional[int] = None,
) -> SemiclassicalComparison:
    stop = len(source.pairs) if stop is None else stop
    if not 0 <= start < stop <= len(source.pairs):
        raise InvalidInputError(f"Index window [{start}, {stop}) outside 0 .. {len(source.pairs)}")
    xs, ys = source.sign_block(start, stop)
    wx, wy = source.semiclassical_block(start, stop)
    fx, fy = source.forbidden_mask(source.x, start, stop), source.forbidden_mask(source.y, start, stop)
    allowed = ~(fx | fy)
    zero = (xs == 0) | (ys == 0)
    solved_agree = (xs == ys) & ~zero
    wkb_agree = (wx == wy) & (wx != 0)
    count = int(np.count_nonzero(allowed))

    comparison = SemiclassicalComparison(
        start=start,
        stop=stop,
        forbidden_x=int(np.count_nonzero(fx)),
        forbidden_y=int(np.count_nonzero(fy)),
        allowed=count,
        zero_hits_allowed=int(np.count_nonzero(zero & allowed)),
        mismatches=int(np.count_nonzero(allowed & ((xs != wx) | (ys != wy)))),
        allowed_estimate=int(np.count_nonzero(solved_agree & allowed)) / count if count else None,
        semiclassical_estimate=int(np.count_nonzero(wkb_agree & allowed)) / count if count else None,
    )
    logger.info(
        f"WKB comparison on [{start}, {stop}): {comparison.forbidden_y} forbidden at y, "
        f"{comparison.mismatches} sign mismatches over {count} allowed indices"
    )
    return comparison


class EigenpairRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    index: int = Field(..., ge=0)
    parity: Parity
    eigenvalue: float = Field(..., alias="lambda")
    w0: float
    dw0: float
    step: float = Field(..., gt=0)
    values: List[float]


class EigenpairCache(BaseModel):
    version: int = CACHE_VERSION
    potential: List[float]
    config: Dict[str, Any] = Field(default_factory=dict)
    digest: str
    pairs: List[EigenpairRecord]


def eigenpair_digest(pairs: Sequence[Eigenpair]) -> str:
    """SHA-256 over indices, eigenvalues, initial data and sample bytes."""
    digest = hashlib.sha256()
    for p in sorted(pairs, key=lambda p: p.n):
        digest.update(f"{p.n}:{p.parity.value}:{p.eigenvalue!r}:{p.w0!r}:{p.dw0!r}:{p.step!r}:".encode())
        digest.update(np.ascontiguousarray(p.values, dtype=np.float64).tobytes())
    return digest.hexdigest()


def save_eigenpairs(
    path: Path, pairs: Sequence[Eigenpair], potential: PotentialSpec, config: Optional[SolverConfig] = None,
) -> str:
    """Write the JSON cache and return its content digest."""
    digest = eigenpair_digest(pairs)
    cache = EigenpairCache(
        potential=potential.coefficients,
        config=config.model_dump() if config else {},
        digest=digest,
        pairs=[
            EigenpairRecord(
                index=p.n, parity=p.parity, eigenvalue=p.eigenvalue, w0=p.w0, dw0=p.dw0,
                step=p.step, values=p.values.tolist(),
            )
            for p in pairs
        ],
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cache.model_dump_json(by_alias=True), encoding="utf-8")
    logger.info(f"Saved {len(pairs)} eigenpairs to {path} ({digest[:12]})")
    return digest


def load_eigenpairs(path: Path) -> Tuple[List[Eigenpair], PotentialSpec]:
    try:
        cache = EigenpairCache.model_validate_json(Path(path).read_text(encoding="utf-8"))
        potential = PotentialSpec(coefficients=cache.potential)
    except OSError as e:
        raise ConfigError(f"Cannot read eigenpair cache {path}: {e}")
    except ValidationError as e:
        raise ConfigError(f"Malformed eigenpair cache {path}: {e}")
    if cache.version != CACHE_VERSION:
        raise ConfigError(f"Unsupported eigenpair cache version {cache.version}")

    pairs = [
        Eigenpair(
            n=r.index, parity=r.parity, eigenvalue=r.eigenvalue, w0=r.w0, dw0=r.dw0,
            step=r.step, values=np.asarray(r.values, dtype=np.float64),
        )
        for r in cache.pairs
    ]
    if eigenpair_digest(pairs) != cache.digest:
        raise ConfigError(f"Eigenpair cache {path} does not match its recorded digest")
    logger.info(f"Loaded {len(pairs)} eigenpairs from {path}")
    return pairs, potential
