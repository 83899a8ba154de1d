"""
Empirical sign correlation limits.

An index n agrees when sgn w_n(x) = sgn w_n(y) != 0; indices where either
sign is zero are zero-hits, kept out of the numerator but not the
denominator. [0, N) is cut into fixed-size blocks that workers evaluate
independently; blocks are merged in index order so counts do not depend on
the number of threads.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, ValidationError, field_validator

from .config import BLOCK_SIZE, resolve_threads
from .equidistribution import power_of_two_checkpoints, h2_report
from .errors import ConfigError, InvalidInputError, SourceFailure
from .predictors import (
    Prediction,
    PredictorMethod,
    RationalRatio,
    WkbFamily,
    chebyshev_orbit_density,
    predict,
    to_exact,
)
from .reports import CheckpointRow, ExperimentReport, SeriesRow, make_meta
from .schrodinger_solver import (
    EigenpairSource,
    PotentialSpec,
    SolverConfig,
    eigenpair_digest,
    eigenpair_sign_source,
    load_eigenpairs,
    save_eigenpairs,
    semiclassical_comparison,
    solve_eigenpairs,
)
from .sources import ChebyshevPairSource, HermitePairSource, LaguerrePairSource, SignPairSource
from .special_functions import AngleFraction, LaguerreParams

logger = logging.getLogger(__name__)

CHEBYSHEV_REFERENCE = Fraction(1, 3)
CHEBYSHEV_REFERENCE_RATIO = 3
CHEBYSHEV_CLAIMED_BOUND = 10.0
DEFAULT_REFERENCE_HORIZON = 10_000
# Targets are read as fractions with denominators up to this bound.
TARGET_DENOMINATOR = 10**9
# |estimate - prediction| above this is reported as drift.
DRIFT_TOLERANCE = 0.05


class CorrelationReport(BaseModel):
    n: int = Field(..., ge=1)
    agree: int
    disagree: int
    zero_hits: int
    estimate: float = Field(..., ge=0.0, le=1.0)
    checkpoints: List[CheckpointRow] = Field(default_factory=list)
    target: Optional[float] = None
    max_abs_remainder: Optional[float] = None
    argmax_remainder: Optional[int] = None

    _agree_series: Any = PrivateAttr(default=None)

    def agree_series(self) -> np.ndarray:
        """agree(N) for N = 1 .. n."""
        return self._agree_series


def worst_remainder(agree_series: np.ndarray, target: float, horizon: Optional[int] = None) -> Tuple[float, int]:
    """
    max |agree(N) - target * N| over N <= horizon and the first N attaining it.

    Computed on integers over the target's denominator, so equal remainders
    compare equal and the earliest N wins.
    """
    horizon = len(agree_series) if horizon is None else horizon
    exact = Fraction(target).limit_denominator(TARGET_DENOMINATOR)
    ns = np.arange(1, horizon + 1, dtype=np.int64)
    scaled = np.abs(agree_series[:horizon].astype(np.int64) * exact.denominator - exact.numerator * ns)
    worst = int(np.argmax(scaled))
    return float(Fraction(int(scaled[worst]), exact.denominator)), worst + 1


def _locate_failure(source: SignPairSource, start: int, stop: int) -> int:
    """First failing index in [start, stop), by bisection over sub-blocks."""
    while stop - start > 1:
        mid = (start + stop) // 2
        try:
            source.sign_block(start, mid)
        except Exception:
            stop = mid
        else:
            start = mid
    return start


def _count_block(source: SignPairSource, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        xs, ys = source.sign_block(start, stop)
    except SourceFailure:
        raise
    except Exception as e:
        index = _locate_failure(source, start, stop)
        logger.error(f"Sign source {source.family} failed at n={index} in block [{start}, {stop}): {e}")
        raise SourceFailure(f"{type(e).__name__}: {e}", index=index) from e
    if len(xs) != stop - start or len(ys) != stop - start:
        raise SourceFailure(
            f"Source returned {len(xs)}/{len(ys)} signs for a block of {stop - start}",
            index=start + min(len(xs), len(ys)),
        )
    zero = (xs == 0) | (ys == 0)
    agree = (xs == ys) & ~zero
    return agree, zero


def _validate_schedule(checkpoints: Optional[Sequence[int]], N: int) -> List[int]:
    if checkpoints is None:
        return power_of_two_checkpoints(N)
    schedule = sorted(set(int(c) for c in checkpoints))
    if not schedule or schedule[0] < 1 or schedule[-1] > N:
        raise InvalidInputError(f"Checkpoints must lie in 1..{N}, got {list(checkpoints)}")
    return schedule


def estimate_limit(
    source: SignPairSource,
    N: int,
    checkpoints: Optional[Sequence[int]] = None,
    target: Optional[float] = None,
    threads: Optional[int] = None,
) -> CorrelationReport:
    """Count agreements over n = 0 .. N-1 and report agree/N with checkpoint estimates."""
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    if target is not None and not 0.0 <= target <= 1.0:
        raise InvalidInputError(f"Target must lie in [0, 1], got {target}")
    schedule = _validate_schedule(checkpoints, N)
    workers = resolve_threads(threads)

    blocks = [(start, min(start + BLOCK_SIZE, N)) for start in range(0, N, BLOCK_SIZE)]
    if workers > 1 and len(blocks) > 1:
        source.prepare([start for start, _ in blocks])
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _count_block(source, *b), blocks))
    else:
        results = [_count_block(source, start, stop) for start, stop in blocks]

    agree_mask = np.concatenate([r[0] for r in results])
    zero_mask = np.concatenate([r[1] for r in results])
    agree_series = np.cumsum(agree_mask, dtype=np.int64)
    agree = int(agree_series[-1])
    zero_hits = int(np.count_nonzero(zero_mask))

    report = CorrelationReport(
        n=N,
        agree=agree,
        disagree=N - agree - zero_hits,
        zero_hits=zero_hits,
        estimate=agree / N,
        checkpoints=[
            CheckpointRow(n=c, agree=int(agree_series[c - 1]), estimate=int(agree_series[c - 1]) / c) for c in schedule
        ],
        target=target,
    )
    report._agree_series = agree_series
    if target is not None:
        report.max_abs_remainder, report.argmax_remainder = worst_remainder(agree_series, target)

    logger.info(f"{source.family}: agree={agree} zero_hits={zero_hits} over N={N} -> {report.estimate:.6f}")
    return report


class ReferenceComparison(BaseModel):
    """Deviation |agree(N) - limit * N| over N <= horizon, against a claimed bound."""

    limit: float
    horizon: int
    max_abs_deviation: float
    argmax: int
    claimed_bound: Optional[float] = None
    within_claim: Optional[bool] = None


def compare_reference(
    report: CorrelationReport, limit: float, horizon: Optional[int] = None, claimed_bound: Optional[float] = None,
) -> ReferenceComparison:
    horizon = min(horizon or report.n, report.n)
    value, argmax = worst_remainder(report.agree_series(), limit, horizon)
    within = None if claimed_bound is None else value <= claimed_bound
    if within is False:
        logger.warning(
            f"Deviation from reference {limit:.6f} reaches {value:.3f} at N={argmax}, "
            f"beyond the claimed bound {claimed_bound:g}"
        )
    return ReferenceComparison(
        limit=limit, horizon=horizon, max_abs_deviation=value, argmax=argmax,
        claimed_bound=claimed_bound, within_claim=within,
    )


class RemainderScan(BaseModel):
    target: float
    stride: int
    n_max: int
    max_abs_remainder: float
    argmax_remainder: int
    final_remainder: float
    reference: Optional[ReferenceComparison] = None
    report: CorrelationReport

    def rows(self) -> List[SeriesRow]:
        """(n, agree, estimate, remainder) at every stride-th N and at N_max."""
        ns = list(range(self.stride, self.n_max + 1, self.stride))
        if not ns or ns[-1] != self.n_max:
            ns.append(self.n_max)
        series = self.report.agree_series()
        return [(n, int(series[n - 1]), int(series[n - 1]) / n, float(series[n - 1] - self.target * n)) for n in ns]


def remainder_scan(
    source: SignPairSource,
    N_max: int,
    target: float,
    stride: int = 1,
    reference: Optional[float] = None,
    claimed_bound: Optional[float] = None,
    reference_horizon: Optional[int] = None,
    threads: Optional[int] = None,
) -> RemainderScan:
    """R(N) = agree(N) - target * N for N <= N_max, its running maximum and an optional reference comparison."""
    if not 0.0 <= target <= 1.0:
        raise InvalidInputError(f"Target must lie in [0, 1], got {target}")
    if stride < 1:
        raise InvalidInputError(f"Stride must be >= 1, got {stride}")
    report = estimate_limit(source, N_max, target=target, threads=threads)
    comparison = None
    if reference is not None:
        comparison = compare_reference(report, reference, reference_horizon, claimed_bound)
    return RemainderScan(
        target=target,
        stride=stride,
        n_max=N_max,
        max_abs_remainder=report.max_abs_remainder,
        argmax_remainder=report.argmax_remainder,
        final_remainder=float(report.agree - target * N_max),
        reference=comparison,
        report=report,
    )


class Family(str, Enum):
    HERMITE = "hermite"
    LAGUERRE = "laguerre"
    CHEBYSHEV = "chebyshev"
    POTENTIAL = "potential"


class ExperimentConfig(BaseModel):
    """One estimation run; points are kept as strings so rational inputs stay exact."""

    family: Family
    n: int = Field(..., ge=1, description="Number of indices 0 .. n-1")
    x: Optional[str] = None
    y: Optional[str] = None
    r1: Optional[str] = None
    r2: Optional[str] = None
    d: Optional[int] = Field(None, ge=1)
    angle: Optional[str] = None
    ratio: Optional[int] = Field(None, ge=1)
    potential: Optional[List[float]] = None
    eigenpairs: Optional[str] = Field(None, description="Eigenpair cache path")
    points_per_wavelength: float = Field(50.0, gt=0)
    domain_margin: float = Field(2.0, gt=0)
    eigenvalue_tolerance: float = Field(1e-10, gt=0)
    predictor: str = "auto"
    theta: Optional[str] = None
    scan: bool = False
    target: Optional[str] = None
    stride: int = Field(1, ge=1)
    checkpoints: Optional[List[int]] = None
    reference_horizon: int = Field(DEFAULT_REFERENCE_HORIZON, ge=1)
    h2_threshold: float = Field(0.1, gt=0)
    threads: Optional[int] = Field(None, ge=1)

    @field_validator("predictor")
    @classmethod
    def _known_predictor(cls, value: str) -> str:
        value = value.strip().lower()
        if value not in ("auto", "none") and value not in {m.value for m in PredictorMethod}:
            raise ValueError(f"unknown predictor {value!r}")
        return value

    def hashable(self) -> Dict[str, Any]:
        """Settings that determine the result; the thread count does not."""
        return self.model_dump(mode="json", exclude={"threads"})


def load_experiment_config(values: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment configuration: {e}")


def _require(config: ExperimentConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        raise ConfigError(f"Family {config.family.value} requires {', '.join(missing)}")


def _point(text: str, name: str) -> float:
    value = float(to_exact(text))
    if value == 0:
        raise ConfigError(f"{name} must be nonzero")
    return value


def _chebyshev_angles(config: ExperimentConfig) -> Tuple[AngleFraction, AngleFraction]:
    try:
        first = AngleFraction.parse(config.angle)
        return first, first.scaled(config.ratio)
    except InvalidInputError as e:
        raise ConfigError(str(e))


def _eigenpairs(config: ExperimentConfig, diagnostics: Dict[str, Any]):
    """Load cached eigenpairs when they suffice, otherwise solve (and cache when a path is given)."""
    potential = PotentialSpec(coefficients=config.potential) if config.potential else None
    cache = Path(config.eigenpairs) if config.eigenpairs else None
    pairs = None
    if cache is not None and cache.exists():
        pairs, cached_potential = load_eigenpairs(cache)
        if potential is not None and cached_potential.coefficients != potential.coefficients:
            raise ConfigError(f"Cache {cache} holds {cached_potential}, not {potential}")
        potential = cached_potential
        if len(pairs) < config.n:
            logger.info(f"Cache {cache} holds {len(pairs)} eigenpairs, {config.n} needed; solving again")
            pairs = None
    if potential is None:
        raise ConfigError("Family potential requires potential coefficients or an existing eigenpair cache")
    if pairs is None:
        solver = SolverConfig(
            n_max=config.n - 1,
            points_per_wavelength=config.points_per_wavelength,
            domain_margin=config.domain_margin,
            eigenvalue_tolerance=config.eigenvalue_tolerance,
        )
        pairs = solve_eigenpairs(potential, solver)
        if cache is not None:
            save_eigenpairs(cache, pairs, potential, solver)
    pairs = pairs[: config.n]
    diagnostics["potential"] = str(potential)
    diagnostics["eigenpairs"] = len(pairs)
    diagnostics["eigenpair_digest"] = eigenpair_digest(pairs)
    diagnostics["domain_length"] = min(p.length for p in pairs)
    return pairs, potential


def build_source(config: ExperimentConfig, diagnostics: Optional[Dict[str, Any]] = None) -> SignPairSource:
    """The sign pair source a configuration describes."""
    diagnostics = diagnostics if diagnostics is not None else {}
    family = config.family
    if family is Family.HERMITE:
        _require(config, "x", "y")
        return HermitePairSource(_point(config.x, "x"), _point(config.y, "y"))
    if family is Family.LAGUERRE:
        _require(config, "r1", "r2", "d")
        try:
            return LaguerrePairSource(
                LaguerreParams.from_dimension(config.d, float(to_exact(config.r1))),
                LaguerreParams.from_dimension(config.d, float(to_exact(config.r2))),
            )
        except InvalidInputError as e:
            raise ConfigError(str(e))
    if family is Family.CHEBYSHEV:
        _require(config, "angle", "ratio")
        return ChebyshevPairSource(*_chebyshev_angles(config))
    _require(config, "x", "y")
    pairs, potential = _eigenpairs(config, diagnostics)
    return eigenpair_sign_source(pairs, _point(config.x, "x"), _point(config.y, "y"), potential)


def _ratio(config: ExperimentConfig) -> RationalRatio:
    if config.family is Family.CHEBYSHEV:
        _require(config, "ratio")
        return RationalRatio(1, config.ratio)
    if config.family is Family.LAGUERRE:
        _require(config, "r1", "r2")
        return RationalRatio.of(config.r1, config.r2)
    _require(config, "x", "y")
    return RationalRatio.of(config.x, config.y)


def _wkb_family(config: ExperimentConfig) -> WkbFamily:
    if config.family is Family.LAGUERRE:
        _require(config, "d")
        return WkbFamily.laguerre(config.d)
    if config.family is Family.CHEBYSHEV:
        return WkbFamily.chebyshev()
    return WkbFamily.schrodinger()


def _auto_method(config: ExperimentConfig) -> PredictorMethod:
    if config.family is Family.LAGUERRE:
        return PredictorMethod.PROP2
    if config.family is Family.CHEBYSHEV:
        angle, _ = _chebyshev_angles(config)
        return PredictorMethod.ORBIT if angle.is_rational else PredictorMethod.THEOREM1
    if config.family is Family.HERMITE:
        _require(config, "x", "y")
        if (to_exact(config.y) / to_exact(config.x)).denominator == 1:
            return PredictorMethod.PROP1
    return PredictorMethod.THEOREM2


def select_prediction(config: ExperimentConfig) -> Optional[Prediction]:
    """The predicted limit for a configuration, or None when no predictor is wanted."""
    if config.predictor == "none":
        return None
    method = _auto_method(config) if config.predictor == "auto" else PredictorMethod(config.predictor)

    if method is PredictorMethod.THEOREM1:
        ratio = _ratio(config)
        theta = to_exact(config.theta) if config.theta is not None else Fraction(0)
        return predict(method, ratio=ratio, theta=theta)
    if method is PredictorMethod.THEOREM2:
        return predict(method, ratio=_ratio(config))
    if method is PredictorMethod.WKB:
        return predict(method, ratio=_ratio(config), family=_wkb_family(config))
    if method is PredictorMethod.PROP1:
        _require(config, "x", "y")
        return predict(method, x=config.x, y=config.y)
    if method is PredictorMethod.PROP2:
        _require(config, "r1", "r2", "d")
        return predict(method, r1=config.r1, r2=config.r2, d=config.d)
    _require(config, "angle", "ratio")
    angle, _ = _chebyshev_angles(config)
    if not angle.is_rational:
        raise ConfigError("The orbit predictor needs a rational angle fraction")
    return predict(method, angle=angle, ratio=config.ratio)


def _resolve_target(config: ExperimentConfig, prediction: Optional[Prediction]) -> float:
    if config.target is None or config.target.strip().lower() == "auto":
        if prediction is None:
            raise ConfigError("target 'auto' needs a predictor")
        return prediction.limit
    try:
        return float(to_exact(config.target))
    except InvalidInputError as e:
        raise ConfigError(str(e))


def _chebyshev_reference(
    config: ExperimentConfig, angle: AngleFraction, prediction: Optional[Prediction],
) -> Tuple[Optional[float], Optional[float]]:
    """The published 1/3 reference and its bound for ratio 3, else the exact density or the prediction."""
    if config.ratio == CHEBYSHEV_REFERENCE_RATIO:
        return float(CHEBYSHEV_REFERENCE), CHEBYSHEV_CLAIMED_BOUND
    if angle.is_rational:
        return float(chebyshev_orbit_density(angle, config.ratio)), None
    if prediction is not None:
        return prediction.limit, None
    return None, None


def _chebyshev_diagnostics(
    config: ExperimentConfig, report: CorrelationReport, prediction: Optional[Prediction],
    diagnostics: Dict[str, Any],
) -> None:
    angle, _ = _chebyshev_angles(config)
    limit, bound = _chebyshev_reference(config, angle, prediction)
    if limit is not None:
        diagnostics["reference"] = compare_reference(report, limit, config.reference_horizon, bound).model_dump()
    if angle.is_rational:
        density = chebyshev_orbit_density(angle, config.ratio)
        diagnostics["orbit_period"] = angle.exact.denominator
        diagnostics["orbit_density"] = str(density)
        diagnostics["orbit_density_value"] = float(density)
        if config.ratio == CHEBYSHEV_REFERENCE_RATIO and density != CHEBYSHEV_REFERENCE:
            diagnostics["note"] = (
                f"sgn T_n at a rational angle fraction is periodic in n with period "
                f"{angle.exact.denominator}, so the exact agreement density is {density}, not "
                f"{CHEBYSHEV_REFERENCE}; the deviation from N/3 grows linearly and the bound "
                f"{CHEBYSHEV_CLAIMED_BOUND:g} fails"
            )
            logger.warning(f"Chebyshev orbit density {density} differs from reference {CHEBYSHEV_REFERENCE}")
    else:
        diagnostics["angle_precision_bits"] = 128


def _potential_diagnostics(
    config: ExperimentConfig, source: EigenpairSource, report: CorrelationReport,
    prediction: Optional[Prediction], diagnostics: Dict[str, Any],
) -> None:
    flags = diagnostics.setdefault("prediction_flags", [])
    if source.potential is not None:
        comparison = semiclassical_comparison(source, 0, report.n)
        diagnostics["semiclassical"] = comparison.model_dump()
        if comparison.forbidden_x or comparison.forbidden_y:
            flags.append("classically_forbidden_indices")
            logger.warning(
                f"{comparison.forbidden_x} indices are classically forbidden at x and {comparison.forbidden_y} at y; "
                f"their signs come from the decaying tail"
            )
    if prediction is not None and abs(report.estimate - prediction.limit) > DRIFT_TOLERANCE:
        flags.append("wkb_phase_drift")
        diagnostics["note"] = (
            f"estimate {report.estimate:.4f} is more than {DRIFT_TOLERANCE:g} from the limit "
            f"{prediction.limit:.4f}; at this N the eigenfunction phase at y still differs from "
            f"sqrt(lambda_n) y, compare the WKB sign estimate under 'semiclassical'"
        )
        logger.warning(f"Estimate {report.estimate:.4f} drifts from predicted limit {prediction.limit:.4f}")
    if not flags:
        del diagnostics["prediction_flags"]

    lambdas = [p.eigenvalue for p in source.pairs]
    if len(lambdas) < 2:
        return
    h2 = h2_report(lambdas, source.x, threshold=config.h2_threshold)
    diagnostics["h2"] = {
        s.parity: {"count": s.count, "final_discrepancy": s.final_discrepancy, "equidistributed": s.equidistributed}
        for s in h2.series
    }
    diagnostics["h2_disclaimer"] = h2.disclaimer
    if not all(p.sign_normalized() for p in source.pairs):
        diagnostics["sign_normalization"] = "violated"


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Build the source, estimate, optionally scan remainders, and compare with the predicted limit."""
    started = time.perf_counter()
    logger.info(f"Running {config.family.value} experiment over N={config.n}")
    diagnostics: Dict[str, Any] = {}
    prediction = select_prediction(config)
    source = build_source(config, diagnostics)

    scan = None
    if config.scan:
        target = _resolve_target(config, prediction)
        scan = remainder_scan(source, config.n, target, stride=config.stride, threads=config.threads)
        report = scan.report
        if config.checkpoints:
            report.checkpoints = estimate_limit_checkpoints(report, config.checkpoints)
    else:
        target = prediction.limit if prediction is not None else None
        report = estimate_limit(source, config.n, config.checkpoints, target=target, threads=config.threads)

    diagnostics["source"] = source.metadata()
    diagnostics["zero_hit_fraction"] = report.zero_hits / report.n
    if prediction is not None and prediction.flags:
        diagnostics["prediction_flags"] = list(prediction.flags)
    if config.family is Family.CHEBYSHEV:
        _chebyshev_diagnostics(config, report, prediction, diagnostics)
    if isinstance(source, EigenpairSource):
        _potential_diagnostics(config, source, report, prediction, diagnostics)

    params = {k: v for k, v in config.hashable().items() if v is not None}
    gap = None if prediction is None else abs(report.estimate - prediction.limit)
    result = ExperimentReport(
        family=config.family.value,
        method=prediction.method.value if prediction is not None else None,
        params=params,
        n=report.n,
        agree=report.agree,
        zero_hits=report.zero_hits,
        estimate=report.estimate,
        prediction=prediction.limit if prediction is not None else None,
        gap=gap,
        max_abs_remainder=report.max_abs_remainder,
        checkpoints=report.checkpoints,
        diagnostics=diagnostics,
        meta=make_meta(config.hashable(), time.perf_counter() - started),
    )

    if scan is not None:
        rows = scan.rows()
    else:
        rows = [
            (c.n, c.agree, c.estimate, None if target is None else float(c.agree - target * c.n))
            for c in report.checkpoints
        ]
    result.attach_rows(rows)
    logger.info(f"Experiment finished: estimate={report.estimate:.6f} prediction={result.prediction}")
    return result


def estimate_limit_checkpoints(report: CorrelationReport, checkpoints: Sequence[int]) -> List[CheckpointRow]:
    """Checkpoint estimates re-read from a finished report's agree series."""
    series = report.agree_series()
    schedule = _validate_schedule(checkpoints, report.n)
    return [CheckpointRow(n=c, agree=int(series[c - 1]), estimate=int(series[c - 1]) / c) for c in schedule]
