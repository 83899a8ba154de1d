#!/usr/bin/env python3
"""
Sign Correlation Lab command line
predict, average, estimate, scan and solve subcommands with JSON/CSV output
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, ValidationError

from . import __version__
from .config import cache_dir, log_level, output_dir, read_config_file
from .correlation_lab import Family, load_experiment_config, run_experiment
from .errors import ConfigError, InvalidInputError, NodeCountMismatch, NonConvergenceError, NumericalFailure
from .predictors import IrrationalRatio, PredictorMethod, WkbFamily, parse_ratio, predict
from .reports import OutputFormat, ReportMeta, make_meta, write_outputs
from .schrodinger_solver import PotentialSpec, SolverConfig, eigenpair_digest, save_eigenpairs, solve_eigenpairs
from .special_functions import AngleFraction
from .torus_dynamics import TorusRay, ray_average_breakpoints, ray_average_closed_form

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

WKB_PRESETS = ("schrodinger", "laguerre", "chebyshev")


class UsageError(ConfigError):
    """Malformed command line."""


class LabArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as exceptions so main() owns the exit code."""

    def error(self, message):
        raise UsageError(message)


def _phase(text: str):
    """'p/q' stays exact, anything else is a float."""
    text = text.strip()
    try:
        return Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"Invalid phase {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"Expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"Expected comma-separated numbers, got {text!r}")


class CliConfig(BaseModel):
    """Validated common options of one invocation."""

    command: str
    output_format: OutputFormat = OutputFormat.BOTH
    output_dir: Path
    log_level: str = "INFO"
    threads: Optional[int] = Field(None, ge=1)
    stem: Optional[str] = None


class SolvedLevel(BaseModel):
    n: int
    parity: str
    eigenvalue: float = Field(..., alias="lambda")
    nodes: int
    sign_normalized: bool

    model_config = {"populate_by_name": True}


class SolveReport(BaseModel):
    potential: List[float]
    n_max: int
    domain_length: float
    step: float
    eigenpair_digest: str
    cache: Optional[str] = None
    levels: List[SolvedLevel]
    meta: ReportMeta


class LabManager:
    def __init__(self, settings: CliConfig):
        self.settings = settings

    def _emit(self, payload: Dict[str, Any]) -> None:
        print(json.dumps(payload, indent=2, default=str))

    def predict(self, args) -> int:
        """Evaluate one predictor."""
        method = PredictorMethod(args.method)
        params: Dict[str, Any] = {}
        if method in (PredictorMethod.THEOREM1, PredictorMethod.THEOREM2, PredictorMethod.WKB):
            if args.ratio is None:
                raise UsageError(f"--ratio is required for {method.value}")
            params["ratio"] = parse_ratio(args.ratio)
        if method is PredictorMethod.THEOREM1:
            params["theta"] = _phase(args.theta) if args.theta is not None else Fraction(0)
        elif method is PredictorMethod.WKB:
            if isinstance(params["ratio"], IrrationalRatio):
                raise UsageError("wkb needs a rational --ratio")
            if args.wkb_family == "laguerre":
                if args.d is None:
                    raise UsageError("--d is required for the laguerre family")
                params["family"] = WkbFamily.laguerre(args.d)
            elif args.wkb_family == "chebyshev":
                params["family"] = WkbFamily.chebyshev()
            else:
                params["family"] = WkbFamily.schrodinger()
        elif method is PredictorMethod.PROP1:
            if args.x is None or args.y is None:
                raise UsageError("--x and --y are required for prop1")
            params.update(x=args.x, y=args.y)
        elif method is PredictorMethod.PROP2:
            if None in (args.r1, args.r2, args.d):
                raise UsageError("--r1, --r2 and --d are required for prop2")
            params.update(r1=args.r1, r2=args.r2, d=args.d)
        elif method is PredictorMethod.ORBIT:
            if args.angle is None or args.ratio is None:
                raise UsageError("--angle and --ratio are required for orbit")
            ratio = parse_ratio(args.ratio)
            if isinstance(ratio, IrrationalRatio) or ratio.q != 1:
                raise UsageError("orbit needs an integer --ratio")
            params.update(angle=AngleFraction.parse(args.angle), ratio=ratio.p)

        prediction = predict(method, **params)
        self._emit(prediction.model_dump(mode="json"))
        return EXIT_OK

    def average(self, args) -> int:
        """Closed-form ray average next to the breakpoint oracle."""
        ray = TorusRay.from_direction(args.p, args.q, _phase(args.alpha), _phase(args.beta))
        closed = ray_average_closed_form(ray)
        oracle = ray_average_breakpoints(ray)
        self._emit({
            "p": ray.p, "q": ray.q, "alpha": str(ray.alpha), "beta": str(ray.beta),
            "closed_form": closed, "breakpoints": oracle, "difference": abs(closed - oracle),
        })
        return EXIT_OK

    def _experiment(self, args, scan: bool) -> int:
        values = {
            "family": args.family, "n": args.n, "x": args.x, "y": args.y,
            "r1": args.r1, "r2": args.r2, "d": args.d, "angle": args.angle, "ratio": args.ratio,
            "potential": _float_list(args.potential) if args.potential else None,
            "eigenpairs": args.eigenpairs,
            "points_per_wavelength": args.points_per_wavelength,
            "domain_margin": args.domain_margin,
            "eigenvalue_tolerance": args.eigenvalue_tolerance,
            "predictor": args.predictor, "theta": args.theta,
            "checkpoints": _int_list(args.checkpoints) if args.checkpoints else None,
            "h2_threshold": args.h2_threshold,
            "threads": self.settings.threads,
            "scan": scan,
        }
        if scan:
            values.update(target=args.target, stride=args.stride, reference_horizon=args.reference_horizon)
        config = load_experiment_config({k: v for k, v in values.items() if v is not None})

        report = run_experiment(config)
        stem = self.settings.stem or f"{self.settings.command}-{config.family.value}"
        written = write_outputs(report, report.rows, self.settings.output_dir, stem, self.settings.output_format)
        summary = report.model_dump(mode="json", include={
            "family", "method", "n", "estimate", "zero_hits", "prediction", "gap", "max_abs_remainder", "diagnostics",
        })
        summary["outputs"] = [str(p) for p in written]
        self._emit(summary)
        return EXIT_OK

    def estimate(self, args) -> int:
        return self._experiment(args, scan=False)

    def scan(self, args) -> int:
        return self._experiment(args, scan=True)

    def solve(self, args) -> int:
        """Solve eigenpairs, cache them and write the eigenvalue table."""
        potential = PotentialSpec.parse(args.potential)
        try:
            solver = SolverConfig(
                n_max=args.n_max,
                points_per_wavelength=args.points_per_wavelength,
                domain_margin=args.domain_margin,
                eigenvalue_tolerance=args.eigenvalue_tolerance,
            )
        except ValidationError as e:
            raise ConfigError(f"Invalid solver configuration: {e}")

        pairs = solve_eigenpairs(potential, solver)
        digest = eigenpair_digest(pairs)
        cache = Path(args.cache) if args.cache else cache_dir() / f"eigenpairs-{digest[:16]}.json"
        save_eigenpairs(cache, pairs, potential, solver)

        payload = {"potential": potential.coefficients, **solver.model_dump()}
        report = SolveReport(
            potential=potential.coefficients,
            n_max=solver.n_max,
            domain_length=pairs[0].length,
            step=pairs[0].step,
            eigenpair_digest=digest,
            cache=str(cache),
            levels=[
                SolvedLevel(
                    n=p.n, parity=p.parity.value, eigenvalue=p.eigenvalue,
                    nodes=p.nodes(), sign_normalized=p.sign_normalized(),
                )
                for p in pairs
            ],
            meta=make_meta(payload),
        )
        stem = self.settings.stem or "solve"
        write_outputs(report, [], self.settings.output_dir, stem, OutputFormat.JSON)
        self._emit(report.model_dump(mode="json", by_alias=True, exclude={"levels"}) | {"levels": len(pairs)})
        return EXIT_OK


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help='Flat key = value file; explicit flags override it')
    parser.add_argument('--format', dest='output_format', default='both',
                        choices=[f.value for f in OutputFormat], help='Report files to write (default both)')
    parser.add_argument('--output-dir', default=None, help='Directory for reports (default $SIGNCORR_OUTPUT_DIR or results)')
    parser.add_argument('--name', dest='stem', default=None, help='Base name of the report files')
    parser.add_argument('--threads', type=int, default=None, help='Worker threads (default $SIGNCORR_THREADS or CPU count)')
    parser.add_argument('--log-level', default=None, help='Logging level (default $SIGNCORR_LOG_LEVEL or INFO)')


def _solver_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--points-per-wavelength', type=float, default=50.0, help='Grid density (default 50)')
    parser.add_argument('--domain-margin', type=float, default=2.0, help='V(L) >= margin * lambda_max (default 2)')
    parser.add_argument('--eigenvalue-tolerance', type=float, default=1e-10, help='Relative bisection width (default 1e-10)')


def _family_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--family', required=True, choices=[f.value for f in Family], help='Function family')
    parser.add_argument('--n', type=int, required=True, help='Number of indices 0 .. n-1')
    parser.add_argument('--x', help='First point (hermite, potential)')
    parser.add_argument('--y', help='Second point (hermite, potential)')
    parser.add_argument('--r1', help='First radius (laguerre)')
    parser.add_argument('--r2', help='Second radius (laguerre)')
    parser.add_argument('--d', type=int, help='Dimension (laguerre)')
    parser.add_argument('--angle', help="Angle fraction a: 'p/q', '(sqrt(D)-b)/c' or decimal (chebyshev)")
    parser.add_argument('--ratio', type=int, help='Second angle is ratio * a (chebyshev)')
    parser.add_argument('--potential', help="Even coefficients c_0,c_1,... of V (potential)")
    parser.add_argument('--eigenpairs', help='Eigenpair cache to load or create (potential)')
    parser.add_argument('--predictor', default='auto',
                        help='auto, none, or one of ' + ', '.join(m.value for m in PredictorMethod))
    parser.add_argument('--theta', help='Phase for theorem1 (default 0)')
    parser.add_argument('--checkpoints', help='Comma-separated checkpoint N values (default powers of 2)')
    parser.add_argument('--h2-threshold', type=float, default=0.1, help='Discrepancy threshold for the equidistribution check')
    _solver_options(parser)


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = LabArgumentParser(prog='signcorr', description='Sign Correlation Lab')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', parser_class=LabArgumentParser, help='Available commands')
    commands = {}

    # Predict command
    predict_parser = subparsers.add_parser('predict', help='Evaluate a closed-form predictor')
    predict_parser.add_argument('--method', required=True, choices=[m.value for m in PredictorMethod])
    predict_parser.add_argument('--ratio', help="x/y as 'p/q' or 'irrational'")
    predict_parser.add_argument('--theta', help='Common phase for theorem1 (default 0)')
    predict_parser.add_argument('--wkb-family', default='schrodinger', choices=WKB_PRESETS)
    predict_parser.add_argument('--x')
    predict_parser.add_argument('--y')
    predict_parser.add_argument('--r1')
    predict_parser.add_argument('--r2')
    predict_parser.add_argument('--d', type=int)
    predict_parser.add_argument('--angle')
    commands['predict'] = predict_parser

    # Average command
    average_parser = subparsers.add_parser('average', help='Ray average of Phi with the breakpoint oracle')
    average_parser.add_argument('--p', type=int, required=True)
    average_parser.add_argument('--q', type=int, required=True)
    average_parser.add_argument('--alpha', default='0')
    average_parser.add_argument('--beta', default='0')
    commands['average'] = average_parser

    # Estimate command
    estimate_parser = subparsers.add_parser('estimate', help='Estimate a sign correlation limit')
    _family_options(estimate_parser)
    commands['estimate'] = estimate_parser

    # Scan command
    scan_parser = subparsers.add_parser('scan', help='Remainder scan agree(N) - target N')
    _family_options(scan_parser)
    scan_parser.add_argument('--target', default='auto', help="Limit to subtract, or 'auto' for the predictor")
    scan_parser.add_argument('--stride', type=int, default=1, help='Emit every stride-th N')
    scan_parser.add_argument('--reference-horizon', type=int, default=10_000,
                             help='Largest N for the reference comparison (chebyshev)')
    commands['scan'] = scan_parser

    # Solve command
    solve_parser = subparsers.add_parser('solve', help='Solve eigenpairs of an even polynomial potential')
    solve_parser.add_argument('--potential', required=True, help="Even coefficients, e.g. '0,0,1' for x^4")
    solve_parser.add_argument('--n-max', type=int, required=True)
    solve_parser.add_argument('--cache', help='Eigenpair cache path (default $SIGNCORR_CACHE_DIR)')
    _solver_options(solve_parser)
    commands['solve'] = solve_parser

    for sub in commands.values():
        _common(sub)
    return parser, commands


def _apply_config_file(parser: argparse.ArgumentParser, path: str) -> None:
    """File values become parser defaults, so explicit flags still win."""
    values = read_config_file(path)
    actions = {}
    for action in parser._actions:
        for option in action.option_strings:
            actions[option.lstrip('-').replace('-', '_')] = action
    defaults = {}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ('config', 'help'):
            raise ConfigError(f"{path}: unknown setting {key!r}")
        defaults[action.dest] = value
        action.required = False
    parser.set_defaults(**defaults)


def parse(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser, commands = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_help(sys.stderr)
        raise UsageError("a command is required")

    command = argv[0]
    if command in commands and '--config' in argv:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument('--config')
        known, _ = pre.parse_known_args(argv[1:])
        _apply_config_file(commands[command], known.config)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse(argv)
        settings = CliConfig(
            command=args.command,
            output_format=args.output_format,
            output_dir=Path(args.output_dir) if args.output_dir else output_dir(),
            log_level=(args.log_level or log_level()).upper(),
            threads=args.threads,
            stem=args.stem,
        )
    except (InvalidInputError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=getattr(logging, settings.log_level, logging.INFO), stream=sys.stderr)
    manager = LabManager(settings)
    try:
        return getattr(manager, settings.command)(args)
    except (NonConvergenceError, NodeCountMismatch) as e:
        print(f"error: {e} (index {e.index}, eigenvalue {e.eigenvalue})", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InvalidInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
