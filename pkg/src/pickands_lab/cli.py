"""
Command-line front end for Pickands Lab.

Every stochastic subcommand requires --seed. Reports go to stdout as CSV
or JSON, diagnostics to stderr, and every successful run appends one
record to the ledger. Exit codes: 0 success, 2 invalid configuration,
3 numerical failure, 4 reliability flag under --strict.
"""

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .config import config
from .doublesum import (
    bivariate_normal_rectangle,
    block_exceedance_ratio,
    bonferroni_oracle,
    borell_check,
    default_step,
    exceedance_bracketing,
    joint_bound_check,
    mc_sup_exceedance_levels,
    slepian_check,
)
from .exceptions import ConfigError, PickandsLabError, ReliabilityError
from .formatter import OUTPUT_FORMATS, ReportFormatter
from .gauss import psi_sandwich, std_normal_cdf, std_normal_tail
from .ledger import RunRecord, append_run_record, load_run_records, replay
from .pickands import (
    SQRT_PI,
    Estimate,
    estimate_H_interval,
    estimate_H_rect,
    estimate_pickands_constant,
    h_exact_alpha2,
    h_quadrature_alpha1,
    pickands_lower_bound,
)
from .process import ExpAlpha, fbm_sample, make_grid, pickands_process_sample, stationary_sample
from .rng import RngStream
from .scheduler import ChunkScheduler
from .utils import setup_logging

# Pickands constants known in closed form.
KNOWN_CONSTANTS = {1.0: 1.0, 2.0: 1.0 / SQRT_PI}

# Flags that fail a --strict run.
RELIABILITY_FLAGS = ("unreliable", "heavy_tail", "replay_mismatch")

# Psi sandwich levels reported by check-inequalities.
SANDWICH_LEVELS = (0.5, 1.0, 2.0, 4.0, 8.0)

# Point spacing of the Slepian and rectangle comparisons.
SLEPIAN_SPACING = 0.25
SLEPIAN_POINTS = 5

# Levels of the grid-maximum check Psi(w) <= P(max > w) <= count * Psi(w).
GRID_UNION_LEVELS = (0.5, 1.0, 2.0)


@dataclass
class RunConfig:
    """Validated settings of one invocation."""

    command: str
    argv: List[str]
    seed: Optional[int]
    output_format: str
    ledger_path: str
    workers: int
    chunk_size: int
    strict: bool
    log_level: str
    params: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_namespace(cls, args: argparse.Namespace, argv: Sequence[str]) -> "RunConfig":
        common = {"command", "seed", "format", "ledger", "workers", "chunk_size", "strict", "log_level"}
        return cls(
            command=args.command,
            argv=list(argv),
            seed=getattr(args, "seed", None),
            output_format=args.format,
            ledger_path=args.ledger or config.ledger_path(),
            workers=args.workers,
            chunk_size=args.chunk_size,
            strict=args.strict,
            log_level=args.log_level,
            params={k: v for k, v in vars(args).items() if k not in common},
        )


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return value


def positive_float(text: str) -> float:
    value = _number(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def non_negative_float(text: str) -> float:
    value = _number(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text!r}")
    return value


def alpha_value(text: str) -> float:
    value = _number(text)
    if not 0 < value <= 2:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 2], got {text!r}")
    return value


def positive_int(text: str) -> int:
    """Positive integer; accepts 2e5 style literals when integral."""
    value = _number(text)
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return int(value)


def seed_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text!r}")
    return value


def increasing_floats(text: str) -> List[float]:
    """Comma-separated, strictly increasing positive horizons."""
    values = [positive_float(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("T list must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(f"T list must be strictly increasing, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per laboratory operation."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=positive_int, default=config.WORKERS, help="Worker threads")
    common.add_argument("--chunk-size", type=positive_int, default=config.CHUNK_SIZE, help="Replications per chunk")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default="csv", help="Report format")
    common.add_argument("--ledger", default=None, help="Ledger path (default: $PICKANDS_LEDGER)")
    common.add_argument("--strict", action="store_true", help="Exit 4 when a report carries a reliability flag")
    common.add_argument(
        "--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"), default=config.LOG_LEVEL
    )

    seeded = argparse.ArgumentParser(add_help=False, parents=[common])
    seeded.add_argument("--seed", type=seed_value, required=True, help="64-bit master seed")
    seeded.add_argument("--n", type=positive_int, default=100_000, help="Monte Carlo replications")

    parser = argparse.ArgumentParser(prog="pickands-lab", description="Pickands theorem numerical laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[seeded], help="Sample one path as CSV (t, value)")
    p.add_argument("--model", choices=("exp", "fbm", "pickands"), default="exp")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--p", type=non_negative_float, default=1.0, help="Path horizon")
    p.add_argument("--step", type=positive_float, required=True)

    p = sub.add_parser("estimate-h", parents=[seeded], help="Monte Carlo H(T)")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--T", type=non_negative_float, required=True)
    p.add_argument("--step", type=positive_float, default=0.01)

    p = sub.add_parser("estimate-h-rect", parents=[seeded], help="Monte Carlo H([0,T1]x[0,T2])")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--T1", type=non_negative_float, required=True)
    p.add_argument("--T2", type=non_negative_float, required=True)
    p.add_argument("--step", type=positive_float, default=0.01)
    p.add_argument("--step2", type=positive_float, default=None, help="Step along t2 (default: --step)")

    p = sub.add_parser("pickands-constant", parents=[seeded], help="H(T)/T convergence table")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--T-list", dest="T_list", type=increasing_floats, required=True, help="e.g. 1,2,5,10")
    p.add_argument("--step", type=positive_float, default=0.01)

    p = sub.add_parser("lower-bound", parents=[common], help="Analytic lower bound on H_alpha")
    p.add_argument("--alpha", type=alpha_value, required=True)

    p = sub.add_parser("verify-asymptotic", parents=[seeded], help="Exceedance bracket against the Pickands value")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--p", type=positive_float, default=1.0)
    p.add_argument("--u", type=positive_float, required=True)
    p.add_argument("--T", type=positive_float, default=1.0)
    p.add_argument("--step", type=positive_float, default=None, help="Default u^(-2/alpha)/20")
    p.add_argument("--H", type=positive_float, default=None, help="Pickands constant (known for alpha 1, 2)")

    p = sub.add_parser("joint-bound", parents=[seeded], help="Joint block exceedance against C(alpha, t0, T)")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--T", type=positive_float, default=1.0)
    p.add_argument("--t0", type=positive_float, required=True)
    p.add_argument("--u", type=positive_float, required=True)
    p.add_argument("--step", type=positive_float, default=None, help="Default u^(-2/alpha)/20")
    p.add_argument("--H-square", dest="H_square", type=positive_float, default=None)

    p = sub.add_parser("check-inequalities", parents=[seeded], help="Psi sandwich, Slepian and Borell checks")
    p.add_argument("--alpha", type=alpha_value, required=True)
    p.add_argument("--p", type=positive_float, default=1.0)
    p.add_argument("--u", type=_number, default=1.0)
    p.add_argument("--step", type=positive_float, default=0.01)

    p = sub.add_parser("bonferroni-oracle", parents=[seeded], help="Bonferroni bound on random finite spaces")
    p.add_argument("--trials", type=positive_int, default=1000)

    p = sub.add_parser("replay", parents=[common], help="Re-run a ledger record and compare its outputs")
    p.add_argument("--index", type=int, default=-1, help="Record position in the ledger (default: last)")

    return parser


def _cross_check(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """Relations between flags, rejected before any module code runs."""
    command = args.command
    if command == "estimate-h" and 0 < args.T < args.step:
        parser.error(f"--step {args.step} exceeds --T {args.T}")
    if command == "estimate-h-rect":
        step2 = args.step2 or args.step
        if 0 < args.T1 < args.step or 0 < args.T2 < step2:
            parser.error("steps must not exceed the rectangle sides")
    if command == "joint-bound" and args.t0 <= args.T:
        parser.error(f"--t0 {args.t0} must exceed --T {args.T}")
    if command == "verify-asymptotic" and args.H is None and args.alpha not in KNOWN_CONSTANTS:
        parser.error(f"--H is required for alpha={args.alpha}")


def handle_simulate(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    grid = make_grid(args.p, args.step)
    if args.model == "fbm":
        return fbm_sample(args.alpha, grid, rng)
    if args.model == "pickands":
        return pickands_process_sample(args.alpha, grid, rng)
    return stationary_sample(ExpAlpha(args.alpha), grid, rng)


def _oracle_h(alpha: float, T: float) -> Optional[float]:
    if alpha == 2.0:
        return h_exact_alpha2(T)
    if alpha == 1.0 and T > 0:
        return h_quadrature_alpha1(T)
    return None


def _estimate_report(estimate: Estimate, **context) -> Dict:
    report = dict(context)
    report.update(estimate.to_dict())
    return report


def handle_estimate_h(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    estimate = estimate_H_interval(args.alpha, args.T, args.step, args.n, rng, scheduler)
    return _estimate_report(estimate, alpha=args.alpha, T=args.T, seed=args.seed, oracle=_oracle_h(args.alpha, args.T))


def handle_estimate_h_rect(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    steps = (args.step, args.step2 or args.step)
    estimate = estimate_H_rect(args.alpha, args.T1, args.T2, steps, args.n, rng, scheduler)
    first, second = _oracle_h(args.alpha, args.T1), _oracle_h(args.alpha, args.T2)
    oracle = first * second if first is not None and second is not None else None
    return _estimate_report(estimate, alpha=args.alpha, T1=args.T1, T2=args.T2, seed=args.seed, oracle=oracle)


def handle_pickands_constant(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    return estimate_pickands_constant(args.alpha, args.T_list, args.step, args.n, rng, scheduler)


def handle_lower_bound(args: argparse.Namespace, rng: Optional[RngStream], scheduler: ChunkScheduler):
    return {"alpha": args.alpha, "lower_bound": pickands_lower_bound(args.alpha)}


def handle_verify_asymptotic(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    """
    Double-sum bracket plus the local check P(sup over one block > u) / Psi(u) vs H(T).

    H(T) comes from the alpha = 1, 2 oracles, otherwise from a Monte Carlo
    estimate on its own sub-stream.
    """
    model = ExpAlpha(args.alpha)
    H = args.H if args.H is not None else KNOWN_CONSTANTS[args.alpha]
    step = args.step or default_step(args.u, args.alpha)
    H_T, H_T_stderr = _oracle_h(args.alpha, args.T), 0.0
    if H_T is None:
        estimate = estimate_H_interval(args.alpha, args.T, min(0.01, args.T), args.n, rng.child(2), scheduler)
        H_T, H_T_stderr = estimate.mean, estimate.stderr

    bounds = exceedance_bracketing(
        model, args.p, args.u, args.alpha, args.T, step, args.n, H, rng.child(0), scheduler, H_T=H_T
    )
    block = block_exceedance_ratio(model, args.u, args.T, step, args.n, rng.child(1), scheduler)
    report = bounds.to_dict()
    report["block_check"] = {
        "H_T": H_T,
        "H_T_stderr": H_T_stderr,
        "ratio": block.mean,
        "stderr": block.stderr,
        "relative_gap": block.mean / H_T - 1.0,
    }
    report["flags"] = list(dict.fromkeys(list(bounds.flags) + list(block.flags)))
    return report


def handle_joint_bound(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    H_square = args.H_square
    if H_square is None:
        # H of a product rectangle factorizes: H([0,1]^2) = H(1)^2.
        H1 = _oracle_h(args.alpha, 1.0)
        if H1 is None:
            H1 = estimate_H_interval(args.alpha, 1.0, 0.01, args.n, rng.child(1), scheduler).mean
        H_square = H1 * H1
    return joint_bound_check(
        ExpAlpha(args.alpha), args.T, args.t0, args.u, H_square, args.n, rng.child(0), args.step, scheduler
    )


def handle_check_inequalities(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    model = ExpAlpha(args.alpha)
    checks = []
    for level in SANDWICH_LEVELS:
        lower, upper = psi_sandwich(level)
        value = std_normal_tail(level)
        checks.append(
            {"check": "psi_sandwich", "level": level, "value": value, "lower": lower, "upper": upper,
             "holds": lower <= value <= upper}
        )

    rho = float(model.covariance(np.array([SLEPIAN_SPACING]))[0])
    rectangle = bivariate_normal_rectangle(rho, args.u)
    phi_u = std_normal_cdf(args.u)
    checks.append(
        {"check": "rectangle", "level": args.u, "value": rectangle, "lower": phi_u * phi_u, "upper": phi_u,
         "holds": phi_u * phi_u <= rectangle + 1e-10 and rectangle <= phi_u + 1e-10}
    )

    times = SLEPIAN_SPACING * np.arange(SLEPIAN_POINTS)
    cov_y = model.covariance(np.abs(times[:, None] - times[None, :]))
    slepian = slepian_check(cov_y * cov_y, cov_y, np.zeros(SLEPIAN_POINTS), args.u, args.n, rng.child(0), scheduler)
    checks.append(
        {"check": "slepian", "level": args.u, "value": slepian.pX.mean, "lower": None, "upper": slepian.pY.mean,
         "holds": slepian.consistent}
    )

    borell = borell_check(model, args.p, args.step, args.n, rng.child(1), scheduler=scheduler)
    for level in borell.levels:
        checks.append(
            {"check": "borell", "level": level.w, "value": level.tail.mean, "lower": None, "upper": level.bound,
             "holds": level.dominated}
        )

    count = make_grid(args.p, args.step).count
    tails = mc_sup_exceedance_levels(model, args.p, GRID_UNION_LEVELS, args.step, args.n, rng.child(2), scheduler)
    flags = set(slepian.pX.flags) | set(slepian.pY.flags)
    for level, tail in zip(GRID_UNION_LEVELS, tails):
        psi = std_normal_tail(level)
        upper = min(1.0, count * psi)
        checks.append(
            {"check": "grid_union", "level": level, "value": tail.mean, "lower": psi, "upper": upper,
             "holds": psi <= tail.mean + 4.0 * tail.stderr and tail.mean - 4.0 * tail.stderr <= upper}
        )
        flags |= set(tail.flags)
    return {
        "alpha": args.alpha,
        "u": args.u,
        "m_hat": borell.m_hat,
        "holds": all(c["holds"] for c in checks),
        "checks": checks,
        "flags": sorted(flags),
    }


def handle_bonferroni_oracle(args: argparse.Namespace, rng: RngStream, scheduler: ChunkScheduler):
    return bonferroni_oracle(args.trials, rng)


def handle_replay(args: argparse.Namespace, rng: Optional[RngStream], scheduler: ChunkScheduler):
    path = args.ledger or config.ledger_path()
    records = load_run_records(path)
    if not records:
        raise ConfigError(f"ledger {path} has no runs to replay")
    if not -len(records) <= args.index < len(records):
        raise ConfigError(f"--index {args.index} is outside the {len(records)} records of {path}")
    record = records[args.index]
    if record.command == "replay":
        raise ConfigError("a replay run cannot itself be replayed")

    matches = replay(record) == record.outputs
    if not matches:
        logger.warning(f"replay of {record.command} recorded at {record.timestamp} differs from its outputs")
    return {
        "index": args.index % len(records),
        "command": record.command,
        "seed": record.seed,
        "timestamp": record.timestamp,
        "version": record.version,
        "matches": matches,
        "flags": [] if matches else ["replay_mismatch"],
    }


COMMANDS: Dict[str, Callable] = {
    "simulate": handle_simulate,
    "estimate-h": handle_estimate_h,
    "estimate-h-rect": handle_estimate_h_rect,
    "pickands-constant": handle_pickands_constant,
    "lower-bound": handle_lower_bound,
    "verify-asymptotic": handle_verify_asymptotic,
    "joint-bound": handle_joint_bound,
    "check-inequalities": handle_check_inequalities,
    "bonferroni-oracle": handle_bonferroni_oracle,
    "replay": handle_replay,
}


def parse_run_config(argv: Sequence[str]) -> Tuple[RunConfig, argparse.Namespace]:
    parser = build_parser()
    args = parser.parse_args(list(argv))
    _cross_check(parser, args)
    return RunConfig.from_namespace(args, argv), args


def execute(argv: Sequence[str], configure_logging: bool = False) -> Tuple[RunConfig, Dict, Any]:
    """
    Parse argv and run the mapped operation.

    Args:
        argv: Arguments without the program name
        configure_logging: Install the stderr sink at --log-level first

    Returns:
        Tuple of (run config, versioned payload, report object)
    """
    run_config, args = parse_run_config(argv)
    config.validate()
    if configure_logging:
        setup_logging(run_config.log_level, config.LOG_FILE)
    scheduler = ChunkScheduler(run_config.workers, run_config.chunk_size)
    rng = RngStream(run_config.seed) if run_config.seed is not None else None
    logger.info(f"Running {run_config.command} with seed={run_config.seed}")
    report = COMMANDS[run_config.command](args, rng, scheduler)
    payload = ReportFormatter("json").payload(run_config.command, report)
    return run_config, payload, report


def reliability_flags(payload: Dict) -> List[str]:
    flags = payload["report"].get("flags", []) if isinstance(payload["report"], dict) else []
    return [flag for flag in flags if flag in RELIABILITY_FLAGS]


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Execute one CLI invocation.

    Args:
        argv: Arguments without the program name (default sys.argv[1:])

    Returns:
        int: Process exit code
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.perf_counter()
    try:
        run_config, payload, report = execute(argv, configure_logging=True)
        sys.stdout.write(ReportFormatter(run_config.output_format).format(run_config.command, report))
        sys.stdout.flush()

        record = RunRecord(
            command=run_config.command,
            argv=argv,
            seed=run_config.seed,
            outputs=payload,
            wall_time=time.perf_counter() - started,
        )
        append_run_record(record, run_config.ledger_path)

        flags = reliability_flags(payload)
        if run_config.strict and flags:
            raise ReliabilityError(f"report carries reliability flags: {', '.join(flags)}")
        return 0

    except SystemExit as e:
        return int(e.code or 0)
    except PickandsLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        return 1
