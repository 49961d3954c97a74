"""
Secrecy Rate Engine v1.0 — WT-HI (wiretap channel with a helping interferer)

Usage:
  python main.py rate --a 0.5 --p1 2 --p2 0.6666667
  python main.py power-control --a 2 --p1max 2 --p2max 4
  python main.py asymptotic --a 0.25
  python main.py sweep --var a --from 0 --to 4 --steps 401 --p1max 2 --p2max 2 --out gain.csv
  python main.py dmc-rate --channel xor.json --grid 16
  python main.py dmc-classify --channel degraded.json --samples 200
  python main.py simulate --channel indep_eve.json --n 4 --r1s 0.5 --seeds 1,2,3

Every subcommand accepts --format json|text, --threads N, --verbose, --quiet.
Results go to stdout, logs to stderr.
Exit codes: 0 success, 1 I/O error, 2 usage or validation error.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np

# Load .env if exists (local dev)
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

import settings as cfg
from binning_sim import BudgetExceededError, run_experiment
from dmc_whi import (
    ProductInput, RateTriple, classify_interference, classify_profiles,
    load_channel, sample_inputs, theorem1_rate,
)
from gwt_hi import (
    GaussianWthi, PowerAllocation, asymptotic_rate, classify_regime, power_control,
    refine_peak, secrecy_rate, sweep, sweep_frame, wiretap_asymptotic_rate, wiretap_baseline,
)

logger = logging.getLogger("main")


# ── Logging ───────────────────────────────────────────────

def setup_logging(verbose: bool = False, quiet: bool = False):
    level = logging.INFO
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
        force=True,
    )


# ── Helpers ───────────────────────────────────────────────

def resolve_threads(flag: Optional[int]) -> int:
    """--threads, then WTHI_THREADS, then machine parallelism."""
    if flag is not None:
        threads = flag
    elif os.environ.get(cfg.THREADS_ENV_VAR):
        raw = os.environ[cfg.THREADS_ENV_VAR]
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{cfg.THREADS_ENV_VAR}={raw!r} is not an integer") from None
    else:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def parse_float_list(text: str, name: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{name} must be a comma-separated list of numbers, got {text!r}") from None


def parse_int_list(text: str, name: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{name} must be a comma-separated list of integers, got {text!r}") from None


def _text_lines(record, prefix: str = "") -> List[str]:
    lines = []
    if isinstance(record, dict):
        width = max((len(str(k)) for k in record), default=0)
        for key, value in record.items():
            if isinstance(value, (dict, list)) and value and isinstance(
                    value if isinstance(value, dict) else value[0], dict):
                lines.append(f"{prefix}{key}:")
                lines.extend(_text_lines(value, prefix + "  "))
            else:
                lines.append(f"{prefix}{str(key):<{width}}  {_fmt(value)}")
    elif isinstance(record, list):
        for i, item in enumerate(record):
            lines.append(f"{prefix}[{i}]")
            lines.extend(_text_lines(item, prefix + "  "))
    return lines


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def emit(record, fmt: str):
    """Write one JSON document or aligned text to stdout."""
    if fmt == "json":
        print(json.dumps(record, indent=2))
    else:
        print("\n".join(_text_lines(record)))


# ── Subcommands ───────────────────────────────────────────

def cmd_rate(args, threads: int) -> dict:
    alloc = PowerAllocation(p1=args.p1, p2=args.p2)
    return {
        "a": args.a,
        "p1": args.p1,
        "p2": args.p2,
        "regime": classify_regime(args.a, args.p2).value,
        "rate_bits": secrecy_rate(args.a, alloc),
        "baseline_bits": wiretap_baseline(args.a, args.p1),
    }


def cmd_power_control(args, threads: int) -> dict:
    ch = GaussianWthi(a=args.a, p1_max=args.p1max, p2_max=args.p2max)
    alloc, rate = power_control(ch)
    return {
        "a": ch.a,
        "p1_max": ch.p1_max,
        "p2_max": ch.p2_max,
        "p1": alloc.p1,
        "p2": alloc.p2,
        "regime": classify_regime(ch.a, alloc.p2).value,
        "rate_bits": rate,
        "baseline_bits": wiretap_baseline(ch.a, ch.p1_max),
    }


def cmd_asymptotic(args, threads: int) -> dict:
    return {
        "a": args.a,
        "rate_bits": asymptotic_rate(args.a),
        "wiretap_bits": wiretap_asymptotic_rate(args.a),
    }


def cmd_sweep(args, threads: int):
    if args.steps < 2:
        raise ValueError(f"--steps must be >= 2, got {args.steps}")
    if args.from_ > args.to:
        raise ValueError(f"--from ({args.from_}) must not exceed --to ({args.to})")

    fixed = {"a": args.a, "p1": args.p1max, "p2": args.p2max}
    flags = {"a": "--a", "p1": "--p1max", "p2": "--p2max"}
    for var, value in fixed.items():
        if var != args.var and value is None:
            raise ValueError(f"sweep over {args.var} needs {flags[var]}")

    ch = GaussianWthi(
        a=fixed["a"] if args.var != "a" else args.from_,
        p1_max=fixed["p1"] if args.var != "p1" else args.from_,
        p2_max=fixed["p2"] if args.var != "p2" else args.from_,
    )
    with_pc = args.power_control == "on"
    grid = np.linspace(args.from_, args.to, args.steps)

    rows = sweep(ch, args.var, grid, with_power_control=with_pc, threads=threads)
    peak_value, peak_rate = refine_peak(ch, args.var, rows, with_power_control=with_pc)
    frame = sweep_frame(rows)

    if args.out:
        frame.to_csv(args.out, index=False)
        logger.info(f"Sweep table saved to {args.out}")
        return {
            "out": args.out,
            "rows": len(rows),
            "peak_value": peak_value,
            "peak_rate_bits": peak_rate,
        }

    if args.format == "json":
        return {
            "rows": frame.to_dict(orient="records"),
            "peak_value": peak_value,
            "peak_rate_bits": peak_rate,
        }
    return frame.to_csv(index=False).rstrip("\n")


def cmd_dmc_rate(args, threads: int) -> dict:
    ch = load_channel(args.channel)
    result = theorem1_rate(ch, grid_resolution=args.grid, threads=threads)
    report = classify_profiles(result.evaluated)
    return result.as_record(report.interference_class)


def cmd_dmc_classify(args, threads: int) -> dict:
    ch = load_channel(args.channel)
    inputs = sample_inputs(ch, args.samples, seed=args.seed)
    report = classify_interference(ch, inputs)
    logger.info(f"Interference class {report.interference_class.value} over {report.samples} inputs "
                f"(certified on samples only)")
    return report.as_record()


def cmd_simulate(args, threads: int) -> dict:
    ch = load_channel(args.channel)
    uniform = ProductInput.uniform(ch)
    px1 = tuple(parse_float_list(args.px1, "--px1")) if args.px1 else uniform.px1
    px2 = tuple(parse_float_list(args.px2, "--px2")) if args.px2 else uniform.px2
    inputs = ProductInput(px1, px2)

    seeds = parse_int_list(args.seeds, "--seeds")
    rates = RateTriple(r1s=args.r1s, r1d=args.r1d, r2=args.r2)

    experiment = run_experiment(ch, inputs, args.n, rates, seeds,
                                mode=args.mode, trials=args.trials, threads=threads)
    return experiment.as_record()


COMMANDS = {
    "rate": cmd_rate,
    "power-control": cmd_power_control,
    "asymptotic": cmd_asymptotic,
    "sweep": cmd_sweep,
    "dmc-rate": cmd_dmc_rate,
    "dmc-classify": cmd_dmc_classify,
    "simulate": cmd_simulate,
}


# ── Parser ────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=cfg.OUTPUT_FORMATS, default="json",
                        help="Output format on stdout (default: json)")
    common.add_argument("--threads", type=int, default=None,
                        help=f"Worker threads (default: ${cfg.THREADS_ENV_VAR}, then CPU count)")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--verbose", action="store_true", help="Debug logging")
    noise.add_argument("--quiet", action="store_true", help="Warnings and errors only")

    parser = argparse.ArgumentParser(
        prog="main.py",
        description=f"Secrecy Rate Engine v{cfg.VERSION}: wiretap channel with a helping interferer",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", parents=[common], help="Gaussian secrecy rate at fixed powers")
    p.add_argument("--a", type=float, required=True, help="Cross-link gain (linear)")
    p.add_argument("--p1", type=float, required=True, help="Transmitter power")
    p.add_argument("--p2", type=float, required=True, help="Helper power")

    p = sub.add_parser("power-control", parents=[common], help="Rate-maximizing powers within budgets")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--p1max", type=float, required=True)
    p.add_argument("--p2max", type=float, required=True)

    p = sub.add_parser("asymptotic", parents=[common], help="Power-unconstrained secrecy rate")
    p.add_argument("--a", type=float, required=True)

    p = sub.add_parser("sweep", parents=[common], help="Rate table over a, P̄1 or P̄2")
    p.add_argument("--var", choices=["a", "p1", "p2"], required=True)
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--p1max", type=float, default=None)
    p.add_argument("--p2max", type=float, default=None)
    p.add_argument("--power-control", choices=["on", "off"], default="on")
    p.add_argument("--out", default=None, help="CSV file (default: print to stdout)")

    p = sub.add_parser("dmc-rate", parents=[common], help="Achievable secrecy rate of a discrete channel")
    p.add_argument("--channel", required=True, help="Channel JSON file")
    p.add_argument("--grid", type=int, default=cfg.DEFAULT_GRID_RESOLUTION,
                   help="Simplex lattice resolution per input")

    p = sub.add_parser("dmc-classify", parents=[common], help="Interference class over sampled inputs")
    p.add_argument("--channel", required=True)
    p.add_argument("--samples", type=int, default=cfg.DEFAULT_CLASSIFY_SAMPLES)
    p.add_argument("--seed", type=int, default=cfg.DEFAULT_CLASSIFY_SEED)

    p = sub.add_parser("simulate", parents=[common], help="Finite-n binning simulation")
    p.add_argument("--channel", required=True)
    p.add_argument("--n", type=int, required=True, help="Block length")
    p.add_argument("--r1s", type=float, required=True)
    p.add_argument("--r1d", type=float, default=0.0)
    p.add_argument("--r2", type=float, default=0.0)
    p.add_argument("--seeds", default="0", help="Comma-separated seeds, e.g. 1,2,3")
    p.add_argument("--trials", type=int, default=cfg.SIM_DEFAULT_TRIALS)
    p.add_argument("--mode", choices=cfg.DECODE_MODES, default=cfg.DEFAULT_DECODE_MODE)
    p.add_argument("--px1", default=None, help="Comma-separated p(x1) (default: uniform)")
    p.add_argument("--px2", default=None, help="Comma-separated p(x2) (default: uniform)")

    return parser


# ── Entry point ───────────────────────────────────────────

def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else cfg.EXIT_USAGE

    setup_logging(verbose=args.verbose, quiet=args.quiet)

    try:
        threads = resolve_threads(args.threads)
        logger.debug(f"{args.command}: {threads} worker threads")
        record = COMMANDS[args.command](args, threads)
    except (ValueError, BudgetExceededError) as e:
        logger.error(f"{args.command}: {e}")
        return cfg.EXIT_USAGE
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return cfg.EXIT_IO

    if isinstance(record, str):
        print(record)
    else:
        emit(record, args.format)
    return cfg.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
