"""
Command-line entry point.

Sub-commands:
- optimize: best segmentation and allocation for every (K, alpha) point
- sweep: CSV of achieved gain against the bound over a (K, alpha) grid
- simulate: Monte Carlo delay and sum-DoF of the optimized solutions
- bound: CSV of the uniform delay, the delay lower bound and the gain bound
- verify: desk-scale optimality checks, exit code 2 on failure
- place: transmitter and receiver placement manifest of one point

Usage:

$ popcache sweep --scenario 1 --out gains.csv
$ popcache optimize --config input.yaml --k 2000 --alpha 0.8
"""

import json
import logging
import math
import sys
from argparse import ArgumentParser
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import yaml

from popcache.constants import SCENARIOS
from popcache.errors import InvalidParameterError, PopCacheError
from popcache.files import (
    BOUND_COLUMNS,
    SIMULATION_COLUMNS,
    SWEEP_COLUMNS,
    TRIAL_COLUMNS,
    Exporter,
    RunConfig,
    parse_grid,
)
from popcache.models import build_popularity, delay_bound, uniform_delay
from popcache.optimization import optimize_all
from popcache.placement import place_receivers, place_transmitters
from popcache.simulation import run_simulation
from popcache.verification import run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFICATION = 2

# desk-scale suite used by verify when no configuration is given
VERIFY_DEFAULTS = {
    "N": 10,
    "K": [40, 80],
    "K_T": 4,
    "gamma": 0.25,
    "gamma_T": 0.5,
    "F": 10,
    "alpha": [0.0, 0.6, 1.2, 2.0],
    "q_max": 3,
}


class _Parser(ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    """
    Function to build the argument parser

    Returns
    - parser: ArgumentParser - parser with one sub-command per operation
    """
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML or JSON configuration file")
    common.add_argument("--scenario", type=int, choices=sorted(SCENARIOS), help="use a reference scenario")
    common.add_argument("--alpha", type=float, help="single Zipf exponent")
    common.add_argument("--alpha-grid", help="Zipf exponents, 'a,b,c' or 'start:stop:step'")
    common.add_argument("--k", type=int, help="single number of users")
    common.add_argument("--k-grid", help="numbers of users, 'a,b,c' or 'start:stop:step'")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--qmax", type=int, help="largest number of sub-libraries")
    common.add_argument("--strict-b1", action="store_true", default=None, help="charge the whole broadcast sub-library")
    common.add_argument("--workers", type=int, default=1, help="worker processes for grid commands")
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument(
        "--log-level", default="WARNING", type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="logging level",
    )

    parser = _Parser(
        prog="popcache",
        description="Popularity-aware segmentation of transmitter caches in multi-transmitter coded caching",
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    commands.add_parser("optimize", parents=[common], help="optimize every (K, alpha) point")
    commands.add_parser("sweep", parents=[common], help="gain against the bound over a grid")
    simulate = commands.add_parser("simulate", parents=[common], help="Monte Carlo delay and DoF")
    simulate.add_argument("--trials-out", help="per-trial CSV output")
    commands.add_parser("bound", parents=[common], help="delay lower bound and gain bound")
    verify = commands.add_parser("verify", parents=[common], help="desk-scale optimality checks")
    verify.add_argument("--perturb", type=float, default=0.0, help="shift the first coded redundancy before checking")
    commands.add_parser("place", parents=[common], help="placement manifest of one point")
    return parser


def load_config(args) -> RunConfig:
    """
    Function to build the run configuration from a file, a scenario or the
    verify defaults, with the command-line overrides applied
    """
    if args.config:
        config = RunConfig.read(args.config)
    elif args.scenario:
        config = RunConfig.from_mapping(dict(SCENARIOS[args.scenario]), f"scenario {args.scenario}")
    elif args.command == "verify":
        config = RunConfig.from_mapping(dict(VERIFY_DEFAULTS), "verify defaults")
    else:
        raise InvalidParameterError("a --config file or a --scenario is required")

    alpha = [args.alpha] if args.alpha is not None else parse_grid(args.alpha_grid)
    users = [args.k] if args.k is not None else parse_grid(args.k_grid)
    if users is not None:
        users = [int(K) for K in users]
    return config.with_overrides(
        alpha=alpha,
        K=users,
        trials=args.trials,
        seed=args.seed,
        q_max=args.qmax,
        strict_b1=args.strict_b1,
    )


def solve_point(values: dict, K: int, alpha: float):
    """
    Function to optimize one grid point

    Returns
    - cfg, model, solution
    """
    config = RunConfig.from_mapping(values)
    cfg = config.system_config(K)
    model = build_popularity(cfg.N, alpha)
    return cfg, model, optimize_all(cfg, model, config.q_max)


def sweep_point(values: dict, K: int, alpha: float) -> dict:
    """
    Function to compute one sweep row; failures are reported in the row
    """
    row = {"K": K, "alpha": alpha}
    try:
        cfg, model, solution = solve_point(values, K, alpha)
        row.update(
            gain_achieved=solution.gain,
            gain_bound=delay_bound(cfg, model).gmax,
            Q=solution.Q,
            expected_delay=solution.expected_delay,
            uniform_delay=solution.uniform_delay,
        )
    except PopCacheError as error:
        row["error"] = f"{type(error).__name__}: {error}"
    return row


def simulate_point(values: dict, K: int, alpha: float) -> tuple:
    """
    Function to simulate one grid point

    Returns
    - row: dict - summary row
    - trials: List[dict] - per-trial rows
    """
    config = RunConfig.from_mapping(values)
    row = {"K": K, "alpha": alpha, "trials": config.trials, "seed": config.seed, "strict_b1": config.strict_b1}
    try:
        cfg, model, solution = solve_point(values, K, alpha)
        report = run_simulation(cfg, model, solution, config.trials, config.seed, config.strict_b1)
        row.update(report.to_dict())
        row["analytic_dof"] = cfg.K*(1 - cfg.gamma)/solution.expected_delay
        return row, Exporter.trial_rows(K, alpha, report)
    except PopCacheError as error:
        row["error"] = f"{type(error).__name__}: {error}"
        return row, []


def _map_grid(function, config: RunConfig, workers: int) -> list:
    values = config.to_dict()
    points = config.grid()
    arguments = ([values]*len(points), [K for K, _ in points], [alpha for _, alpha in points])
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(function, *arguments))
    return [function(*point) for point in zip(*arguments)]


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        print(text, end="" if text.endswith("\n") else "\n")
    else:
        logger.info("results written to %s", out)


def _optimize_row(record: dict) -> str:
    return (
        f"K={record['K']} alpha={record['alpha']} Q*={record['Q']} n*={record['n_star']} "
        f"L={[round(L, 4) for L in record['L']]} gain={record['gain']:.4f} "
        f"budget n_1+sum L_q w_q {record['budget_used']:.4f} = K_T*gamma_T*N {record['budget_target']:.4f}"
    )


def cmd_optimize(config: RunConfig, args) -> int:
    records = []
    for K, alpha in config.grid():
        cfg, model, solution = solve_point(config.to_dict(), K, alpha)
        bound = delay_bound(cfg, model)
        record = {"K": K, "alpha": alpha, "config": cfg.to_dict(), "gmax": bound.gmax}
        record.update(solution.to_dict())
        record["budget_used"] = math.fsum(solution.allocation.Lvec*solution.segmentation.widths)
        record["budget_target"] = cfg.L*cfg.N
        records.append(record)
        # stdout carries the JSON when no output file is given
        print(_optimize_row(record), file=sys.stdout if args.out else sys.stderr)
    _emit(Exporter.export_json(records, args.out), args.out)
    return EXIT_OK


def cmd_sweep(config: RunConfig, args) -> int:
    rows = sorted(_map_grid(sweep_point, config, args.workers), key=lambda row: (row["K"], row["alpha"]))
    failed = [row for row in rows if row.get("error")]
    if failed:
        logger.warning("%d of %d sweep points failed", len(failed), len(rows))
    _emit(Exporter.export_csv(rows, SWEEP_COLUMNS, args.out), args.out)
    return EXIT_OK


def cmd_simulate(config: RunConfig, args) -> int:
    results = _map_grid(simulate_point, config, args.workers)
    results.sort(key=lambda result: (result[0]["K"], result[0]["alpha"]))
    rows = [row for row, _ in results]
    if args.trials_out:
        Exporter.export_csv([trial for _, trials in results for trial in trials], TRIAL_COLUMNS, args.trials_out)
    _emit(Exporter.export_csv(rows, SIMULATION_COLUMNS, args.out), args.out)
    return EXIT_OK


def cmd_bound(config: RunConfig, args) -> int:
    rows = []
    for K, alpha in config.grid():
        cfg = config.system_config(K)
        bound = delay_bound(cfg, build_popularity(cfg.N, alpha))
        rows.append({
            "K": K,
            "alpha": alpha,
            "uniform_delay": uniform_delay(cfg),
            "lower_bound_delay": bound.lower_bound_delay,
            "gmax": bound.gmax,
        })
    _emit(Exporter.export_csv(rows, BOUND_COLUMNS, args.out), args.out)
    return EXIT_OK


def cmd_verify(config: RunConfig, args) -> int:
    report = run_verification(config, args.perturb)
    _emit(Exporter.export_json(report.to_dict(), args.out), args.out)
    return EXIT_OK if report.passed else EXIT_VERIFICATION


def cmd_place(config: RunConfig, args) -> int:
    points = config.grid()
    if len(points) != 1:
        raise InvalidParameterError(f"place needs a single (K, alpha) point, got {len(points)}")
    K, alpha = points[0]
    cfg, model, solution = solve_point(config.to_dict(), K, alpha)
    manifest = Exporter.placement_manifest(
        place_transmitters(cfg, solution.segmentation, solution.allocation),
        place_receivers(cfg),
        {"K": K, "alpha": alpha, "config": cfg.to_dict(), "solution": solution.to_dict()},
    )
    _emit(Exporter.export_json(manifest, args.out), args.out)
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "bound": cmd_bound,
    "verify": cmd_verify,
    "place": cmd_place,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main execution routine

    Returns
    - code: int - 0 on success, 1 on usage or configuration errors, 2 when verification fails
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        config = load_config(args)
        return COMMANDS[args.command](config, args)
    except (PopCacheError, OSError, ValueError, yaml.YAMLError) as error:
        print(json.dumps({"error": type(error).__name__, "message": str(error)}))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
