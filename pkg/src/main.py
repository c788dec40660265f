"""
Command-line interface.

    run              one algorithm on one instance file
    bench            config-driven sweep, CSV or JSON table
    verify           guarantee report for an exact-mode run (exit 2 on failure)
    optimize-params  solve the switch-time / probability program
    gen              write a generated instance file

Exit codes: 0 success, 1 usage or configuration error, 2 failed verification.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from src.core.aided_mcg import aided_mcg, measured_continuous_greedy
from src.core.config import Settings, configure_logging
from src.core.errors import SubmodError
from src.core.extensions import MultilinearOracle, estimate_multilinear, sample_random_subset
from src.core.local_search import fractional_local_search
from src.core.pipeline import main_algorithm, optimize_parameters
from src.core.rng import KeyedStreams
from src.schemas.algorithm import EvaluationMode, LocalSearchConfig, MainParams, Schedule, fine_sample_count
from src.services.benchmark_service import load_benchmark_config, run_benchmark, summarize, write_csv, write_csv_rows, write_json
from src.services.instance_service import build_problem, generate_instance, read_instance, write_instance
from src.services.verification_service import brute_force_opt, verify_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION_FAILED = 2


class UsageError(SubmodError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _key_values(items: Optional[List[str]]) -> Dict[str, float]:
    values = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got '{item}'")
        try:
            values[key] = float(raw)
        except ValueError:
            raise UsageError(f"value of '{key}' must be a number, got '{raw}'")
    return values


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["exact", "sampled"], default=settings.mode)
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--t-s", dest="t_s", type=float, default=0.372)
    common.add_argument("--p", type=float, default=0.23)
    common.add_argument("--delta", type=float, default=settings.delta)
    common.add_argument("--samples", type=int, default=settings.samples)
    common.add_argument("--epsilon", type=float, default=1e-3)
    common.add_argument("--fine-schedule", "--paper-schedule", dest="fine_schedule", action="store_true",
                        help="use steps of n^-4 and, when sampling, ceil(48 n^6 ln 2n) samples")
    common.add_argument("--out", choices=["json", "csv"], default="json")
    common.add_argument("--output", help="write results here instead of stdout")
    common.add_argument("--log-level", default=settings.log_level)

    parser = _Parser(prog="submod", description="Constrained non-monotone submodular maximization")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = commands.add_parser("run", parents=[common], help="run one algorithm on one instance")
    run.add_argument("--instance", required=True)
    run.add_argument("--algorithm", choices=["mcg", "aided-mcg", "local-search", "main"], default="main")
    run.add_argument("--selection", choices=["randomized", "best"], default="randomized")
    run.add_argument("--z-rounds", dest="z_rounds", type=int, default=1)
    run.add_argument("--trajectory-csv", dest="trajectory_csv")

    bench = commands.add_parser("bench", parents=[common], help="run a benchmark config")
    bench.add_argument("--config", required=True)
    bench.add_argument("--workers", type=int, default=settings.workers)

    verify = commands.add_parser("verify", parents=[common], help="verify every guarantee on a small instance")
    verify.add_argument("--instance", required=True)
    verify.add_argument("--trajectory-csv", dest="trajectory_csv")

    params = commands.add_parser("optimize-params", parents=[common], help="solve the parameter program")
    params.add_argument("--resolution", type=float, default=1e-3)
    params.add_argument("--fixed-t-s", dest="fixed_t_s", type=float, default=None)

    gen = commands.add_parser("gen", parents=[common], help="generate an instance file")
    gen.add_argument("--kind", required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--param", action="append", help="generator parameter key=value")
    gen.add_argument("--constraint", default=None)
    gen.add_argument("--constraint-param", dest="constraint_param", action="append")
    return parser


# === Helpers ===
def _mode(args, n: int) -> EvaluationMode:
    if args.mode == "exact":
        return EvaluationMode.exact()
    samples = fine_sample_count(n) if args.fine_schedule else args.samples
    return EvaluationMode.sampled(samples)


def _schedule(args, n: int, t_s: float) -> Schedule:
    return Schedule.fine(n, t_s) if args.fine_schedule else Schedule.uniform(t_s, args.delta)


def _emit(args, payload) -> None:
    if args.out == "csv" and isinstance(payload, dict):
        lines = [",".join(payload.keys()), ",".join(str(v) for v in payload.values())]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _value(instance, x, mode: EvaluationMode, seed: int) -> float:
    if mode.is_exact:
        return MultilinearOracle(instance).value(x)
    return estimate_multilinear(instance, x, max(2, mode.samples), KeyedStreams(seed).child_seed("cli-value")).mean


# === Commands ===
def command_run(args) -> int:
    spec = read_instance(args.instance)
    problem = build_problem(spec)
    instance, polytope = problem.instance, problem.polytope
    mode = _mode(args, instance.n)
    config = LocalSearchConfig(epsilon=args.epsilon, mode=mode)
    trajectory = None
    payload = {"instance": spec.name or args.instance, "algorithm": args.algorithm, "seed": args.seed,
               "mode": mode.kind, "removed": problem.removed}

    if args.algorithm == "main":
        params = MainParams.from_probability(args.t_s, args.p)
        result = main_algorithm(
            instance, polytope, params, mode, args.seed, schedule=_schedule(args, instance.n, args.t_s),
            local_search=config, selection=args.selection, z_rounds=args.z_rounds,
        )
        trajectory = result.trajectory
        summary = result.summary()
        summary["x1"] = problem.lift(result.x1).tolist()
        summary["x2"] = problem.lift(result.x2).tolist()
        summary["output"] = problem.lift(result.output).tolist()
        summary["z"] = [problem.kept[u] for u in summary["z"]]
        payload.update(summary)
        payload["value"] = result.combined
    elif args.algorithm == "local-search":
        searched = fractional_local_search(instance, polytope, config, seed=args.seed)
        payload.update(value=_value(instance, searched.x, mode, args.seed), gap=searched.gap,
                       converged=searched.converged, iterations=searched.iterations,
                       x=problem.lift(searched.x).tolist())
    else:
        if args.algorithm == "mcg":
            run = measured_continuous_greedy(instance, polytope, mode=mode, seed=args.seed,
                                             schedule=_schedule(args, instance.n, 0.0), record_every=1)
        else:
            streams = KeyedStreams(args.seed)
            searched = fractional_local_search(instance, polytope, config, seed=streams.child_seed("local-search"))
            z = sample_random_subset(searched.x, streams.generator("z-draw", 0))
            run = aided_mcg(instance, polytope, z, _schedule(args, instance.n, args.t_s), mode,
                            seed=streams.child_seed("aided-mcg", 0))
        trajectory = run.trajectory
        payload.update(value=_value(instance, run.y1, mode, args.seed), y1=problem.lift(run.y1).tolist())

    payload["oracle_calls"] = instance.eval_count
    if args.trajectory_csv and trajectory is not None:
        trajectory.write_csv(args.trajectory_csv)
        logger.info("Trajectory written to %s", args.trajectory_csv)
    if args.out == "csv":
        payload = {key: payload[key] for key in ("instance", "algorithm", "seed", "mode", "value", "oracle_calls")}
    _emit(args, payload)
    return EXIT_OK


def command_bench(args) -> int:
    config = load_benchmark_config(args.config)
    if args.mode == "sampled":
        config.mode = EvaluationMode.sampled(args.samples)
    rows = run_benchmark(config, base_dir=Path(args.config).parent, workers=args.workers)
    if args.output and args.out == "csv":
        write_csv(rows, args.output)
    elif args.output:
        write_json(rows, args.output)
    elif args.out == "csv":
        write_csv_rows(rows, sys.stdout)
    else:
        sys.stdout.write(json.dumps([row.model_dump() for row in rows], indent=2) + "\n")
    for algorithm, stats in summarize(rows).items():
        logger.info("%s: min ratio %.4f, mean ratio %.4f over %d rows",
                    algorithm, stats["min_ratio"], stats["mean_ratio"], stats["rows"])
    failed = [row for row in rows if row.status == "error"]
    if failed:
        logger.warning("%d of %d rows failed", len(failed), len(rows))
    return EXIT_OK


def command_verify(args) -> int:
    if args.mode != "exact":
        raise UsageError("verify needs --mode exact")
    spec = read_instance(args.instance)
    problem = build_problem(spec)
    instance, polytope = problem.instance, problem.polytope
    opt, f_opt = brute_force_opt(instance, polytope)
    config = LocalSearchConfig(epsilon=args.epsilon, scale=f_opt)
    result = main_algorithm(
        instance, polytope, MainParams.from_probability(args.t_s, args.p), EvaluationMode.exact(), args.seed,
        schedule=_schedule(args, instance.n, args.t_s), local_search=config, opt=opt,
    )
    report = verify_run(instance, polytope, result)
    if args.trajectory_csv:
        result.trajectory.write_csv(args.trajectory_csv)
    payload = report.model_dump()
    payload["passed"] = report.passed
    _emit(args, payload if args.out == "json" else {"passed": report.passed, **report.verdicts})
    return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED


def command_optimize_params(args) -> int:
    solution = optimize_parameters(args.resolution, t_s=args.fixed_t_s)
    payload = solution.model_dump()
    payload["p"] = solution.p
    _emit(args, payload)
    return EXIT_OK


def command_gen(args) -> int:
    spec = generate_instance(
        args.kind, args.n, _key_values(args.param), args.seed, args.constraint, _key_values(args.constraint_param)
    )
    if args.output:
        write_instance(spec, args.output)
        logger.info("Instance %s written to %s", spec.name, args.output)
    else:
        sys.stdout.write(spec.model_dump_json(indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "run": command_run,
    "bench": command_bench,
    "verify": command_verify,
    "optimize-params": command_optimize_params,
    "gen": command_gen,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        settings = Settings.from_env()
    except ValueError as e:
        sys.stderr.write(f"Invalid SUBMOD_* environment settings: {e}\n")
        return EXIT_USAGE
    args = build_parser(settings).parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except SubmodError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except ValueError as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
