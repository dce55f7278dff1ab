"""Command-line harness: solve, phase, bench, compare, synth.

Flags override config-file keys, which override defaults. Exit codes:
0 success, 1 usage error, 2 input error, 3 non-convergence under --strict.
"""

import argparse
import os
import sys

from .csvio import (
    InputFileError,
    fmt_float,
    fmt_int,
    read_config_file,
    read_observation_file,
    read_signal_file,
    write_csv,
    write_observation_file,
    write_signal_file,
)
from .experiments import (
    ExperimentGrid,
    run_bench,
    run_compare,
    run_phase,
)
from .signal import (
    PencilConditionError,
    extract_frequencies,
    make_instance,
    relative_error,
)
from .solver import RecoveryResult, SolverConfig, solve


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


def _parse_case(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected n,rank,samples, got {text!r}")
    return tuple(int(p) for p in parts)


# (config key, converter, default); flags default to None so that config
# values are only used when the flag is absent
_SETTINGS = {
    "n": (int, None),
    "rank": (int, None),
    "samples": (int, None),
    "seed": (int, 0),
    "delta1": (float, 0.9999),
    "delta2": (float, 0.9999),
    "tol": (float, 1e-4),
    "max_iter": (int, 1000),
    "accelerated": (_parse_bool, False),
    "bound": (float, None),
    "threads": (int, None),
    "trials": (int, 100),
    "repeats": (int, 3),
    "rank_values": (_parse_int_list, None),
    "samples_values": (_parse_int_list, None),
    "out": (str, "."),
}


def build_parser() -> Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="Hankel dimension n; the signal has length 2n-1")
    common.add_argument("--rank", type=int, help="number of sinusoids to fit")
    common.add_argument("--samples", type=int, help="number of observed entries")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--delta1", type=float, help="rank-step size in (0,1), default 0.9999")
    common.add_argument("--delta2", type=float, help="data-step size in (0,1), default 0.9999")
    common.add_argument("--tol", type=float, help="relative-change stopping tolerance, default 1e-4")
    common.add_argument("--max-iter", dest="max_iter", type=int, help="iteration cap, default 1000")
    common.add_argument("--accelerated", action="store_true", default=None,
                        help="use the momentum-accelerated iteration")
    common.add_argument("--bound", type=float, help="magnitude clamp for unobserved entries")
    common.add_argument("--threads", type=int, help="worker processes for Monte Carlo trials")
    common.add_argument("--out", help="output directory (default current)")
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--strict", action="store_true",
                        help="exit with code 3 when the solver does not converge")

    parser = Parser(prog="lrhankel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", parents=[common], help="recover one signal")
    p_solve.add_argument("--obs-file", help="observed samples CSV (rows t,re,im)")
    p_solve.add_argument("--signal-file", help="ground-truth signal CSV, enables error reporting")

    sub.add_parser("synth", parents=[common], help="write a synthetic instance")

    p_phase = sub.add_parser("phase", parents=[common], help="success-rate sweep over (rank, samples)")
    p_phase.add_argument("--rank-values", dest="rank_values", type=_parse_int_list,
                         help="comma-separated sparsity values")
    p_phase.add_argument("--samples-values", dest="samples_values", type=_parse_int_list,
                         help="comma-separated sample counts")
    p_phase.add_argument("--trials", type=int, help="Monte Carlo trials per cell (default 100)")

    p_bench = sub.add_parser("bench", parents=[common], help="wall-clock timing of solves")
    p_bench.add_argument("--case", action="append", type=_parse_case, metavar="N,RANK,SAMPLES",
                         help="instance shape; repeatable")
    p_bench.add_argument("--repeats", type=int, help="timing repetitions, reported as the minimum")

    sub.add_parser("compare", parents=[common], help="plain vs accelerated iteration logs")

    return parser


class Settings:
    """Flag > config file > default resolution for every known key."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self._args = args
        self._config = config

    def get(self, key: str):
        flag = getattr(self._args, key, None)
        if flag is not None:
            return flag
        converter, default = _SETTINGS[key]
        if key in self._config:
            return converter(self._config[key])
        return default

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            raise UsageError(f"--{key.replace('_', '-')} is required for this command")
        return value


def _solver_config(settings: Settings, rank: int, svd_seed: int) -> SolverConfig:
    return SolverConfig(
        rank=rank,
        delta1=settings.get("delta1"),
        delta2=settings.get("delta2"),
        tol=settings.get("tol"),
        max_iter=settings.get("max_iter"),
        accelerated=settings.get("accelerated"),
        bound=settings.get("bound"),
        svd_seed=svd_seed,
    )


def _history_rows(result: RecoveryResult):
    rows = [["0", fmt_float(result.objective_history[0]), ""]]
    for i, rel in enumerate(result.relchange_history, start=1):
        rows.append([fmt_int(i), fmt_float(result.objective_history[i]), fmt_float(rel)])
    return rows


def _write_solve_outputs(out_dir, result, n, rank, x_true=None):
    os.makedirs(out_dir, exist_ok=True)
    write_signal_file(os.path.join(out_dir, "recovered.csv"), result.z_hat)
    write_csv(
        os.path.join(out_dir, "history.csv"),
        ["iteration", "objective", "relchange"],
        _history_rows(result),
    )
    summary = [
        ["n", fmt_int(n)],
        ["rank", fmt_int(rank)],
        ["iterations", fmt_int(result.iterations)],
        ["converged", "true" if result.converged else "false"],
        ["final_objective", fmt_float(result.objective_history[-1])],
    ]
    if x_true is not None:
        summary.append(["relative_error", fmt_float(relative_error(result.z_hat, x_true))])
    try:
        freqs = extract_frequencies(result.z_hat, rank)
        summary.append(["frequency_extraction", "ok"])
        summary.extend([f"freq_{k}", fmt_float(f)] for k, f in enumerate(freqs))
    except PencilConditionError:
        summary.append(["frequency_extraction", "failed"])
    write_csv(os.path.join(out_dir, "summary.csv"), ["key", "value"], summary)


def cmd_solve(args) -> int:
    settings = Settings(args, _load_config(args))
    n = settings.require("n")
    rank = settings.require("rank")
    seed = settings.get("seed")
    out_dir = settings.get("out")

    if args.obs_file is not None:
        obs = read_observation_file(args.obs_file, n)
        x_true = None
        if args.signal_file is not None:
            x_true = read_signal_file(args.signal_file)
            if len(x_true) != 2 * n - 1:
                raise InputFileError(
                    f"{args.signal_file}: signal length {len(x_true)} does not match n={n}"
                )
    else:
        samples = settings.require("samples")
        inst = make_instance(n, rank, samples, seed)
        obs, x_true = inst.obs, inst.x_true

    result = solve(obs, _solver_config(settings, rank, svd_seed=seed))
    _write_solve_outputs(out_dir, result, n, rank, x_true)
    if args.strict and not result.converged:
        print("solver did not converge within max_iter", file=sys.stderr)
        return 3
    return 0


def cmd_synth(args) -> int:
    settings = Settings(args, _load_config(args))
    n = settings.require("n")
    rank = settings.require("rank")
    samples = settings.require("samples")
    inst = make_instance(n, rank, samples, settings.get("seed"))
    out_dir = settings.get("out")
    os.makedirs(out_dir, exist_ok=True)
    write_signal_file(os.path.join(out_dir, "signal.csv"), inst.x_true)
    write_observation_file(os.path.join(out_dir, "observations.csv"), inst.obs)
    write_csv(
        os.path.join(out_dir, "model.csv"),
        ["k", "freq", "amp_re", "amp_im"],
        (
            [fmt_int(k), fmt_float(f), fmt_float(d.real), fmt_float(d.imag)]
            for k, (f, d) in enumerate(zip(inst.model.freqs, inst.model.amps))
        ),
    )
    return 0


def cmd_phase(args) -> int:
    settings = Settings(args, _load_config(args))
    grid = ExperimentGrid(
        n=settings.require("n"),
        rank_values=settings.require("rank_values"),
        sample_values=settings.require("samples_values"),
        trials=settings.get("trials"),
        master_seed=settings.get("seed"),
        solver=_solver_config(settings, rank=1, svd_seed=0),
    )
    workers = settings.get("threads") or os.cpu_count() or 1
    cells = run_phase(grid, workers=workers)
    out_dir = settings.get("out")
    os.makedirs(out_dir, exist_ok=True)
    write_csv(
        os.path.join(out_dir, "phase.csv"),
        ["rank", "samples", "trials", "successes", "success_rate"],
        (
            [
                fmt_int(c.rank),
                fmt_int(c.samples),
                fmt_int(c.trials),
                fmt_int(c.successes),
                fmt_float(c.success_rate),
            ]
            for c in cells
        ),
    )
    return 0


def cmd_bench(args) -> int:
    settings = Settings(args, _load_config(args))
    cases = args.case or [(51, 1, 10), (51, 3, 20), (101, 5, 40)]
    rows = run_bench(
        cases,
        _solver_config(settings, rank=1, svd_seed=0),
        master_seed=settings.get("seed"),
        repeats=settings.get("repeats"),
    )
    out_dir = settings.get("out")
    os.makedirs(out_dir, exist_ok=True)
    write_csv(
        os.path.join(out_dir, "bench.csv"),
        ["n", "rank", "samples", "elapsed_seconds", "iterations", "factor_bytes"],
        (
            [
                fmt_int(r.n),
                fmt_int(r.rank),
                fmt_int(r.samples),
                fmt_float(r.elapsed_seconds),
                fmt_int(r.iterations),
                fmt_int(r.factor_bytes),
            ]
            for r in rows
        ),
    )
    return 0


def cmd_compare(args) -> int:
    settings = Settings(args, _load_config(args))
    n = settings.require("n")
    rank = settings.require("rank")
    samples = settings.require("samples")
    result = run_compare(n, rank, samples, settings.get("seed"),
                         _solver_config(settings, rank, svd_seed=0))
    plain, accel = result.plain, result.accelerated

    rows = []
    length = max(len(plain.objective_history), len(accel.objective_history))
    p_hist = _history_rows(plain)
    a_hist = _history_rows(accel)
    for i in range(length):
        p = p_hist[i][1:] if i < len(p_hist) else ["", ""]
        a = a_hist[i][1:] if i < len(a_hist) else ["", ""]
        rows.append([fmt_int(i), *p, *a])

    out_dir = settings.get("out")
    os.makedirs(out_dir, exist_ok=True)
    write_csv(
        os.path.join(out_dir, "compare.csv"),
        ["iteration", "plain_objective", "plain_relchange", "accel_objective", "accel_relchange"],
        rows,
    )
    write_csv(
        os.path.join(out_dir, "compare_summary.csv"),
        ["key", "value"],
        [
            ["plain_iterations", fmt_int(plain.iterations)],
            ["plain_converged", "true" if plain.converged else "false"],
            ["accel_iterations", fmt_int(accel.iterations)],
            ["accel_converged", "true" if accel.converged else "false"],
            ["iteration_ratio", fmt_float(accel.iterations / plain.iterations)],
        ],
    )
    if args.strict and not (plain.converged and accel.converged):
        print("at least one solver did not converge within max_iter", file=sys.stderr)
        return 3
    return 0


def _load_config(args) -> dict[str, str]:
    if args.config is None:
        return {}
    config = read_config_file(args.config)
    unknown = set(config) - set(_SETTINGS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return config


_COMMANDS = {
    "solve": cmd_solve,
    "synth": cmd_synth,
    "phase": cmd_phase,
    "bench": cmd_bench,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (InputFileError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
