"""Batch front end: generate, solve, verify and report.

Exit codes are part of the interface: 0 success, 1 verification failure,
2 malformed input or parameters, 3 missing oracle capability.  All numerics
are read and written in exact rational text form; output bytes are
deterministic for a fixed command line (except the wall-time metric, which
reports are expected to ignore).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .core import (
    ContractViolationError,
    DEFAULT_DENOMINATOR_CAP,
    EvaluatedSolution,
    InvalidParameterError,
    MolpError,
    ObjectiveVector,
    ParseError,
    UnsupportedOracleError,
    format_rational,
    min_exponent_at_least,
    one_exact_alpha,
    parse_rational,
    two_pow,
)
from . import algorithms, generators, verify
from .problems import (
    ExplicitInstance,
    GraphInstance,
    SchedulingInstance,
    explicit_oracles,
    instance_to_text,
    load_instance,
    scheduling_handle,
    shortest_path_handle,
)

__all__ = ["main", "RunConfig"]

ALGORITHMS = ("grid", "adaptive", "dy", "greedy", "existence")
FAMILIES = generators.FAMILIES

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_CAPABILITY = 3


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    algorithm: Optional[str] = None
    epsilon: Optional[Fraction] = None
    denominator_cap: int = DEFAULT_DENOMINATOR_CAP
    seed: int = 0
    out_path: Optional[str] = None
    audit_path: Optional[str] = None
    metrics_path: Optional[str] = None
    filter_dominated: bool = False
    check_invariants: bool = False
    parallel_grid: bool = False
    compute_min: bool = False
    solution_path: Optional[str] = None
    report_dir: Optional[str] = None
    family: Optional[str] = None
    family_args: dict = None


def _universe(instance, handle):
    if isinstance(instance, ExplicitInstance):
        return instance.universe()
    if isinstance(instance, SchedulingInstance):
        return handle.universe()
    if isinstance(instance, GraphInstance):
        return handle.paths()
    raise ContractViolationError(f"unknown instance type {type(instance)!r}")


def _make_handle(instance):
    if isinstance(instance, ExplicitInstance):
        return explicit_oracles(instance)
    if isinstance(instance, GraphInstance):
        return shortest_path_handle(instance)
    if isinstance(instance, SchedulingInstance):
        return scheduling_handle(instance)
    raise ContractViolationError(f"unknown instance type {type(instance)!r}")


def _run_algorithm(config: RunConfig, handle) -> algorithms.ParetoRunResult:
    eps = config.epsilon
    cap = config.denominator_cap
    if config.algorithm == "grid":
        return algorithms.grid_sweep(
            handle,
            eps,
            denominator_cap=cap,
            filter_dominated=config.filter_dominated,
            parallel=config.parallel_grid,
        )
    if config.algorithm == "adaptive":
        return algorithms.adaptive_sweep(
            handle,
            eps,
            denominator_cap=cap,
            filter_dominated=config.filter_dominated,
            check_invariants=config.check_invariants,
        )
    if config.algorithm == "dy":
        return algorithms.alternating_sweep(
            handle, eps, denominator_cap=cap, filter_dominated=config.filter_dominated
        )
    if config.algorithm == "greedy":
        return algorithms.greedy_minimum(
            handle, eps, filter_dominated=config.filter_dominated
        )
    if config.algorithm == "existence":
        return algorithms.stripe_cover(
            handle, eps, filter_dominated=config.filter_dominated
        )
    raise InvalidParameterError(f"unknown algorithm {config.algorithm!r}")


def _call_ceiling(config: RunConfig, handle, result) -> Optional[int]:
    if result.schedule is None:
        return None
    ratio = 1 + result.schedule.delta
    if config.algorithm == "grid":
        u = min_exponent_at_least(ratio, two_pow(handle.M))
        return (2 * u) ** (handle.p - 1)
    if config.algorithm == "adaptive":
        u2 = min_exponent_at_least(ratio, two_pow(2 * handle.M))
        return u2 + 2
    return None


def solution_set_text(solutions, p: int, epsilon: Fraction) -> str:
    lines = [f"molp solution {p} {format_rational(epsilon)}"]
    lines += [f"sol {s.witness} {s.image.to_text()}" for s in solutions]
    return "\n".join(lines) + "\n"


def parse_solution_text(text: str):
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise ParseError("empty solution file")
    header = rows[0]
    if header[:2] != ["molp", "solution"] or len(header) != 4:
        raise ParseError(f"bad solution header: {' '.join(header)}")
    p = int(header[2])
    eps = parse_rational(header[3])
    solutions = []
    for row in rows[1:]:
        if row[0] != "sol" or len(row) != 2 + p:
            raise ParseError(f"bad solution line: {' '.join(row)}")
        solutions.append(
            EvaluatedSolution(
                row[1], ObjectiveVector(tuple(parse_rational(t) for t in row[2:]))
            )
        )
    return p, eps, solutions


def _write(path: Optional[str], text: str, stream) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        stream.write(text)


def cmd_gen(config: RunConfig, stdout) -> int:
    args = config.family_args or {}
    spec = generators.GeneratorSpec(
        family=config.family,
        epsilon=config.epsilon,
        n=args.get("n", 2),
        values=tuple(args.get("values", ())),
        seed=config.seed,
        p=args.get("p", 2),
        count=args.get("count", 8),
        m_target=args.get("m_target", 3),
        anchor=(args.get("anchor_f1", Fraction(10)), args.get("anchor_f2", Fraction(8))),
        include_twin=args.get("include_twin", False),
        base=args.get("base", (Fraction(1), Fraction(1), Fraction(8))),
        include_twins=args.get("include_twins", False),
    )
    instance, constants = spec.build()
    echo = {key: str(value) for key, value in constants.items()}

    text = instance_to_text(instance)
    _write(config.out_path, text, stdout)
    if isinstance(instance, (ExplicitInstance, GraphInstance)):
        echo["M"] = str(instance.M)
    else:
        echo["M"] = str(_make_handle(instance).M)
    for key in sorted(echo):
        stdout.write(f"{key}={echo[key]}\n")
    return EXIT_OK


def cmd_solve(config: RunConfig, stdout) -> int:
    instance = load_instance(config.input_path)
    handle = _make_handle(instance)
    started = time.perf_counter()
    result = _run_algorithm(config, handle)
    elapsed = time.perf_counter() - started

    solution_text = solution_set_text(result.solutions, handle.p, config.epsilon)
    _write(config.out_path, solution_text, stdout)
    if config.audit_path:
        Path(config.audit_path).write_text(
            "".join(line + "\n" for line in result.audit.export_lines()),
            encoding="utf-8",
        )

    metrics: dict[str, str] = {
        "instance": str(config.input_path),
        "algorithm": str(config.algorithm),
        "eps": format_rational(config.epsilon),
        "set_size": str(len(result.solutions)),
        "oracle_calls": str(len(result.audit)),
    }
    if result.schedule is not None:
        metrics["delta"] = format_rational(result.schedule.delta)
        metrics["eps_effective"] = format_rational(result.schedule.effective_epsilon)
    ceiling = _call_ceiling(config, handle, result)
    metrics["call_ceiling"] = str(ceiling) if ceiling is not None else "-"

    verdict = "-"
    min_size = ratio = "-"
    try:
        universe = _universe(instance, handle)
    except (UnsupportedOracleError, MolpError):
        universe = None
    if universe is not None:
        report = verify.verify_one_exact(
            result.solutions, universe, one_exact_alpha(config.epsilon, handle.p)
        )
        verdict = "pass" if report.verdict else "fail"
        if config.compute_min and len(universe) <= verify.EXHAUSTIVE_CAP:
            size, _ = verify.exhaustive_min_one_exact(universe, config.epsilon)
            min_size = str(size)
            if size > 0:
                ratio = format_rational(Fraction(len(result.solutions), size))
    metrics["min_size"] = min_size
    metrics["ratio"] = ratio
    metrics["verdict"] = verdict
    metrics["wall_time_s"] = f"{elapsed:.6f}"

    metrics_text = "".join(f"{k}={v}\n" for k, v in metrics.items())
    if config.metrics_path:
        Path(config.metrics_path).write_text(metrics_text, encoding="utf-8")
    elif config.out_path:
        Path(config.out_path + ".metrics").write_text(metrics_text, encoding="utf-8")
    else:
        stdout.write(metrics_text)
    return EXIT_OK


def cmd_verify(config: RunConfig, stdout) -> int:
    instance = load_instance(config.input_path)
    try:
        text = Path(config.solution_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {config.solution_path}: {exc}") from exc
    p, eps, chosen = parse_solution_text(text)
    if config.epsilon is not None:
        eps = config.epsilon
    handle = _make_handle(instance)
    if p != handle.p:
        raise ParseError(
            f"solution file has {p} objectives, instance has {handle.p}"
        )
    universe = _universe(instance, handle)
    report = verify.verify_one_exact(chosen, universe, one_exact_alpha(eps, p))
    stdout.write(report.to_text())
    return EXIT_OK if report.verdict else EXIT_VERIFY_FAIL


_REPORT_COLUMNS = (
    "instance",
    "algorithm",
    "eps",
    "set_size",
    "min_size",
    "ratio",
    "oracle_calls",
    "call_ceiling",
    "verdict",
)


def cmd_report(config: RunConfig, stdout) -> int:
    directory = Path(config.report_dir)
    if not directory.is_dir():
        raise ParseError(f"not a directory: {directory}")
    rows = []
    for path in sorted(directory.glob("*.metrics")):
        data: dict[str, str] = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if "=" in line:
                key, value = line.split("=", 1)
                data[key] = value
        rows.append(tuple(data.get(col, "-") for col in _REPORT_COLUMNS))
    if not rows:
        raise ParseError(f"no run outputs in {directory}")
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["\t".join(_REPORT_COLUMNS)]
    lines += ["\t".join(row) for row in rows]
    text = "\n".join(lines) + "\n"
    _write(config.out_path, text, stdout)
    return EXIT_OK


def _parse_values_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParseError(f"bad integer list: {text!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molp",
        description="one-exact approximate Pareto sets over scalarization oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="emit an instance of a named family")
    gen.add_argument("--family", required=True, choices=FAMILIES)
    gen.add_argument("--eps", default="1")
    gen.add_argument("--n", type=int, default=2)
    gen.add_argument("--a", default=None, help="comma-separated partition values")
    gen.add_argument("--anchor-f1", default="10")
    gen.add_argument("--anchor-f2", default="8")
    gen.add_argument("--include-twin", action="store_true")
    gen.add_argument("--base", default="1,1,8", help="comma-separated base point")
    gen.add_argument("--include-twins", action="store_true")
    gen.add_argument("--p", type=int, default=2)
    gen.add_argument("--count", type=int, default=8)
    gen.add_argument("--m-target", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None)

    solve = sub.add_parser("solve", help="run an algorithm on an instance file")
    solve.add_argument("--alg", required=True, choices=ALGORITHMS)
    solve.add_argument("--eps", required=True)
    solve.add_argument("--input", required=True)
    solve.add_argument("--out", default=None)
    solve.add_argument("--audit-out", default=None)
    solve.add_argument("--metrics-out", default=None)
    solve.add_argument("--delta-den-cap", type=int, default=DEFAULT_DENOMINATOR_CAP)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--filter-dominated", action="store_true")
    solve.add_argument("--check-invariants", action="store_true")
    solve.add_argument("--parallel-grid", action="store_true")
    solve.add_argument("--compute-min", action="store_true")

    ver = sub.add_parser("verify", help="check a solution set against an instance")
    ver.add_argument("--input", required=True)
    ver.add_argument("--solution", required=True)
    ver.add_argument("--eps", default=None)

    rep = sub.add_parser("report", help="aggregate run metrics into a table")
    rep.add_argument("--dir", required=True)
    rep.add_argument("--out", default=None)

    return parser


def _config_from_args(args) -> RunConfig:
    config = RunConfig(command=args.command)
    if args.command == "gen":
        config.family = args.family
        config.epsilon = parse_rational(args.eps)
        config.seed = args.seed
        config.out_path = args.out
        family_args: dict = {"n": args.n, "p": args.p, "count": args.count, "m_target": args.m_target}
        if args.a is not None:
            family_args["values"] = _parse_values_list(args.a)
        elif args.family == "thm6":
            raise ParseError("--a is required for the thm6 family")
        family_args["anchor_f1"] = parse_rational(args.anchor_f1)
        family_args["anchor_f2"] = parse_rational(args.anchor_f2)
        family_args["include_twin"] = args.include_twin
        family_args["include_twins"] = args.include_twins
        base = [parse_rational(tok) for tok in args.base.split(",")]
        if len(base) != 3:
            raise ParseError("--base needs exactly three values")
        family_args["base"] = tuple(base)
        config.family_args = family_args
    elif args.command == "solve":
        config.algorithm = args.alg
        config.epsilon = parse_rational(args.eps)
        if config.epsilon <= 0:
            raise ParseError("--eps must be positive")
        config.input_path = args.input
        config.out_path = args.out
        config.audit_path = args.audit_out
        config.metrics_path = args.metrics_out
        config.denominator_cap = args.delta_den_cap
        config.seed = args.seed
        config.filter_dominated = args.filter_dominated
        config.check_invariants = args.check_invariants
        config.parallel_grid = args.parallel_grid
        config.compute_min = args.compute_min
    elif args.command == "verify":
        config.input_path = args.input
        config.solution_path = args.solution
        config.epsilon = parse_rational(args.eps) if args.eps is not None else None
    elif args.command == "report":
        config.report_dir = args.dir
        config.out_path = args.out
    return config


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        config = _config_from_args(args)
        if config.command == "gen":
            return cmd_gen(config, stdout)
        if config.command == "solve":
            return cmd_solve(config, stdout)
        if config.command == "verify":
            return cmd_verify(config, stdout)
        if config.command == "report":
            return cmd_report(config, stdout)
        raise InvalidParameterError(f"unknown command {config.command!r}")
    except UnsupportedOracleError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CAPABILITY
    except MolpError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
