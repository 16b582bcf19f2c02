"""Command-line surface: strategy configs in; scores, audits, simulation
records, optimizer traces and process-tool verdicts out.

Reports are ``key=value`` lines with numbers printed to 17 significant
digits, so every emitted value parses back to the exact double.  Exit codes:
0 success, 2 parse error, 3 invariant violation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import stochastic
from .configio import (
    ConfigError,
    complex_matrix_payload,
    load_process_input,
    load_strategy,
    real_matrix_payload,
    save_strategy,
)
from .game import (
    box_of_strategy,
    expected_score,
    as_input_distribution,
    is_no_signaling,
    signaling_witness,
    simulate_rounds,
    win_probability,
)
from .tsirelson import TSIRELSON_SCORE, QuantumSetup, optimize

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_IO = 4


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass
class RunReport:
    """Key=value report emitted by score and simulate."""

    exact_score: float
    exact_win_probability: float
    ns_check: str
    bound_margin: float | None = None
    empirical_score: float | None = None
    empirical_win_rate: float | None = None
    n_rounds: int | None = None
    seed: int | None = None

    def lines(self) -> list[str]:
        pairs = [
            ("exact_score", self.exact_score),
            ("exact_win_probability", self.exact_win_probability),
            ("ns_check", self.ns_check),
            ("bound_margin", self.bound_margin),
            ("empirical_score", self.empirical_score),
            ("empirical_win_rate", self.empirical_win_rate),
            ("n_rounds", self.n_rounds),
            ("seed", self.seed),
        ]
        return [f"{k}={_fmt(v)}" for k, v in pairs if v is not None]


def _parse_inputs(spec: str) -> np.ndarray:
    parts = spec.split(",")
    if len(parts) != 4:
        raise ConfigError(f"--inputs must be 'p00,p01,p10,p11', got {spec!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--inputs must be four numbers, got {spec!r}") from exc
    return as_input_distribution(np.array(values).reshape(2, 2), "--inputs")


def _report_for(strategy, inputs) -> RunReport:
    box = box_of_strategy(strategy)
    score = expected_score(box, inputs)
    report = RunReport(
        exact_score=score,
        exact_win_probability=win_probability(score),
        ns_check="pass" if is_no_signaling(box) else "fail",
    )
    if isinstance(strategy, QuantumSetup):
        report.bound_margin = TSIRELSON_SCORE - abs(score)
    return report


def cmd_score(args) -> int:
    strategy = load_strategy(args.config)
    inputs = _parse_inputs(args.inputs) if args.inputs else None
    for line in _report_for(strategy, inputs).lines():
        print(line)
    return EXIT_OK


def format_records(result) -> str:
    """Record file payload: a header then one CSV row per round."""
    lines = ["round_index,x,y,q,r,win"]
    win = result.win.astype(int)
    for i in range(result.n):
        lines.append(f"{i},{result.x[i]},{result.y[i]},{result.q[i]},{result.r[i]},{win[i]}")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    strategy = load_strategy(args.config)
    if args.n < 1:
        raise ValueError("--n must be at least 1")
    result = simulate_rounds(strategy, args.n, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(format_records(result))
    report = _report_for(strategy, None)
    report.empirical_score = result.empirical_score
    report.empirical_win_rate = result.empirical_win_rate
    report.n_rounds = result.n
    report.seed = result.seed
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_audit(args) -> int:
    strategy = load_strategy(args.config)
    box = box_of_strategy(strategy)
    witness = signaling_witness(box)
    lines = [f"ns_check={'pass' if witness is None else 'fail'}"]
    if witness is not None:
        lines.append(f"ns_witness_side={witness.side}")
        lines.append(f"ns_witness_outcome={witness.outcome}")
        lines.append(f"ns_witness_own_setting={witness.own_setting}")
        lines.append(
            f"ns_witness_remote_settings={witness.remote_setting_a},{witness.remote_setting_b}"
        )
        lines.append(f"ns_witness_delta={_fmt(witness.delta)}")
    if isinstance(strategy, QuantumSetup):
        # Local operations enter only as a tensor product, and each factor is
        # checked unitary on load: the joint operation factorizes by construction.
        lines.append("factorization=pass")
        score = expected_score(box)
        lines.append(f"bound_margin={_fmt(TSIRELSON_SCORE - abs(score))}")
    for line in lines:
        print(line)
    return EXIT_OK


def cmd_optimize(args) -> int:
    dims_parts = args.dims.split(",")
    if len(dims_parts) != 2:
        raise ConfigError(f"--dims must be 'dim_a,dim_b', got {args.dims!r}")
    try:
        dims = (int(dims_parts[0]), int(dims_parts[1]))
    except ValueError as exc:
        raise ConfigError(f"--dims must be two integers, got {args.dims!r}") from exc
    result = optimize(dims=dims, restarts=args.restarts, seed=args.seed, tol=args.tol)
    save_strategy(result.setup, args.out)
    trace_path = args.out + ".trace.csv"
    with open(trace_path, "w", encoding="utf-8") as fh:
        fh.write("restart,score,best_so_far\n")
        best = -np.inf
        for i, score in enumerate(result.restart_scores):
            best = max(best, score)
            fh.write(f"{i},{score:.17g},{best:.17g}\n")
    print(f"best_score={_fmt(result.score)}")
    print(f"best_win_probability={_fmt(win_probability(result.score))}")
    print(f"bound_margin={_fmt(TSIRELSON_SCORE - abs(result.score))}")
    print(f"restarts={args.restarts}")
    print(f"seed={args.seed}")
    print(f"config_path={args.out}")
    print(f"trace_path={trace_path}")
    return EXIT_OK


def _print_matrix(key: str, payload) -> None:
    print(f"{key}={json.dumps(payload, separators=(',', ':'))}")


def cmd_process(args) -> int:
    if args.tool == "divide":
        data = load_process_input(args.config, {"gamma_total": "real", "gamma_first": "real"})
        report = stochastic.divide_report(data["gamma_total"], data["gamma_first"], tol=args.tol)
        print(f"verdict={'divisible' if report.quotient is not None else 'not_divisible'}")
        print(f"residual={_fmt(report.residual)}")
        if report.quotient is not None:
            _print_matrix("result", real_matrix_payload(report.quotient))
    elif args.tool == "dilate":
        data = load_process_input(args.config, {"gamma": "real"})
        report = stochastic.dilation_report(
            data["gamma"], tol=args.tol, max_restarts=args.restarts, seed=args.seed
        )
        print(f"verdict={'found' if report.unitary is not None else 'not_found'}")
        print(f"residual={_fmt(report.residual)}")
        if report.unitary is not None:
            _print_matrix("result", complex_matrix_payload(report.unitary))
    elif args.tool == "qcor":
        data = load_process_input(args.config, {"u_total": "complex", "u_first": "complex"})
        result = stochastic.qcor(data["u_total"], data["u_first"])
        _print_matrix("result", real_matrix_payload(result))
        print(f"max_column_sum={_fmt(float(np.max(np.abs(result.sum(axis=0)))))}")
    else:  # unreachable: argparse restricts choices
        raise ConfigError(f"unknown tool {args.tool!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chshkit",
        description="Score, audit, simulate and optimize CHSH-game strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="exact score and win probability of a strategy config")
    score.add_argument("--config", required=True, help="strategy config path (JSON)")
    score.add_argument("--inputs", help="input distribution 'p00,p01,p10,p11' (default uniform)")
    score.set_defaults(func=cmd_score)

    simulate = sub.add_parser("simulate", help="play seeded rounds and write a record file")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--n", type=int, required=True, help="number of rounds")
    simulate.add_argument("--seed", type=int, required=True, help="stream seed (required)")
    simulate.add_argument("--out", required=True, help="record file path")
    simulate.set_defaults(func=cmd_simulate)

    audit = sub.add_parser("audit", help="no-signaling verdict and, for quantum, bound margin")
    audit.add_argument("--config", required=True)
    audit.set_defaults(func=cmd_audit)

    opt = sub.add_parser("optimize", help="search for the best quantum strategy")
    opt.add_argument("--dims", default="2,2", help="local dimensions 'dim_a,dim_b'")
    opt.add_argument("--restarts", type=int, default=100)
    opt.add_argument("--seed", type=int, required=True, help="search seed (required)")
    opt.add_argument("--tol", type=float, default=1e-9)
    opt.add_argument("--out", required=True, help="where to write the best setup config")
    opt.set_defaults(func=cmd_optimize)

    process = sub.add_parser("process", help="stochastic-process tools on matrix files")
    process.add_argument("--tool", choices=("divide", "dilate", "qcor"), required=True)
    process.add_argument("--config", required=True, help="matrix input path (JSON)")
    process.add_argument("--tol", type=float, default=stochastic.DIVISION_TOL)
    process.add_argument("--restarts", type=int, default=64)
    process.add_argument("--seed", type=int, default=0)
    process.set_defaults(func=cmd_process)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main_entry() -> None:
    raise SystemExit(main())
