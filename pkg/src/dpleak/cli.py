"""Command-line harness.

    dpleak fig3   --budget-min 0.1 --budget-max 1 --out fig3.csv [--svg fig3.svg]
    dpleak fig4   --budget-min 0.01 --budget-max 0.1 --out fig4.csv
    dpleak attack --data d.jsonl --target x --known a,b,c --m 3 --eps-total 3
    dpleak rate   --mode total --m 10 --eps-total 10

``attack`` exits 0 when it decides the target is absent, 1 when present, 2
when present because the mechanism aborted. Configuration errors exit 64 and
unreadable datasets 65.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from dpleak.analysis import (
    ExperimentRow,
    RateSpec,
    experiment_grid,
    success_rate,
)
from dpleak.attack import AttackConfig, ConfigError, Decision, attack, classify_case
from dpleak.core import DataFormatError, LinearQuery, load_jsonl
from dpleak.mechanism import Mechanism
from dpleak.svg import emit_svg

EXIT_OUT, EXIT_IN, EXIT_IN_VIA_ABORT = 0, 1, 2
EXIT_CONFIG, EXIT_DATA = 64, 65

CSV_HEADER = ("mode", "m", "budget", "R_theory", "R_empirical", "stderr", "trials", "seed")

_DECISION_EXIT = {
    Decision.OUT: EXIT_OUT,
    Decision.IN: EXIT_IN,
    Decision.IN_VIA_ABORT: EXIT_IN_VIA_ABORT,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit 2, which collides with the abort verdict
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class ExperimentSpec:
    subcommand: str
    m_range: tuple[int, int] = (4, 29)
    budget_range: tuple[float, ...] = ()
    trials: int = 10_000
    seed: int = 0
    out: Path | None = None
    svg: Path | None = None
    s_divisor: str = "m"
    abort_threshold: float = math.inf
    workers: int = 1

    def __post_init__(self) -> None:
        lo, hi = self.m_range
        if not 2 <= lo <= hi <= 10_000:
            raise UsageError(f"m range must satisfy 2 <= m-min <= m-max <= 10000, got {lo}..{hi}")
        if any(not (b > 0 and math.isfinite(b)) for b in self.budget_range):
            raise UsageError("budget values must be positive and finite")
        if self.trials < 100 or self.trials % 2:
            raise UsageError(f"trials must be an even integer >= 100, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if self.s_divisor not in ("m", "m-1"):
            raise UsageError("s-divisor must be 'm' or 'm-1'")
        if not self.abort_threshold > 0:
            raise UsageError("abort threshold must be positive")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")

    @property
    def ms(self) -> range:
        return range(self.m_range[0], self.m_range[1] + 1)


def budget_grid(lo: float, hi: float, steps: int) -> tuple[float, ...]:
    if steps < 1:
        raise UsageError("budget-steps must be >= 1")
    if not 0 < lo <= hi:
        raise UsageError(f"need 0 < budget-min <= budget-max, got {lo}, {hi}")
    if steps == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.linspace(lo, hi, steps))


def run_fig3(spec: ExperimentSpec) -> list[ExperimentRow]:
    """Grid with a fixed total budget per row, split over m samples."""
    return experiment_grid(
        "total", spec.budget_range, spec.ms, spec.trials, spec.seed, spec.s_divisor, spec.workers
    )


def run_fig4(spec: ExperimentSpec) -> list[ExperimentRow]:
    """Grid with a fixed per-sample budget per row."""
    return experiment_grid(
        "per-query", spec.budget_range, spec.ms, spec.trials, spec.seed, spec.s_divisor, spec.workers
    )


def rows_to_csv(rows: Sequence[ExperimentRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            (
                r.mode,
                r.m,
                f"{r.budget:.6g}",
                f"{r.r_theory:.6g}",
                f"{r.r_empirical:.6g}",
                f"{r.stderr:.6g}",
                r.trials,
                r.seed,
            )
        )
    return buf.getvalue()


def write_csv(rows: Sequence[ExperimentRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))


# subcommands -------------------------------------------------------------------

def _cmd_grid(args: argparse.Namespace) -> int:
    spec = ExperimentSpec(
        subcommand=args.command,
        m_range=(args.m_min, args.m_max),
        budget_range=budget_grid(args.budget_min, args.budget_max, args.budget_steps),
        trials=args.trials,
        seed=args.seed,
        out=Path(args.out),
        svg=Path(args.svg) if args.svg else None,
        s_divisor=args.s_divisor,
        workers=args.workers,
    )
    rows = run_fig3(spec) if args.command == "fig3" else run_fig4(spec)
    write_csv(rows, spec.out)
    if spec.svg is not None:
        label = "total budget fixed" if args.command == "fig3" else "per-query budget fixed"
        emit_svg(rows, spec.svg, title=f"{args.command}: {label}")
    print(f"wrote {len(rows)} rows to {spec.out}")
    return 0


def _parse_known(text: str) -> tuple[str, ...]:
    ids = tuple(i.strip() for i in text.split(",") if i.strip())
    if not ids:
        raise UsageError("--known needs at least one id")
    return ids


def _cmd_attack(args: argparse.Namespace) -> int:
    try:
        dataset = load_jsonl(args.data)
    except DataFormatError as exc:
        print(f"dpleak attack: {exc}", file=sys.stderr)
        return EXIT_DATA
    known_ids = _parse_known(args.known)
    missing = [i for i in known_ids if i not in dataset]
    if missing:
        raise UsageError(f"known ids not in the dataset: {', '.join(missing)}")
    threshold = args.abort_threshold
    if not threshold > 0:
        raise UsageError("abort threshold must be positive")
    cfg = AttackConfig(
        m=args.m,
        eps_total=args.eps_total,
        target_id=args.target,
        known_ids=known_ids,
        alpha=args.alpha,
        s_divisor=args.s_divisor,
    )
    mech = Mechanism(dataset, threshold, args.seed)
    verdict = attack(mech, LinearQuery.COUNT, cfg, dataset.subset(known_ids))

    x_in = args.target in dataset
    enough = math.isfinite(threshold) and len(known_ids) * cfg.epsilon > threshold
    case = classify_case(enough, x_in)
    record = {
        "decision": verdict.decision.value,
        "t_stat": verdict.t_test.t_stat if verdict.t_test else None,
        "df": verdict.t_test.df if verdict.t_test else None,
        "p_value": verdict.t_test.p_value if verdict.t_test else None,
        "degenerate": verdict.degenerate,
        "samples": list(verdict.samples),
        "attacker_budget": verdict.attacker_budget,
        "mechanism_budget": verdict.mechanism_budget,
        "case": case,
        "m": cfg.m,
        "eps_total": cfg.eps_total,
        "alpha": cfg.alpha,
        "seed": args.seed,
    }
    print(f"verdict:            {verdict.decision.value}")
    if verdict.t_test:
        print(f"t statistic:        {verdict.t_test.t_stat:.6f} (df={verdict.t_test.df})")
        print(f"p value:            {verdict.t_test.p_value:.6g} (alpha={cfg.alpha})")
    if verdict.degenerate:
        print("t statistic:        undefined (identical samples)")
    print(f"samples ({len(verdict.samples)}):        " + ", ".join(f"{a:.4f}" for a in verdict.samples))
    print(f"attacker budget:    {verdict.attacker_budget:.6g}")
    print(f"mechanism budget:   {verdict.mechanism_budget:.6g}")
    print(f"case:               {case}")
    print(json.dumps(record, sort_keys=True))
    return _DECISION_EXIT[verdict.decision]


def _cmd_rate(args: argparse.Namespace) -> int:
    try:
        spec = RateSpec(
            m=args.m,
            mode=args.mode,
            mu0=args.mu0,
            mu1=args.mu1,
            s=args.s,
            epsilon=args.eps,
            eps_total=args.eps_total,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"{success_rate(spec):.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpleak", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, (lo, hi), helptext in (
        ("fig3", (0.1, 1.0), "fixed total budget per row"),
        ("fig4", (0.01, 0.1), "fixed per-query budget per row"),
    ):
        p = sub.add_parser(name, help=f"theory vs Monte Carlo grid, {helptext}")
        p.add_argument("--budget-min", type=float, default=lo)
        p.add_argument("--budget-max", type=float, default=hi)
        p.add_argument("--budget-steps", type=int, default=10)
        p.add_argument("--m-min", type=int, default=4)
        p.add_argument("--m-max", type=int, default=29)
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="CSV output path")
        p.add_argument("--svg", help="optional SVG chart path")
        p.add_argument("--s-divisor", choices=("m", "m-1"), default="m")
        p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("attack", help="run one attack against a JSON-lines dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--known", required=True, help="comma-separated known record ids")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps-total", type=float, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--abort-threshold", type=float, default=math.inf)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s-divisor", choices=("m", "m-1"), default="m")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("rate", help="evaluate the closed-form success rate")
    p.add_argument("--mode", choices=("exact", "per-query", "total"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mu0", type=float)
    p.add_argument("--mu1", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--eps", type=float, help="per-query budget")
    p.add_argument("--eps-total", type=float)
    p.set_defaults(func=_cmd_rate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"dpleak {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"dpleak {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
