"""Command-line entry point: ``bpmf run`` and ``bpmf compare``.

Exit codes: 0 success, 1 usage error, 2 runtime/divergence error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .baseline import MfConfig
from .errors import BpmfError
from .evaluate import ExperimentConfig, ExperimentReport, compare, run_experiment
from .mcmc import McmcConfig
from .vi import ViConfig


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bpmf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train one engine and write report/trace")
    run.add_argument("--engine", required=True, choices=("mf", "mcmc", "vi"))
    run.add_argument("--data", required=True, help="path to a ratings.csv file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--k", type=int, default=10)
    run.add_argument("--sigma2", type=float, default=0.25)
    run.add_argument("--epochs", type=int, help="MF/VI training epochs")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--split-seed", type=int, default=0)
    run.add_argument("--lr", type=float, help="MF/VI learning rate")
    run.add_argument("--mc-samples", type=int, help="VI ELBO samples per epoch")
    run.add_argument("--n-steps", type=int, help="MCMC chain length")
    run.add_argument("--burn-in", type=int, help="MCMC burn-in (default 60%% of steps)")
    run.add_argument("--thin", type=int, help="MCMC thinning stride")
    run.add_argument("--proposal-std", type=float, help="MCMC random-walk step std")

    cmp_ = sub.add_parser("compare", help="tabulate two or more report.json files")
    cmp_.add_argument("reports", nargs="+", metavar="report.json")
    cmp_.add_argument("--csv", help="also write the comparison as CSV to this path")
    return parser


def _engine_config(args):
    if args.engine == "mf":
        cfg = MfConfig(k=args.k, seed=args.seed)
        if args.lr is not None:
            cfg = dataclasses.replace(cfg, alpha=args.lr)
        if args.epochs is not None:
            cfg = dataclasses.replace(cfg, epochs=args.epochs)
        return cfg
    if args.engine == "mcmc":
        cfg = McmcConfig(seed=args.seed)
        if args.n_steps is not None:
            burn_in = args.burn_in if args.burn_in is not None else int(0.6 * args.n_steps)
            cfg = dataclasses.replace(cfg, n_steps=args.n_steps, burn_in=burn_in)
        elif args.burn_in is not None:
            cfg = dataclasses.replace(cfg, burn_in=args.burn_in)
        thin = args.thin if args.thin is not None else max(1, (cfg.n_steps - cfg.burn_in) // 100)
        cfg = dataclasses.replace(cfg, thin=thin)
        if args.proposal_std is not None:
            cfg = dataclasses.replace(cfg, proposal_std=args.proposal_std)
        return cfg
    cfg = ViConfig(k=args.k, seed=args.seed)
    if args.lr is not None:
        cfg = dataclasses.replace(cfg, learning_rate=args.lr)
    if args.epochs is not None:
        cfg = dataclasses.replace(cfg, epochs=args.epochs)
    if args.mc_samples is not None:
        cfg = dataclasses.replace(cfg, mc_samples=args.mc_samples)
    return cfg


def _cmd_run(args) -> int:
    try:
        engine_cfg = _engine_config(args)
    except ValueError as exc:
        print(f"bpmf: invalid configuration: {exc}", file=sys.stderr)
        return 1
    cfg = ExperimentConfig(
        engine=args.engine,
        data_path=args.data,
        output_dir=args.out,
        k=args.k,
        sigma2=args.sigma2,
        split_seed=args.split_seed,
        engine_config=engine_cfg,
    )
    report = run_experiment(cfg)
    print(
        f"{args.engine}: rmse_validation={report.rmse_validation:.4f} "
        f"rmse_test={report.rmse_test:.4f} "
        f"wall_clock={report.wall_clock_seconds:.2f}s "
        f"cold_start={report.cold_start_count}"
    )
    print(f"report: {args.out}/report.json")
    return 0


def _cmd_compare(args) -> int:
    reports = []
    for path in args.reports:
        with open(path) as fh:
            reports.append(ExperimentReport.from_dict(json.load(fh)))
    text, csv_text = compare(reports)
    print(text)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_compare(args)
    except BpmfError as exc:
        # usage-level errors: bad inputs the user can fix without a traceback
        if args.command == "compare" and "at least 2" in str(exc):
            print(f"bpmf: {exc}", file=sys.stderr)
            return 1
        print(f"bpmf: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bpmf: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
