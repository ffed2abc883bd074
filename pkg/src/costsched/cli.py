"""Command-line surface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 computation failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .dataio import (
    load_dataset_csv,
    read_cost_profile,
    split_dataset,
    write_cost_profile,
    write_dataset_csv,
)
from .errors import ComputationError, CostschedError, DataError
from .experiment import (
    METHOD_ENSEMBLE,
    METHOD_L1_BASELINE,
    ExperimentConfig,
    emit_outputs,
    run_experiment,
    staircase_svg,
    write_trace,
)
from .oracle import coverage_fraction, exhaustive_schedule, write_solution_space
from .schedule import (
    CostProfile,
    Source,
    best_under_budget,
    read_schedule,
    schedule_to_text,
    write_schedule,
)
from .sequences import (
    EnsembleConfig,
    ForestParams,
    logistic_path_schedule,
    model_seq,
    model_seq_l,
    model_seq_sampled,
    run_ensemble,
)
from .synth import MixtureSpec, sample_cost_profile, sample_mixture


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_data_args(p):
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--label-col", default="label")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--costs", help="cost profile file")
    group.add_argument("--cost-range", default="1,100",
                       help="lo,hi for a seeded uniform cost profile")
    p.add_argument("--seed", type=int, default=0)


def _add_engine_args(p):
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--mtry", type=int, default=None)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--n-lambda", type=int, default=100)


def build_parser():
    parser = _Parser(prog="costsched",
                     description="Budget-aware variable selection via an "
                                 "ensemble of model sequences")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the Gaussian-mixture benchmark")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--rho", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("costs", help="generate or echo a cost profile")
    p.add_argument("--p", type=int)
    p.add_argument("--lo", type=float, default=1.0)
    p.add_argument("--hi", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--values", help="comma-separated literal costs")
    p.add_argument("--out", required=True)

    p = sub.add_parser("schedule", help="build the ensemble model schedule")
    _add_data_args(p)
    _add_engine_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sequence", help="run a single sequence generator")
    _add_data_args(p)
    _add_engine_args(p)
    p.add_argument("--type", required=True,
                   choices=["importance", "cost", "sampling", "l1"])
    p.add_argument("--budget", type=float, default=None,
                   help="discard sampled models above this cost")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("lookup", help="budget lookup in a schedule file")
    p.add_argument("--schedule", required=True)
    p.add_argument("--budget", type=float, required=True)

    p = sub.add_parser("oracle", help="exhaustive-search schedule (small p)")
    _add_data_args(p)
    _add_engine_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("compare",
                       help="one run: ensemble schedule vs L1-logistic baseline")
    _add_data_args(p)
    _add_engine_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("experiment", help="repeated-run protocol")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--cost-range", default="1,100")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _add_engine_args(p)
    p.add_argument("--span", type=float, default=2.0 / 3.0)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _parse_range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad --cost-range {text!r}, expected lo,hi")
    return lo, hi


def _load_problem(args):
    X, y, names, _ = load_dataset_csv(args.data, label_column=args.label_col)
    if args.costs:
        _, profile = read_cost_profile(args.costs)
        if profile.p != X.shape[1]:
            raise DataError(
                f"cost profile has {profile.p} entries, dataset has "
                f"{X.shape[1]} features")
    else:
        lo, hi = _parse_range(args.cost_range)
        profile = sample_cost_profile(X.shape[1], lo, hi, args.seed)
    split = split_dataset(X.shape[0], args.seed)
    parts = dict(
        X_tr=X[split.train], y_tr=y[split.train],
        X_val=X[split.validation], y_val=y[split.validation],
        X_te=X[split.test], y_te=y[split.test],
    )
    return X, y, names, profile, parts


def _cmd_synth(args):
    X, y = sample_mixture(MixtureSpec(n=args.n, rho=args.rho, seed=args.seed))
    write_dataset_csv(args.out, X, y)
    print(f"wrote {args.n} rows to {args.out}")
    return 0


def _cmd_costs(args):
    if args.values:
        profile = CostProfile.from_costs(
            float(v) for v in args.values.split(","))
    else:
        if args.p is None:
            raise UsageError("either --values or --p is required")
        profile = sample_cost_profile(args.p, args.lo, args.hi, args.seed)
    write_cost_profile(args.out, profile)
    print(f"wrote {profile.p} costs to {args.out}")
    return 0


def _ensemble_config(args):
    return EnsembleConfig(n_trees=args.trees, mtry=args.mtry,
                          gamma=args.gamma, n_lambda=args.n_lambda,
                          master_seed=args.seed)


def _cmd_schedule(args):
    _, _, _, profile, parts = _load_problem(args)
    ens = run_ensemble(parts["X_tr"], parts["y_tr"], parts["X_val"],
                       parts["y_val"], profile, _ensemble_config(args),
                       X_te=parts["X_te"], y_te=parts["y_te"])
    os.makedirs(args.out, exist_ok=True)
    write_schedule(ens.schedule, os.path.join(args.out, "schedule.csv"))
    with open(os.path.join(args.out, "schedule.svg"), "w") as f:
        f.write(staircase_svg(ens.schedule))
    for source, seq in ens.members.items():
        write_trace(seq, os.path.join(args.out, f"trace_{source.value}.csv"))
    sys.stdout.write(schedule_to_text(ens.schedule))
    return 0


_SEQ_KINDS = {"importance": Source.BY_IMPORTANCE, "cost": Source.BY_COST,
              "sampling": Source.BY_SAMPLING, "l1": Source.BY_L1_PATH}


def _cmd_sequence(args):
    _, _, _, profile, parts = _load_problem(args)
    params = ForestParams(n_trees=args.trees, mtry=args.mtry)
    common = (parts["X_tr"], parts["y_tr"], parts["X_val"], parts["y_val"],
              profile)
    if args.type == "l1":
        seq = model_seq_l(*common, engine="forest", params=params,
                          master_seed=args.seed, n_lambda=args.n_lambda)
    elif args.type == "sampling":
        seq = model_seq_sampled(*common, gamma=args.gamma, budget=args.budget,
                                seed=args.seed, params=params)
    else:
        seq = model_seq(*common, _SEQ_KINDS[args.type], params=params,
                        master_seed=args.seed, gamma=args.gamma)
    os.makedirs(args.out, exist_ok=True)
    write_trace(seq, os.path.join(args.out, f"trace_{args.type}.csv"))
    schedule = seq.schedule(profile)
    write_schedule(schedule, os.path.join(args.out, f"schedule_{args.type}.csv"))
    sys.stdout.write(schedule_to_text(schedule))
    return 0


def _cmd_lookup(args):
    schedule = read_schedule(args.schedule)
    rec = best_under_budget(schedule, args.budget)
    variables = ";".join(str(i) for i in sorted(rec.variables))
    print(f"cost={rec.cost!r} val_accuracy={rec.val_accuracy!r} "
          f"variables={variables} source={rec.source.value}")
    return 0


def _cmd_oracle(args):
    _, _, _, profile, parts = _load_problem(args)
    params = ForestParams(n_trees=args.trees, mtry=args.mtry)
    schedule, space = exhaustive_schedule(
        parts["X_tr"], parts["y_tr"], parts["X_val"], parts["y_val"],
        profile, params=params, master_seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    write_schedule(schedule, os.path.join(args.out, "oracle_schedule.csv"))
    write_solution_space(space, os.path.join(args.out, "solution_space.csv"))
    sys.stdout.write(schedule_to_text(schedule))
    return 0


def _cmd_compare(args):
    _, _, _, profile, parts = _load_problem(args)
    ens = run_ensemble(parts["X_tr"], parts["y_tr"], parts["X_val"],
                       parts["y_val"], profile, _ensemble_config(args),
                       X_te=parts["X_te"], y_te=parts["y_te"])
    base = logistic_path_schedule(
        parts["X_tr"], parts["y_tr"], parts["X_val"], parts["y_val"], profile,
        n_lambda=args.n_lambda, X_te=parts["X_te"], y_te=parts["y_te"])
    os.makedirs(args.out, exist_ok=True)
    write_schedule(ens.schedule,
                   os.path.join(args.out, f"schedule_{METHOD_ENSEMBLE}.csv"))
    write_schedule(base,
                   os.path.join(args.out, f"schedule_{METHOD_L1_BASELINE}.csv"))
    n_visited = len(ens.visited_subsets)
    print(f"ensemble: {len(ens.schedule)} records from {n_visited} visited "
          f"subsets; baseline: {len(base)} records")
    return 0


def _cmd_experiment(args):
    X, y, _, _ = load_dataset_csv(args.data, label_column=args.label_col)
    lo, hi = _parse_range(args.cost_range)
    config = ExperimentConfig(
        runs=args.runs, cost_lo=lo, cost_hi=hi, seed=args.seed,
        n_trees=args.trees, mtry=args.mtry, gamma=args.gamma,
        n_lambda=args.n_lambda, span=args.span)
    result = run_experiment(X, y, config)
    written = emit_outputs(result, args.out, span=args.span)
    for run_id, message in result.errors:
        print(f"run {run_id} failed: {message}", file=sys.stderr)
    print(f"wrote {len(written)} files to {args.out} "
          f"({len(result.errors)} failed runs)")
    return 0 if not result.errors else 3


_COMMANDS = {
    "synth": _cmd_synth,
    "costs": _cmd_costs,
    "schedule": _cmd_schedule,
    "sequence": _cmd_sequence,
    "lookup": _cmd_lookup,
    "oracle": _cmd_oracle,
    "compare": _cmd_compare,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (DataError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except (ComputationError, CostschedError) as e:
        print(f"computation error: {e}", file=sys.stderr)
        return 3


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
