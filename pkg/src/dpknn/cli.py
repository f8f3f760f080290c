"""Command-line front end: synth, run, sweep, account, index, baseline.

Every subcommand exits 0 on success.  Invariant violations and malformed
inputs exit nonzero after printing a one-line machine-readable JSON error to
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .accounting import DpParams, LedgerInvariantError, budget_for_dp, rdp_to_dp
from .data import (
    DEFAULT_SEPARATION,
    DEFAULT_SPREAD,
    DataFormatError,
    generate_synthetic,
    write_features,
    write_labels,
)
from .experiment import SpecError, load_spec_data, parse_spec, run_experiment, sweep
from .kernels import IngestionError
from .lsh import build_index


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from None


def _apply_overrides(document: dict, args) -> dict:
    if args.seed is not None:
        document["seed"] = args.seed
    if getattr(args, "mode", None):
        document["mode"] = args.mode
    if getattr(args, "reuse", None):
        document["reuse"] = args.reuse == "on"
    return document


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _cmd_synth(args) -> int:
    data = generate_synthetic(
        num_classes=args.classes,
        size=args.size,
        dim=args.dim,
        separation=args.separation,
        spread=args.spread,
        num_queries=args.queries,
        seed=args.seed if args.seed is not None else 0,
    )
    prefix = args.out
    write_features(f"{prefix}.features.ikn", data.features)
    write_labels(f"{prefix}.labels.ikl", data.labels, args.classes)
    write_features(f"{prefix}.queries.ikn", data.query_features)
    write_labels(f"{prefix}.query_labels.ikl", data.query_labels, args.classes)
    sys.stdout.write(
        json.dumps(
            {
                "written": [
                    f"{prefix}.features.ikn",
                    f"{prefix}.labels.ikl",
                    f"{prefix}.queries.ikn",
                    f"{prefix}.query_labels.ikl",
                ],
                "classes": args.classes,
                "size": args.size,
                "dim": args.dim,
            },
            indent=2,
        )
        + "\n"
    )
    return 0


def _cmd_run(args, forced_mode: str | None = None) -> int:
    document = _apply_overrides(_load_config(args.config), args)
    if forced_mode is not None:
        document["mode"] = forced_mode
    report = run_experiment(document, out=args.out)
    sys.stdout.write(report.to_json())
    return 0


def _cmd_sweep(args) -> int:
    document = _apply_overrides(_load_config(args.config), args)
    epsilons = None
    if args.epsilons:
        epsilons = [float(e) for e in args.epsilons.split(",")]
    _emit(sweep(document, epsilons=epsilons), args.out)
    return 0


def _cmd_account(args) -> int:
    if args.budget is not None:
        epsilon = rdp_to_dp(args.budget, args.delta)
        payload = {"budget": args.budget, "delta": args.delta, "epsilon": epsilon}
    else:
        budget = budget_for_dp(DpParams(args.epsilon, args.delta))
        payload = {
            "epsilon_target": args.epsilon,
            "delta": args.delta,
            "budget": budget,
            "epsilon_converted": rdp_to_dp(budget, args.delta),
        }
    _emit(payload, args.out)
    return 0


def _cmd_index(args) -> int:
    document = _apply_overrides(_load_config(args.config), args)
    spec = parse_spec(document)
    loaded = load_spec_data(spec)
    from .engine import ExampleStore

    store = ExampleStore(loaded.features, loaded.labels, loaded.num_classes, spec.engine_config())
    index_doc = spec.index or {}
    tables = args.tables or int(index_doc.get("tables", 30))
    bits = args.bits or int(index_doc.get("bits", 8))
    index = build_index(store, tables, bits, int(index_doc.get("seed", spec.seed)))
    occupancy = index.occupancy()
    sizes = [table["buckets"] for table in occupancy]
    _emit(
        {
            "examples": int(store.size),
            "tables": tables,
            "bits": bits,
            "buckets_per_table": {
                "min": int(np.min(sizes)),
                "median": float(np.median(sizes)),
                "max": int(np.max(sizes)),
            },
            "per_table": occupancy,
        },
        args.out,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpknn",
        description="Differentially private nearest-neighbor prediction experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic dataset on the unit sphere")
    synth.add_argument("--classes", type=int, default=3)
    synth.add_argument("--size", type=int, default=6000)
    synth.add_argument("--dim", type=int, default=16)
    synth.add_argument("--separation", type=float, default=DEFAULT_SEPARATION)
    synth.add_argument("--spread", type=float, default=DEFAULT_SPREAD)
    synth.add_argument("--queries", type=int, default=2400)
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--out", required=True, help="output path prefix")
    synth.set_defaults(handler=_cmd_synth)

    def add_run_flags(p, with_mode=True):
        p.add_argument("--config", required=True, help="experiment spec JSON")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        if with_mode:
            p.add_argument("--mode", choices=["exact", "hashed", "baseline"], default=None)
            p.add_argument("--reuse", choices=["on", "off"], default=None)

    run = sub.add_parser("run", help="run an experiment spec and write its report")
    add_run_flags(run)
    run.set_defaults(handler=_cmd_run)

    swp = sub.add_parser("sweep", help="two-stage (sigma_vote, threshold) search")
    add_run_flags(swp, with_mode=False)
    swp.add_argument("--epsilons", default=None, help="comma-separated targets, e.g. 0.5,1,2")
    swp.set_defaults(handler=_cmd_sweep)

    account = sub.add_parser("account", help="convert between budgets and (epsilon, delta)")
    account.add_argument("--epsilon", type=float, default=None)
    account.add_argument("--delta", type=float, required=True)
    account.add_argument("--budget", type=float, default=None)
    account.add_argument("--out", default=None)
    account.set_defaults(handler=_cmd_account)

    index = sub.add_parser("index", help="build an LSH index and report bucket occupancy")
    add_run_flags(index, with_mode=False)
    index.add_argument("--tables", type=int, default=None)
    index.add_argument("--bits", type=int, default=None)
    index.set_defaults(handler=_cmd_index)

    baseline = sub.add_parser("baseline", help="run the naive private kNN baseline")
    add_run_flags(baseline, with_mode=False)
    baseline.set_defaults(handler=lambda args: _cmd_run(args, forced_mode="baseline"))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "account" and args.epsilon is None and args.budget is None:
        parser.error("account needs --epsilon or --budget")
    try:
        return args.handler(args)
    except (SpecError, DataFormatError, IngestionError, LedgerInvariantError, ValueError, OSError) as exc:
        sys.stderr.write(
            json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
