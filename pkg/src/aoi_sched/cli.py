"""Command line entry point: ``aoi-sched run | verify | summarize``.

Exit codes: 0 ok, 1 config error, 2 runtime error, 3 the oracle found an
objective-level dominance violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path

from .engine import ConfigError
from .experiment import (ExperimentConfig, config_from_dict, load_config, read_comparison,
                         run_experiment)
from .metrics import SUMMARY_FIELDS

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VIOLATION = 0, 1, 2, 3

log = logging.getLogger("aoi_sched")


def _int_list(text: str):
    return [int(x) for x in text.split(",") if x.strip()]


def _seeds(text: str):
    """``5`` means seeds 1..5; ``3,7,11`` is an explicit list."""
    return int(text) if "," not in text else _int_list(text)


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("AOI_SCHED_JOBS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aoi-sched", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="sweep policies x horizons x seeds")
    r.add_argument("--config", help="JSON config; missing fields take the defaults")
    r.add_argument("--policy", action="append", help="policy name (repeatable): hlfd, hlf, edf, llf")
    r.add_argument("--horizon", action="append", type=int, help="horizon T in slots (repeatable)")
    r.add_argument("--seeds", type=_seeds, help="seed count n (seeds 1..n) or comma list")
    r.add_argument("--output", help="output directory")
    r.add_argument("--no-traces", action="store_true", help="skip per-run trace CSVs")
    r.add_argument("--no-plots", action="store_true", help="skip SVG charts")
    r.add_argument("--jobs", type=int, default=_default_jobs(),
                   help="parallel worker processes (default: $AOI_SCHED_JOBS or 1)")

    v = sub.add_parser("verify", help="exhaustive HLF-D optimality check on random tiny instances")
    v.add_argument("--instances", type=int, default=200)
    v.add_argument("--max-m", type=int, default=3)
    v.add_argument("--max-t", type=int, default=7)
    v.add_argument("--p", type=lambda s: [float(x) for x in s.split(",")], default=[0.5, 0.8, 1.0],
                   help="comma list of channel ON probabilities to sample from")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--shared-tables", action="store_true",
                   help="give every flow-line the same setup/window/reset tables")
    v.add_argument("--output", help="write the JSON report here instead of stdout")

    s = sub.add_parser("summarize", help="print comparison.csv and re-render the charts")
    s.add_argument("directory", help="output directory of a previous run")
    s.add_argument("--no-plots", action="store_true")
    return ap


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = cfg.to_dict()
    if args.policy:
        overrides["policies"] = args.policy
    if args.horizon:
        overrides["horizons"] = args.horizon
    if args.seeds is not None:
        overrides["seeds"] = args.seeds
    if args.output:
        overrides["output_dir"] = args.output
    if args.no_traces:
        overrides["emit_traces"] = False
    if args.no_plots:
        overrides["emit_plots"] = False
    cfg = config_from_dict(overrides)
    paths = run_experiment(cfg, jobs=max(1, args.jobs))
    _print_table(read_comparison(paths["comparison"]))
    for name, p in sorted(paths.items()):
        log.info("%s: %s", name, p)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .oracle import random_instance, verify_dominance

    if args.max_m < 1 or args.max_t < 1:
        raise ConfigError("max-m/max-t", "must be positive")
    rng = random.Random(args.seed)
    lo_m = min(2, args.max_m)
    lo_t = min(4, args.max_t)
    reports = []
    for _ in range(args.instances):
        m = rng.randint(lo_m, args.max_m)
        t = rng.randint(lo_t, args.max_t)
        p = rng.choice(args.p)
        inst = random_instance(rng, m, t, p, shared_tables=args.shared_tables)
        reports.append(verify_dominance(inst).to_dict())
    objective = sum(not r["dominant"] for r in reports)
    per_slot = sum(not r["per_slot_dominance"] for r in reports)
    out = {
        "instances": len(reports),
        "objective_violations": objective,
        "per_slot_violations": per_slot,
        "reports": reports,
    }
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(f"instances={len(reports)} objective_violations={objective} "
              f"per_slot_violations={per_slot} report={args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_VIOLATION if objective else EXIT_OK


def _print_table(rows) -> None:
    cols = ["policy", "horizon", "n"] + [f"{f}_mean" for f in SUMMARY_FIELDS]
    print("\t".join(cols))
    for r in rows:
        print("\t".join(
            str(r[c]) if not isinstance(r[c], float) else f"{r[c]:.6g}" for c in cols))


def _cmd_summarize(args) -> int:
    d = Path(args.directory)
    comp = d / "comparison.csv"
    if not comp.is_file():
        raise ConfigError("directory", f"{comp} not found")
    rows = read_comparison(comp)
    _print_table(rows)
    if not args.no_plots:
        from .plotting import render_charts

        for p in render_charts(comp, d).values():
            log.info("wrote %s", p)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "verify": _cmd_verify, "summarize": _cmd_summarize}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
