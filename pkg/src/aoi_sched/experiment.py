"""Policy x horizon x seed sweeps and their on-disk artifacts."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import ConfigError, SimConfig, run, write_trace_csv
from .metrics import SUMMARY_FIELDS, RunSummary, aggregate, summarize
from .policies import PolicyId

log = logging.getLogger(__name__)

SLOT_DURATION_MS = 10  # recorded in outputs only
DEFAULT_HORIZONS = tuple(range(100, 1001, 100))


@dataclass
class ExperimentConfig:
    num_sensors: int = 16
    horizons: List[int] = field(default_factory=lambda: list(DEFAULT_HORIZONS))
    seeds: List[int] = field(default_factory=lambda: list(range(1, 201)))
    p_on: float = 0.8
    setup_range: Tuple[int, int] = (1, 25)
    window_range: Tuple[int, int] = (1, 20)
    reset_range: Tuple[int, int] = (1, 10)
    d_max: int = 20
    alpha: float = 1.0
    k_const: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    policies: List[PolicyId] = field(default_factory=lambda: list(PolicyId))
    output_dir: str = "results"
    emit_traces: bool = True
    emit_plots: bool = True

    def __post_init__(self):
        self.seeds = expand_seeds(self.seeds)
        if isinstance(self.horizons, int):
            self.horizons = [self.horizons]
        if not self.horizons:
            raise ConfigError("horizons", "at least one horizon is required")
        try:
            self.policies = [p if isinstance(p, PolicyId) else PolicyId(str(p).lower())
                             for p in self.policies]
        except ValueError as exc:
            raise ConfigError("policies", str(exc)) from None
        if not self.policies:
            raise ConfigError("policies", "at least one policy is required")
        for t in self.horizons:
            self.sim_config(t)  # validates every shared field
        for name in ("setup_range", "window_range", "reset_range"):
            setattr(self, name, tuple(int(x) for x in getattr(self, name)))

    def sim_config(self, horizon: int) -> SimConfig:
        return SimConfig(
            num_sensors=self.num_sensors, horizon=horizon, p_on=self.p_on,
            setup_range=self.setup_range, window_range=self.window_range,
            reset_range=self.reset_range, d_max=self.d_max, alpha=self.alpha,
            k_const=self.k_const, beta=self.beta, gamma=self.gamma,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["policies"] = [p.value for p in self.policies]
        for name in ("setup_range", "window_range", "reset_range"):
            d[name] = list(getattr(self, name))
        return d


def expand_seeds(seeds) -> List[int]:
    """A count ``n`` means seeds ``1..n``; a list is taken as is."""
    if isinstance(seeds, bool):
        raise ConfigError("seeds", "expected a count or a list of integers")
    if isinstance(seeds, int):
        if seeds < 1:
            raise ConfigError("seeds", f"count must be >= 1, got {seeds}")
        return list(range(1, seeds + 1))
    try:
        out = [int(s) for s in seeds]
    except (TypeError, ValueError):
        raise ConfigError("seeds", f"expected a count or a list of integers, got {seeds!r}") from None
    if not out:
        raise ConfigError("seeds", "empty seed list")
    return out


_ALIASES = {"M": "num_sensors", "p": "p_on", "k": "k_const", "D_max": "d_max"}


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, value in data.items():
        name = _ALIASES.get(key, key)
        if name not in known:
            raise ConfigError(key, "unknown field")
        kwargs[name] = value
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("<config>", str(exc)) from None


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"no such file: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"malformed JSON in {p}: {exc}") from None
    return config_from_dict(data)


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_name(policy: str, horizon: int, seed: int) -> str:
    return f"trace_{policy}_T{horizon}_seed{seed}.csv"


def _run_cell(args) -> dict:
    sim_dict, policy, seed, trace_path = args
    cfg = SimConfig(**sim_dict)
    trace = run(cfg, policy, seed)
    if trace_path is not None:
        buf = io.StringIO()
        write_trace_csv(trace, buf)
        _atomic_write(Path(trace_path), buf.getvalue())
    return summarize(trace).to_dict()


def run_cells(config: ExperimentConfig, jobs: int = 1,
              trace_dir: Optional[Path] = None) -> List[dict]:
    """Run every (policy, horizon, seed) cell; returns one row per run."""
    tasks = []
    keys = []
    for pol in config.policies:
        for t in config.horizons:
            sim = config.sim_config(t).to_dict()
            for seed in config.seeds:
                tp = str(trace_dir / trace_name(pol.value, t, seed)) if trace_dir else None
                tasks.append((sim, pol.value, seed, tp))
                keys.append((pol.value, t, seed))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=8))
    else:
        results = [_run_cell(t) for t in tasks]
    return [{"policy": p, "horizon": t, "seed": s, **r} for (p, t, s), r in zip(keys, results)]


def cell_stats(runs: Sequence[dict]) -> List[dict]:
    """Aggregate run rows per (policy, horizon), keeping first-seen order."""
    groups: Dict[Tuple[str, int], List[RunSummary]] = {}
    for r in runs:
        groups.setdefault((r["policy"], r["horizon"]), []).append(
            RunSummary(**{f: r[f] for f in SUMMARY_FIELDS}))
    cells = []
    for (pol, t), sums in groups.items():
        agg = aggregate(sums)
        cells.append({"policy": pol, "horizon": t, **agg.to_dict()})
    return cells


COMPARISON_COLUMNS = ("policy", "horizon", "n") + tuple(
    f"{f}_{stat}" for f in SUMMARY_FIELDS for stat in ("mean", "std"))


def comparison_csv(cells: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_COLUMNS)
    for c in cells:
        row = [c["policy"], c["horizon"], c["n"]]
        for f in SUMMARY_FIELDS:
            std = c["std"][f]
            row += [repr(c["mean"][f]), "" if std is None else repr(std)]
        w.writerow(row)
    return buf.getvalue()


def read_comparison(path) -> List[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["horizon"] = int(r["horizon"])
        r["n"] = int(r["n"])
        for f in SUMMARY_FIELDS:
            for stat in ("mean", "std"):
                key = f"{f}_{stat}"
                r[key] = float(r[key]) if r[key] != "" else None
    return rows


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> Dict[str, Path]:
    """Run the sweep and write summary.json, comparison.csv, traces and charts.

    Files this call created are removed again if anything fails.
    """
    out = Path(config.output_dir)
    created: List[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output_dir {out} is not writable: {exc}") from exc
    trace_dir = out / "traces" if config.emit_traces else None
    existing = set(trace_dir.iterdir()) if trace_dir and trace_dir.exists() else set()
    made_trace_dir = False
    try:
        if trace_dir is not None and not trace_dir.exists():
            trace_dir.mkdir()
            made_trace_dir = True
        log.info("running %d cells", len(config.policies) * len(config.horizons) * len(config.seeds))
        runs = run_cells(config, jobs, trace_dir)
        cells = cell_stats(runs)
        summary = {
            "metadata": {"slot_duration_ms": SLOT_DURATION_MS, "config": config.to_dict()},
            "cells": cells,
            "runs": runs,
        }
        paths = {"summary": out / "summary.json", "comparison": out / "comparison.csv"}
        _atomic_write(paths["summary"], json.dumps(summary, indent=2, sort_keys=True) + "\n")
        created.append(paths["summary"])
        _atomic_write(paths["comparison"], comparison_csv(cells))
        created.append(paths["comparison"])
        if config.emit_plots:
            from .plotting import render_charts

            charts = render_charts(paths["comparison"], out)
            created.extend(charts.values())
            paths.update(charts)
        if trace_dir is not None:
            paths["traces"] = trace_dir
        return paths
    except BaseException:
        for p in created:
            p.unlink(missing_ok=True)
        if trace_dir is not None and trace_dir.exists():
            for p in trace_dir.iterdir():
                if p not in existing:
                    p.unlink(missing_ok=True)
            if made_trace_dir:
                trace_dir.rmdir()
        raise
