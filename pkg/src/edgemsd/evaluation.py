"""Scoring detected source sets and running Monte-Carlo experiments.

Random streams are derived with :func:`edgemsd.diffusion.make_rng` from the
master seed and a spawn key, so every replicate is reproducible on its own:

* seed selection and spread, attempt ``a`` of replicate ``r`` for source count
  ``k`` on network ``i``: key ``(i, k, r, a)``
* clusterer randomness for method ``j`` in that replicate: key ``(i, k, r, 1000 + j)``
"""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .diffusion import DiffusionConfig, make_rng, select_seeds, simulate
from .errors import ConfigError, MSDError
from .graph import Graph, bfs_distances, load_edge_list
from .msd import detect

log = logging.getLogger(__name__)

METHODS = ("link", "louvain", "eigen")
# accepted in configs; "link-fixed" is link communities without the share-based noise floor
ALL_METHODS = METHODS + ("link-fixed",)
MAX_ATTEMPTS = 20
REPLICATE_COLUMNS = (
    "network", "method", "K", "replicate", "f1", "precision", "recall",
    "k_detected", "runtime_ms", "error_distance",
)
SUMMARY_COLUMNS = ("network", "method", "K", "n", "f1_mean", "f1_sd", "k_detected_mean", "runtime_ms_mean")


@dataclass(frozen=True)
class EvalResult:
    precision: float
    recall: float
    f1: float


def f1_score(detected: Iterable, truth: Iterable) -> EvalResult:
    """Set-based precision, recall and F1 of ``detected`` against ``truth``."""
    detected, truth = set(detected), set(truth)
    if not truth:
        raise ValueError("true source set is empty")
    hits = len(detected & truth)
    precision = hits / len(detected) if detected else 0.0
    recall = hits / len(truth)
    f1 = 2 * precision * recall / (precision + recall) if hits else 0.0
    return EvalResult(precision, recall, f1)


def error_distance(g: Graph, detected: Iterable[int], truth: Iterable[int]) -> float:
    """Mean hop distance from each detected node to its nearest true source."""
    detected = sorted(set(detected))
    if not detected:
        return math.nan
    dist = bfs_distances(g, truth)
    return float(np.mean(dist[detected]))


@dataclass
class ExperimentConfig:
    networks: list  # [{"name": ..., "edge_list_path": ...}]
    k_values: list = field(default_factory=lambda: [1, 3, 5])
    replicates: int = 200
    infection_prob: float = 0.2
    target_fraction: float = 0.10
    methods: list = field(default_factory=lambda: list(METHODS))
    alpha: float = 0.5
    min_cluster_size: int = 3
    master_seed: int = 0
    output_dir: str = "results"
    threads: int | None = None
    timing: bool = True

    def validate(self, check_paths: bool = True) -> None:
        problems = []
        if not self.networks:
            problems.append("networks: at least one network is required")
        for i, net in enumerate(self.networks):
            if not isinstance(net, dict) or "name" not in net or "edge_list_path" not in net:
                problems.append(f"networks[{i}]: needs 'name' and 'edge_list_path'")
            elif check_paths and not os.path.isfile(net["edge_list_path"]):
                problems.append(f"networks[{i}]: no such file {net['edge_list_path']!r}")
        names = [n.get("name") for n in self.networks if isinstance(n, dict)]
        if len(set(names)) != len(names):
            problems.append("networks: names must be unique")
        if not self.k_values or any(not isinstance(k, int) or k < 1 for k in self.k_values):
            problems.append("k_values: need a non-empty list of integers >= 1")
        if not isinstance(self.replicates, int) or self.replicates < 1:
            problems.append("replicates: must be an integer >= 1")
        if not 0.0 <= self.infection_prob <= 1.0:
            problems.append("infection_prob: must lie in [0, 1]")
        if not 0.0 < self.target_fraction <= 1.0:
            problems.append("target_fraction: must lie in (0, 1]")
        bad = [m for m in self.methods if m not in ALL_METHODS]
        if not self.methods or bad or len(set(self.methods)) != len(self.methods):
            problems.append(f"methods: must be a non-empty list of distinct names from {list(ALL_METHODS)}")
        if not 0.0 < self.alpha < 1.0:
            problems.append("alpha: must lie strictly between 0 and 1")
        if not isinstance(self.min_cluster_size, int) or self.min_cluster_size < 1:
            problems.append("min_cluster_size: must be an integer >= 1")
        if self.threads is not None and self.threads < 1:
            problems.append("threads: must be >= 1")
        if problems:
            raise ConfigError(problems)


@dataclass
class ExperimentSummary:
    rows: list  # replicate-level dicts, REPLICATE_COLUMNS
    summary: list  # per-cell dicts, SUMMARY_COLUMNS
    resampled: int = 0
    failures: list = field(default_factory=list)  # (network, K, replicate, method, message)

    def write(self, output_dir: str) -> tuple[str, str]:
        os.makedirs(output_dir, exist_ok=True)
        rep_path = os.path.join(output_dir, "replicates.csv")
        sum_path = os.path.join(output_dir, "summary.csv")
        _write_csv(rep_path, REPLICATE_COLUMNS, self.rows)
        _write_csv(sum_path, SUMMARY_COLUMNS, self.summary)
        return rep_path, sum_path

    def cell(self, network: str, method: str, k: int) -> dict:
        for row in self.summary:
            if (row["network"], row["method"], row["K"]) == (network, method, k):
                return row
        raise KeyError((network, method, k))


def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(round(value, 10))
    return str(value)


def _write_csv(path: str, columns: Sequence[str], rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def run_replicate(
    g: Graph,
    net_idx: int,
    network: str,
    k: int,
    replicate: int,
    cfg: ExperimentConfig,
) -> tuple[list, list, int]:
    """Simulate one snapshot and score every method on it.

    Returns ``(rows, failures, resample_count)``. Snapshots that never pass
    the infection threshold are redrawn with the next attempt index, up to
    ``MAX_ATTEMPTS`` times.
    """
    dcfg = DiffusionConfig(cfg.infection_prob, cfg.target_fraction, seed=cfg.master_seed)
    outcome = None
    for attempt in range(MAX_ATTEMPTS):
        rng = make_rng(cfg.master_seed, net_idx, k, replicate, attempt)
        seeds = select_seeds(g, k, rng)
        outcome = simulate(g, seeds, dcfg, rng)
        if outcome.hit_target:
            break
    else:
        msg = f"threshold not reached in {MAX_ATTEMPTS} attempts"
        return [], [(network, k, replicate, m, msg) for m in cfg.methods], MAX_ATTEMPTS
    resampled = attempt
    rows, failures = [], []
    for method in cfg.methods:
        method_idx = ALL_METHODS.index(method)
        rng = make_rng(cfg.master_seed, net_idx, k, replicate, 1000 + method_idx)
        start = time.perf_counter()
        try:
            res = detect(
                g, outcome.infected, clusterer=method, alpha=cfg.alpha,
                min_cluster_size=cfg.min_cluster_size, rng=rng,
            )
        except MSDError as exc:
            log.warning("%s K=%d rep=%d %s: %s", network, k, replicate, method, exc)
            failures.append((network, k, replicate, method, str(exc)))
            continue
        elapsed = (time.perf_counter() - start) * 1000.0 if cfg.timing else 0.0
        ev = f1_score(res.detected_sources, outcome.seeds)
        rows.append(
            {
                "network": network, "method": method, "K": k, "replicate": replicate,
                "f1": ev.f1, "precision": ev.precision, "recall": ev.recall,
                "k_detected": res.k_detected, "runtime_ms": round(elapsed, 3),
                "error_distance": error_distance(g, res.detected_sources, outcome.seeds),
            }
        )
    return rows, failures, resampled


_WORKER_GRAPHS: dict = {}


def _init_worker(graphs):
    _WORKER_GRAPHS.clear()
    _WORKER_GRAPHS.update(graphs)


def _run_task(task):
    net_idx, network, k, replicate, cfg = task
    return run_replicate(_WORKER_GRAPHS[network], net_idx, network, k, replicate, cfg)


def summarize(rows: list, cfg: ExperimentConfig, names: Sequence[str]) -> list:
    out = []
    for network in names:
        for method in cfg.methods:
            for k in cfg.k_values:
                cell = [r for r in rows if (r["network"], r["method"], r["K"]) == (network, method, k)]
                f1 = np.array([r["f1"] for r in cell], dtype=np.float64)
                n = len(cell)
                out.append(
                    {
                        "network": network, "method": method, "K": k, "n": n,
                        "f1_mean": float(np.mean(f1)) if n else math.nan,
                        "f1_sd": float(np.std(f1, ddof=1)) if n > 1 else math.nan,
                        "k_detected_mean": float(np.mean([r["k_detected"] for r in cell])) if n else math.nan,
                        "runtime_ms_mean": float(np.mean([r["runtime_ms"] for r in cell])) if n else math.nan,
                    }
                )
    return out


def run_experiment(cfg: ExperimentConfig, graphs: dict | None = None, progress=None) -> ExperimentSummary:
    """Run every (network, K, replicate) cell and aggregate per method.

    ``graphs`` maps network names to already-loaded graphs; missing ones are
    read from their edge-list paths. Cells run in a process pool of
    ``cfg.threads`` workers (all cores when None); results are gathered in
    cell order, so the output does not depend on scheduling.
    """
    cfg.validate(check_paths=graphs is None)
    graphs = dict(graphs or {})
    names = [net["name"] for net in cfg.networks]
    for net in cfg.networks:
        if net["name"] not in graphs:
            graphs[net["name"]] = load_edge_list(net["edge_list_path"])
    tasks = [
        (i, name, k, r, cfg)
        for i, name in enumerate(names)
        for k in cfg.k_values
        for r in range(cfg.replicates)
    ]
    workers = cfg.threads or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(graphs,)) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (workers * 8))))
    else:
        _init_worker(graphs)
        results = []
        for t in tasks:
            results.append(_run_task(t))
            if progress is not None:
                progress(len(results), len(tasks))
    rows, failures, resampled = [], [], 0
    for r_rows, r_fail, r_res in results:
        rows.extend(r_rows)
        failures.extend(r_fail)
        resampled += r_res
    order = {m: j for j, m in enumerate(cfg.methods)}
    rows.sort(key=lambda r: (names.index(r["network"]), order[r["method"]], r["K"], r["replicate"]))
    return ExperimentSummary(rows, summarize(rows, cfg, names), resampled, failures)
