"""Command-line front end: ``edgemsd {stats,simulate,detect,experiment,generate}``.

Errors are reported as one JSON object per line on stderr
(``{"error": ..., "stage": ...}``) and map to stage-specific exit codes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys

from . import __version__
from .clustering import EdgeClusterAssignment
from .diffusion import DiffusionConfig, dump_snapshot, load_snapshot, make_rng, select_seeds, simulate
from .errors import ConfigError, MSDError
from .evaluation import ALL_METHODS, SUMMARY_COLUMNS, ExperimentConfig, run_experiment
from .graph import load_edge_list, stats, write_edge_list
from .msd import DEFAULT_ALPHA, detect
from .synthetic import SCHOOL_SIZES, school_network

EXIT_CODES = {
    "input": 3,
    "config": 3,
    "graph": 4,
    "diffusion": 5,
    "clustering": 6,
    "membership": 6,
    "ages": 7,
    "labels": 7,
    "propagation": 8,
    "identification": 9,
    "experiment": 10,
}


class CLIError(Exception):
    def __init__(self, message, stage="input"):
        super().__init__(message)
        self.stage = stage


def _report(message: str, stage: str) -> int:
    sys.stderr.write(json.dumps({"error": message, "stage": stage}) + "\n")
    return EXIT_CODES.get(stage, 1)


def _env_seed(default: int) -> int:
    raw = os.environ.get("MSD_SEED")
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise CLIError(f"MSD_SEED must be an integer, got {raw!r}", "config") from None


def _load_graph(args):
    try:
        return load_edge_list(args.edge_list, comment=args.comment, delimiter=args.delimiter)
    except OSError as exc:
        raise CLIError(f"cannot read {args.edge_list}: {exc.strerror or exc}") from exc


def _open_out(path):
    return sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8")


def cmd_stats(args) -> int:
    g = _load_graph(args)
    st = stats(g, edge_count=args.edge_count)
    print(json.dumps(st.to_dict(rounded=not args.raw)))
    return 0


def cmd_simulate(args) -> int:
    g = _load_graph(args)
    seed = _env_seed(args.seed)
    cfg = DiffusionConfig(args.p, args.fraction, args.max_steps, seed)
    rng = make_rng(seed)
    if args.seed_nodes:
        seeds = g.lookup(args.seed_nodes.split(","))
    else:
        seeds = select_seeds(g, args.k, rng)
    outcome = simulate(g, seeds, cfg, rng)
    out = _open_out(args.output)
    try:
        dump_snapshot(outcome, g, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _dump_clusters(path, g, ext, assignment) -> None:
    sub = ext.infected_subnetwork
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if isinstance(assignment, EdgeClusterAssignment):
            writer.writerow(["edge_src", "edge_dst", "cluster"])
            for (i, j), c in zip(sub.edge_list.tolist(), assignment.labels.tolist()):
                writer.writerow([g.labels[sub.nodes[i]], g.labels[sub.nodes[j]], c])
        else:
            writer.writerow(["node", "cluster"])
            for i, c in enumerate(assignment.labels.tolist()):
                writer.writerow([g.labels[sub.nodes[i]], c])


def cmd_detect(args) -> int:
    from .graph import extended_network

    g = _load_graph(args)
    try:
        with open(args.snapshot, encoding="utf-8") as fh:
            snap = load_snapshot(fh, g)
    except OSError as exc:
        raise CLIError(f"cannot read {args.snapshot}: {exc.strerror or exc}") from exc
    except MSDError as exc:
        raise CLIError(str(exc)) from exc
    rng = make_rng(_env_seed(args.seed))
    result = detect(
        g, snap.infected, clusterer=args.clusterer, alpha=args.alpha, tol=args.tol,
        min_cluster_size=args.min_cluster_size, rng=rng, solver=args.solver,
    )
    if args.clusters_out:
        _dump_clusters(args.clusters_out, g, extended_network(g, snap.infected), result.assignment)
    out = _open_out(args.output)
    try:
        json.dump(result.to_json(g), out, indent=2)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def load_config(path: str) -> ExperimentConfig:
    """Read an experiment config; relative paths resolve against the config's directory."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    problems = [f"unknown field {key!r}" for key in sorted(set(data) - _CONFIG_FIELDS)]
    base = os.path.dirname(os.path.abspath(path))
    networks = data.get("networks", [])
    if isinstance(networks, list):
        fixed = []
        for net in networks:
            if isinstance(net, dict) and isinstance(net.get("edge_list_path"), str):
                net = dict(net, edge_list_path=os.path.join(base, net["edge_list_path"]))
            fixed.append(net)
        data["networks"] = fixed
    else:
        problems.append("networks must be a list")
        data["networks"] = []
    if "output_dir" in data and isinstance(data["output_dir"], str):
        data["output_dir"] = os.path.join(base, data["output_dir"])
    cfg = ExperimentConfig(**{k: v for k, v in data.items() if k in _CONFIG_FIELDS})
    try:
        cfg.validate()
    except ConfigError as exc:
        problems.extend(exc.problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    cfg.master_seed = _env_seed(cfg.master_seed)
    if args.threads is not None:
        cfg.threads = args.threads
    if args.no_timing:
        cfg.timing = False
    if args.output_dir:
        cfg.output_dir = args.output_dir
    result = run_experiment(cfg)
    rep_path, sum_path = result.write(cfg.output_dir)
    widths = [12, 10, 3, 5, 8, 8, 15, 15]
    print("".join(c.ljust(w) for c, w in zip(SUMMARY_COLUMNS, widths)))
    for row in result.summary:
        cells = [row["network"], row["method"], row["K"], row["n"], f"{row['f1_mean']:.3f}",
                 f"{row['f1_sd']:.3f}", f"{row['k_detected_mean']:.2f}", f"{row['runtime_ms_mean']:.1f}"]
        print("".join(str(c).ljust(w) for c, w in zip(cells, widths)))
    print(f"wrote {rep_path} and {sum_path}; {result.resampled} snapshots resampled")
    if result.failures:
        for net, k, rep, method, msg in result.failures:
            sys.stderr.write(json.dumps({"error": msg, "stage": "experiment", "network": net, "K": k,
                                         "replicate": rep, "method": method}) + "\n")
        return EXIT_CODES["experiment"]
    return 0


def cmd_generate(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    seed = _env_seed(args.seed)
    networks = []
    for i, (name, n, m) in enumerate(SCHOOL_SIZES):
        g = school_network(n, m, make_rng(seed, i))
        path = os.path.join(args.out_dir, f"{name}.txt")
        with open(path, "w", encoding="utf-8") as fh:
            write_edge_list(g, fh)
        networks.append({"name": name, "edge_list_path": f"{name}.txt"})
    with open(os.path.join(args.out_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump({"networks": networks, "output_dir": "results"}, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(networks)} networks and config.json to {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgemsd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_args(p):
        p.add_argument("edge_list", help="edge-list file, two node labels per line")
        p.add_argument("--comment", default="#", help="comment line prefix (default: #)")
        p.add_argument("--delimiter", default=None, help="field delimiter (default: whitespace)")

    p = sub.add_parser("stats", help="print node/edge counts, mean degree and density as JSON")
    graph_args(p)
    p.add_argument("--edge-count", choices=("undirected", "arcs"), default="undirected")
    p.add_argument("--raw", action="store_true", help="full precision instead of table rounding")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("simulate", help="simulate a spread and write a snapshot JSON")
    graph_args(p)
    p.add_argument("--k", type=int, default=1, help="number of random seeds")
    p.add_argument("--seed-nodes", help="comma-separated seed labels (overrides --k)")
    p.add_argument("--p", type=float, default=0.2, help="infection probability")
    p.add_argument("--fraction", type=float, default=0.10, help="stop once the infected share exceeds this")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (MSD_SEED overrides)")
    p.add_argument("-o", "--output", help="snapshot path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="detect sources from a snapshot")
    graph_args(p)
    p.add_argument("snapshot", help="snapshot JSON with an 'infected' list")
    p.add_argument("--clusterer", choices=ALL_METHODS, default="link")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--tol", type=float, default=1e-10, help="iterative solver tolerance")
    p.add_argument("--min-cluster-size", type=int, default=3)
    p.add_argument("--solver", choices=("closed", "iterative"), default="closed")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for Louvain (MSD_SEED overrides)")
    p.add_argument("--clusters-out", help="write the cluster assignment CSV here")
    p.add_argument("-o", "--output", help="report path (default: stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("experiment", help="run a Monte-Carlo experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--output-dir", default=None)
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for byte-stable output")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("generate", help="write synthetic school networks and a matching config")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        return _report(str(exc), exc.stage)
    except ConfigError as exc:
        for problem in exc.problems:
            sys.stderr.write(json.dumps({"error": problem, "stage": "config"}) + "\n")
        return EXIT_CODES["config"]
    except MSDError as exc:
        return _report(str(exc), getattr(exc, "stage", "pipeline"))


if __name__ == "__main__":
    sys.exit(main())
