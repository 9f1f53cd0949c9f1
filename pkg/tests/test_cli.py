import csv
import json

import pytest

from edgemsd.cli import EXIT_CODES, main
from edgemsd.graph import write_edge_list
from edgemsd.synthetic import grid_graph


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def star(tmp_path):
    return write(tmp_path, "star.txt", "".join(f"c l{i}\n" for i in range(4)))


@pytest.fixture
def grid(tmp_path):
    p = tmp_path / "grid.txt"
    with open(p, "w") as fh:
        write_edge_list(grid_graph(15, 15), fh)
    return str(p)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_stats(capsys, tmp_path):
    code, out, _ = run(capsys, "stats", write(tmp_path, "e.txt", "# two nodes\na b\n"))
    assert code == 0
    assert json.loads(out) == {"nodes": 2, "edges": 1, "avg_degree": 1.0, "density": 0.5}


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "stats", tmp_path / "nope.txt")
    assert code == EXIT_CODES["input"]
    assert json.loads(err.splitlines()[0])["stage"] == "input"


def test_malformed_edge_list(capsys, tmp_path):
    code, _, err = run(capsys, "stats", write(tmp_path, "bad.txt", "a b\na b c\n"))
    assert code != 0
    assert "line 2" in json.loads(err)["error"]


def test_simulate_p_zero(capsys, star):
    code, out, _ = run(capsys, "simulate", star, "--seed-nodes", "c", "--p", "0", "--fraction", "0.5")
    snap = json.loads(out)
    assert code == 0 and snap["infected"] == ["c"] and snap["seeds"] == ["c"]


def test_simulate_star_p_one(capsys, star):
    code, out, _ = run(capsys, "simulate", star, "--seed-nodes", "c", "--p", "1", "--fraction", "0.5")
    snap = json.loads(out)
    assert sorted(snap["infected"]) == ["c", "l0", "l1", "l2", "l3"]
    assert snap["steps"] == 1


def test_simulate_reproducible(capsys, grid, monkeypatch):
    a = run(capsys, "simulate", grid, "--k", "3", "--seed", "11")[1]
    b = run(capsys, "simulate", grid, "--k", "3", "--seed", "11")[1]
    assert a == b
    monkeypatch.setenv("MSD_SEED", "11")
    c = run(capsys, "simulate", grid, "--k", "3", "--seed", "99")[1]
    assert c == a


def test_detect_single_infected(capsys, tmp_path, star):
    snap = write(tmp_path, "snap.json", json.dumps({"infected": ["l2"]}))
    code, out, _ = run(capsys, "detect", star, snap)
    assert code == 0
    assert json.loads(out)["detected_sources"] == ["l2"]


def test_detect_malformed_snapshot(capsys, tmp_path, star):
    snap = write(tmp_path, "snap.json", "{not json")
    code, _, err = run(capsys, "detect", star, snap)
    assert code == EXIT_CODES["input"]
    assert "snapshot" in json.loads(err)["error"]


def test_detect_unknown_node(capsys, tmp_path, star):
    snap = write(tmp_path, "snap.json", json.dumps({"infected": ["zz"]}))
    code, _, _ = run(capsys, "detect", star, snap)
    assert code != 0


def test_simulate_then_detect_with_cluster_dump(capsys, tmp_path, grid):
    snap = str(tmp_path / "snap.json")
    assert run(capsys, "simulate", grid, "--seed-nodes", "2_2,12_12", "--p", "0.5", "--fraction", "0.15", "-o", snap)[0] == 0
    counts = {}
    for method in ("link", "louvain"):
        dump = tmp_path / f"{method}.csv"
        code, out, _ = run(capsys, "detect", grid, snap, "--clusterer", method, "--clusters-out", dump)
        assert code == 0
        counts[method] = json.loads(out)["k_detected"]
        with open(dump) as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        assert set(rows[0]) == ({"edge_src", "edge_dst", "cluster"} if method == "link" else {"node", "cluster"})
    assert counts["link"] <= counts["louvain"]


@pytest.fixture
def experiment_dir(tmp_path, grid):
    cfg = {
        "networks": [{"name": "grid", "edge_list_path": grid}],
        "k_values": [1, 2], "replicates": 2, "infection_prob": 0.3, "target_fraction": 0.15,
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return tmp_path, str(p)


def test_experiment(capsys, experiment_dir):
    tmp_path, cfg = experiment_dir
    outs = []
    for name in ("r1", "r2"):
        code, out, _ = run(capsys, "experiment", cfg, "--threads", "1", "--no-timing", "--output-dir", tmp_path / name)
        assert code == 0
        outs.append(tmp_path / name)
    with open(outs[0] / "replicates.csv") as fh:
        rows = list(csv.DictReader(fh))
    cells = {}
    for r in rows:
        cells.setdefault((r["method"], r["K"]), []).append(r)
    assert len(cells) == 6 and all(len(v) == 2 for v in cells.values())
    for name in ("replicates.csv", "summary.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_experiment_bad_config(capsys, tmp_path):
    p = write(tmp_path, "cfg.json", json.dumps({"networks": [], "replicates": 0, "colour": 1}))
    code, _, err = run(capsys, "experiment", p)
    assert code == EXIT_CODES["config"]
    problems = [json.loads(line)["error"] for line in err.splitlines()]
    assert len(problems) >= 3 and any("colour" in m for m in problems)


def test_generate(capsys, tmp_path):
    code, _, _ = run(capsys, "generate", tmp_path / "gen")
    assert code == 0
    cfg = json.loads((tmp_path / "gen" / "config.json").read_text())
    assert [n["name"] for n in cfg["networks"]] == ["school15", "school20", "school75"]
    code, out, _ = run(capsys, "stats", tmp_path / "gen" / "school20.txt")
    assert json.loads(out)["nodes"] == 922 and json.loads(out)["edges"] == 5229
