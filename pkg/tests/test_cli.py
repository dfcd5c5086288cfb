import json

import numpy as np
import pytest

from tscausalnn import cli, graphio
from tscausalnn.config import RunConfig, default_config, load_config
from tscausalnn.exceptions import UsageError
from tscausalnn.graph import TemporalGraph, is_dag
from tscausalnn.preprocess import TimeSeriesDataset, load_csv, write_csv

QUICK = ["--inner-epochs", "300", "--max-outer", "30"]


@pytest.fixture
def toy_csv(tmp_path):
    rng = np.random.default_rng(0)
    x1 = rng.normal(size=300)
    x2 = np.zeros(300)
    x2[1:] = 0.9 * x1[:-1] + 0.05 * rng.normal(size=299)
    return write_csv(TimeSeriesDataset(["x1", "x2"], np.c_[x1, x2]), tmp_path / "toy.csv")


def test_generate_synth1(tmp_path, capsys):
    assert cli.main(["generate", "--family", "synth1", "--length", "1000", "--seed", "7", "--out", str(tmp_path)]) == 0
    data = load_csv(tmp_path / "Dataset1_seed7.csv")
    truth = graphio.read_graph(tmp_path / "Dataset1_seed7_truth.json")
    assert data.T == 1000
    assert truth.n_edges() == 9
    assert "wrote" in capsys.readouterr().out


def test_generate_lagged_and_repeatable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["generate", "--family", "synth1-lagged", "--length", "200", "--out", str(out)]) == 0
    truth = graphio.read_graph(a / "Dataset1-LaggedOnly_seed0_truth.json")
    assert not truth.contemporaneous.any()
    for name in ("Dataset1-LaggedOnly_seed0.csv", "Dataset1-LaggedOnly_seed0_truth.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_generate_unknown_family(tmp_path, capsys):
    assert cli.main(["generate", "--family", "nope", "--out", str(tmp_path)]) == 1
    assert "error [datagen]" in capsys.readouterr().err


def test_discover_toy_finds_planted_edge(tmp_path, toy_csv):
    out = tmp_path / "g.json"
    assert cli.main(["discover", "--input", str(toy_csv), "--lag", "2", "--out", str(out)] + QUICK) == 0
    g = graphio.read_graph(out)
    assert ("x1", 1, "x2") in {(g.names[i], lag, g.names[j]) for i, lag, j, _ in g.edges()}
    assert is_dag(g.contemporaneous)
    meta = g.metadata
    assert meta["config"]["l_max"] == 2 and meta["seed"] == 0
    assert (tmp_path / "g.log.jsonl").exists()


def test_discover_rerun_from_embedded_config(tmp_path, toy_csv):
    first = tmp_path / "a.json"
    cli.main(["discover", "--input", str(toy_csv), "--lag", "2", "--out", str(first),
              "--inner-epochs", "40", "--max-outer", "3", "--seed", "5"])
    second = tmp_path / "b.json"
    assert cli.main(["discover", "--input", str(toy_csv), "--config", str(first), "--out", str(second)]) == 0
    a, b = graphio.read_graph(first), graphio.read_graph(second)
    assert a == b
    assert a.metadata["weights"] == b.metadata["weights"]
    assert b.metadata["config"]["seed"] == 5


def test_discover_conv1d_records_variant(tmp_path, toy_csv):
    out = tmp_path / "g.json"
    assert cli.main(["discover", "--input", str(toy_csv), "--lag", "2", "--variant", "conv1d",
                     "--inner-epochs", "5", "--max-outer", "1", "--out", str(out)]) == 0
    assert graphio.read_graph(out).metadata["variant"] == "conv1d-ablation"


def test_discover_lag_too_large(tmp_path, toy_csv, capsys):
    assert cli.main(["discover", "--input", str(toy_csv), "--lag", "300", "--out", str(tmp_path / "g.json")]) == 2
    assert "error [usage]" in capsys.readouterr().err


def test_discover_bad_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n3,x\n")
    assert cli.main(["discover", "--input", str(bad), "--out", str(tmp_path / "g.json")]) == 1
    err = capsys.readouterr().err
    assert "error [ingest]" in err and "row 2, column 2" in err


def test_evaluate(tmp_path, capsys):
    cli.main(["generate", "--family", "synth1", "--length", "100", "--out", str(tmp_path)])
    truth = tmp_path / "Dataset1_seed0_truth.json"
    assert cli.main(["evaluate", "--input", str(truth), "--truth", str(truth), "--mode", "full"]) == 0
    assert "SHD=0 F1=1.0000 FDR=0.0000" in capsys.readouterr().out
    empty = graphio.write_graph(TemporalGraph.empty(["S1", "S2", "S3", "S4"], 5), tmp_path / "e.json")
    report = tmp_path / "r.json"
    assert cli.main(["evaluate", "--input", str(empty), "--truth", str(truth), "--mode", "full",
                     "--out", str(report)]) == 0
    r = json.loads(report.read_text())
    assert (r["shd"], r["f1"], r["fdr"], r["empty_prediction"]) == (9, 0.0, 0.0, True)


def test_evaluate_mismatched_variables(tmp_path, capsys):
    a = graphio.write_graph(TemporalGraph.empty(["a", "b"], 1), tmp_path / "a.json")
    b = graphio.write_graph(TemporalGraph.empty(["a", "c"], 1), tmp_path / "b.json")
    assert cli.main(["evaluate", "--input", str(a), "--truth", str(b)]) == 2


def test_sweep_single_seed_equals_single_run(tmp_path, toy_csv):
    truth = graphio.write_graph(TemporalGraph.from_edges(["x1", "x2"], 2, [("x1", 1, "x2")]), tmp_path / "t.json")
    cfg = default_config().updated(l_max=2, inner_epochs=40, max_outer=3, seed=2)
    rows, best = cli.cmd_sweep(toy_csv, truth, [2], cfg, out=tmp_path / "sw")
    single = cli.cmd_discover(toy_csv, cfg, tmp_path / "one.json")
    assert len(rows) == 1
    assert best[1] == cli.cmd_evaluate(tmp_path / "one.json", truth)
    assert graphio.read_graph(tmp_path / "sw" / "seed2.json") == single.graph_


def test_sweep_best_is_min(tmp_path, toy_csv, capsys):
    truth = graphio.write_graph(TemporalGraph.from_edges(["x1", "x2"], 2, [("x1", 1, "x2")]), tmp_path / "t.json")
    code = cli.main(["sweep", "--input", str(toy_csv), "--truth", str(truth), "--seeds", "0,1,2",
                     "--lag", "2", "--inner-epochs", "30", "--max-outer", "2", "--out", str(tmp_path / "sw")])
    assert code == 0
    doc = json.loads((tmp_path / "sw" / "sweep.json").read_text())
    assert len(doc["runs"]) == 3
    assert doc["best"]["shd"] == min(r["shd"] for r in doc["runs"])
    assert "best (seed" in capsys.readouterr().out


def test_sweep_needs_seeds(tmp_path, toy_csv):
    with pytest.raises(UsageError):
        cli.cmd_sweep(toy_csv, toy_csv, [])


def test_export_dot(tmp_path, capsys):
    g = graphio.write_graph(TemporalGraph.from_edges(["a", "b"], 1, [("a", 1, "b")]), tmp_path / "g.json")
    assert cli.main(["export-dot", "--input", str(g)]) == 0
    assert '"a" -> "b" [label="lag 1"];' in capsys.readouterr().out
    dot, mat = tmp_path / "g.dot", tmp_path / "g.csv"
    assert cli.main(["export-dot", "--input", str(g), "--mode", "full", "--out", str(dot), "--matrix", str(mat)]) == 0
    assert '"a[t-1]" -> "b[t]";' in dot.read_text()
    assert mat.read_text().startswith("target,")


def test_config_precedence(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"lambda1": 0.5, "threshold": 0.2}))
    cfg = load_config(p)
    assert cfg.lambda_ == 0.5 and cfg.threshold == 0.2 and cfg.l_max == 5
    args = cli.build_parser().parse_args(["discover", "--input", "x", "--config", str(p), "--threshold", "0.4"])
    assert cli._resolve(args).threshold == 0.4
    with pytest.raises(UsageError):
        RunConfig().updated(bogus=1)
    p.write_text("[1, 2]")
    with pytest.raises(UsageError):
        load_config(p)


def test_default_config_matches_dataclass():
    assert default_config() == RunConfig()
