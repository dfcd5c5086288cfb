"""Command-line interface: ``tscausalnn {generate,discover,evaluate,sweep,export-dot}``.

Every command exits 0 on success. Failures print ``error [<stage>]: <message>``
on stderr and exit 1 (usage problems exit 2).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import datagen, graphio, metrics
from .config import RunConfig, default_config, load_config
from .estimator import TSCausalNN
from .exceptions import TSCausalError, UsageError
from .preprocess import load_csv, write_csv

log = logging.getLogger("tscausalnn")


def _resolve(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else default_config()
    return cfg.updated(
        l_max=getattr(args, "lag", None),
        threshold=getattr(args, "threshold", None),
        lambda_=getattr(args, "lambda_", None),
        seed=getattr(args, "seed", None),
        variant=getattr(args, "variant", None),
        inner_epochs=getattr(args, "inner_epochs", None),
        max_outer=getattr(args, "max_outer", None),
    )


def _out_paths(out, stem):
    out = Path(out)
    if out.suffix:
        return out, out.with_suffix(".csv")
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{stem}_truth.json", out / f"{stem}.csv"


def cmd_generate(family, length=1000, seed=0, snr=None, out=".", burn_in=100):
    """Write a synthetic CSV plus its ground-truth graph. Returns ``(csv_path, truth_path)``."""
    spec = datagen.SyntheticSpec(datagen.parse_family(family), length=length, burn_in=burn_in, seed=seed)
    if snr is not None:
        spec = datagen.snr_variant(spec, snr)
    data, truth = datagen.generate(spec)
    stem = f"{spec.family.value}_seed{seed}" + (f"_snr{snr:g}" if snr is not None else "")
    truth_path, csv_path = _out_paths(out, stem)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, csv_path)
    g = truth.graph.copy()
    g.metadata.update({
        "family": spec.family.value, "length": length, "seed": seed, "burn_in": burn_in,
        "noise_scale": list(spec.scales()), "target_snr": snr,
    })
    graphio.write_graph(g, truth_path)
    return csv_path, truth_path


def cmd_discover(input_path, config=None, out="graph.json", log_path=None):
    """Fit on a CSV and write the thresholded graph. Returns the fitted estimator."""
    config = config or default_config()
    data = load_csv(input_path)
    if config.l_max >= data.T:
        raise UsageError(f"--lag {config.l_max} must be smaller than the series length {data.T}")
    out = Path(out)
    if log_path is None:
        log_path = out.with_suffix(".log.jsonl")
    est = TSCausalNN.from_config(config).fit(data, log_path=log_path)
    graph = est.graph_.copy()
    graph.metadata["input"] = str(input_path)
    graph.metadata["weights"] = est.adjacency_.weights.tolist()
    graphio.write_graph(graph, out)
    return est


def cmd_evaluate(pred_path, truth_path, mode="summary"):
    pred = graphio.read_graph(pred_path)
    truth = graphio.read_graph(truth_path)
    return metrics.evaluate(pred, truth, mode)


def _sweep_one(job):
    input_path, truth_path, cfg_dict, mode, out_dir = job
    cfg = RunConfig(**cfg_dict)
    out = Path(out_dir) / f"seed{cfg.seed}.json"
    cmd_discover(input_path, cfg, out)
    report = cmd_evaluate(out, truth_path, mode)
    return cfg.seed, report


def best_of(reports):
    """Best single run: lowest SHD, then highest F1, then lowest FDR."""
    return min(reports, key=lambda r: (r[1].shd, -r[1].f1, r[1].fdr))


def cmd_sweep(input_path, truth_path, seeds, config=None, mode="summary", out="sweep", jobs=1):
    """Fit once per seed and evaluate each. Returns ``(rows, best)`` with rows ``(seed, MetricReport)``."""
    if not seeds:
        raise UsageError("sweep needs at least one seed")
    config = config or default_config()
    Path(out).mkdir(parents=True, exist_ok=True)
    jobs_list = [(str(input_path), str(truth_path), config.updated(seed=s).to_dict(), mode, str(out))
                 for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, jobs_list))
    else:
        rows = [_sweep_one(j) for j in jobs_list]
    best = best_of(rows)
    summary = {
        "config": config.to_dict(),
        "mode": mode,
        "runs": [{"seed": s, **r.as_dict()} for s, r in rows],
        "best": {"seed": best[0], **best[1].as_dict()},
    }
    (Path(out) / "sweep.json").write_text(json.dumps(summary, indent=2) + "\n")
    return rows, best


def cmd_export_dot(graph_path, mode="summary", out=None, matrix=None):
    graph = graphio.read_graph(graph_path)
    text = graphio.to_dot(graph, mode)
    if out:
        Path(out).write_text(text)
    if matrix:
        Path(matrix).write_text(graphio.to_adjacency_csv(graph, mode))
    return text


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file (or a graph file with embedded config)")
    p.add_argument("--lag", type=int, help="maximum lag l_max")
    p.add_argument("--threshold", type=float, help="edge threshold")
    p.add_argument("--lambda", dest="lambda_", type=float, help="L1 sparsity weight")
    p.add_argument("--variant", choices=["conv2d", "conv1d", "conv1d-ablation"])
    p.add_argument("--inner-epochs", type=int)
    p.add_argument("--max-outer", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="tscausalnn", description="Temporal causal discovery with a causal CNN.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a synthetic dataset and its true graph")
    g.add_argument("--family", required=True, help="synth1, synth2, synth1-lagged or synth2-lagged")
    g.add_argument("--length", "-T", type=int, default=1000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--snr", type=float, help="target average signal-to-noise ratio")
    g.add_argument("--out", default=".", help="output directory, or truth-graph path ending in .json")

    d = sub.add_parser("discover", help="learn a graph from a CSV")
    d.add_argument("--input", required=True)
    d.add_argument("--out", default="graph.json")
    d.add_argument("--log", help="training log path (JSON lines)")
    d.add_argument("--seed", type=int)
    _add_config_flags(d)

    e = sub.add_parser("evaluate", help="compare a graph with the truth")
    e.add_argument("--input", required=True, help="predicted graph file")
    e.add_argument("--truth", required=True)
    e.add_argument("--mode", choices=["summary", "full"], default="summary")
    e.add_argument("--out", help="also write the report as JSON")

    s = sub.add_parser("sweep", help="fit over several seeds and report the best run")
    s.add_argument("--input", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seeds")
    s.add_argument("--mode", choices=["summary", "full"], default="summary")
    s.add_argument("--out", default="sweep")
    s.add_argument("--jobs", type=int, default=1)
    _add_config_flags(s)

    x = sub.add_parser("export-dot", help="render a graph file as Graphviz DOT")
    x.add_argument("--input", required=True)
    x.add_argument("--mode", choices=["summary", "full"], default="summary")
    x.add_argument("--out", help="DOT path (default: stdout)")
    x.add_argument("--matrix", help="also write the adjacency matrix as CSV")
    return parser


def _parse_seeds(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad seed list {text!r}") from None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            csv_path, truth_path = cmd_generate(args.family, args.length, args.seed, args.snr, args.out)
            print(f"wrote {csv_path} and {truth_path}")
        elif args.command == "discover":
            est = cmd_discover(args.input, _resolve(args), args.out, args.log)
            meta = est.graph_.metadata
            print(f"wrote {args.out}: {est.graph_.n_edges()} edges, stop={meta['stop_reason']}, "
                  f"acyclic={meta['acyclicity_reached']}, removed={meta['edges_removed']}")
        elif args.command == "evaluate":
            report = cmd_evaluate(args.input, args.truth, args.mode)
            print(report.line())
            if args.out:
                Path(args.out).write_text(json.dumps(report.as_dict(), indent=2) + "\n")
        elif args.command == "sweep":
            rows, best = cmd_sweep(args.input, args.truth, _parse_seeds(args.seeds), _resolve(args),
                                   args.mode, args.out, args.jobs)
            for seed, report in rows:
                print(f"seed {seed}: {report.line()}")
            print(f"best (seed {best[0]}): {best[1].line()}")
        elif args.command == "export-dot":
            text = cmd_export_dot(args.input, args.mode, args.out, args.matrix)
            if not args.out:
                sys.stdout.write(text)
    except UsageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 2
    except TSCausalError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
