"""Repeated-trial benchmarks, graph statistics, and ablation sweeps.

Output layout for a benchmark run (all under one directory):

* ``raw.jsonl``    — one JSON object per trial, deterministic fields only
* ``summary.csv``  — metric, mean, sample std (n-1); byte-identical across
                     reruns of the same configuration and base seed
* ``timing.json``  — wall-clock measurements, intentionally separate since
                     they can never be deterministic
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from topostream.datasets import DataSpec, materialize
from topostream.engine import Engine, EngineConfig, classify_many, run_stream
from topostream.graph import TopoGraph
from topostream.inference import UNLABELED

__all__ = [
    "BenchConfig",
    "GraphStats",
    "accuracy",
    "graph_stats",
    "run_trial",
    "run_benchmark",
    "ablation_suite",
    "mean_std",
]


@dataclass(frozen=True)
class BenchConfig:
    """A benchmark: one engine config, one data recipe, repeated trials."""

    engine: EngineConfig = field(default_factory=EngineConfig)
    data: DataSpec = field(default_factory=DataSpec)
    trials: int = 10
    base_seed: int = 0
    eval_interval: int = 500

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class GraphStats:
    """Structural summary of a trained graph."""

    nodes: int
    total_coactivations: int
    coactivations_per_node: float
    coactivations_per_sample: float
    mean_neighbors: float
    nodes_without_edges: int
    mean_edge_weight: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def graph_stats(graph: TopoGraph) -> GraphStats:
    n = graph.n_nodes
    if n == 0:
        return GraphStats(0, 0, 0.0, 0.0, 0.0, 0, 0.0)
    total = 0
    weights = []
    for i, j, c in graph.edge_counts():
        total += c
        weights.append(graph.edge_weight(i, j))
    degrees = [len(graph.neighbors(i)) for i in range(n)]
    samples = int(graph.counts.sum())   # every learn event bumps exactly one d
    return GraphStats(
        nodes=n,
        total_coactivations=total,
        coactivations_per_node=total / n,
        coactivations_per_sample=total / samples if samples else 0.0,
        mean_neighbors=float(np.mean(degrees)),
        nodes_without_edges=int(sum(1 for d in degrees if d == 0)),
        mean_edge_weight=float(np.mean(weights)) if weights else 0.0,
    )


def accuracy(engine: Engine, test_set: tuple[np.ndarray, np.ndarray]) -> float:
    """Fraction of correct hold-out predictions; the sentinel counts as wrong."""
    X, y = test_set
    if len(X) == 0:
        raise ValueError("test set must be non-empty")
    preds = classify_many(engine.graph, np.asarray(X), engine.config.params)
    return float(np.mean([p != UNLABELED and p == t for p, t in zip(preds, y)]))


def mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1); std is 0 for one value."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def run_trial(cfg: BenchConfig, trial: int) -> dict:
    """One seeded independent trial: fresh data, fresh engine."""
    seed = cfg.base_seed + trial
    engine_cfg = dataclasses.replace(cfg.engine, seed=seed)
    data_spec = dataclasses.replace(cfg.data, seed=seed)
    stream, test, dims = materialize(data_spec)
    engine = Engine(dim=dims, config=engine_cfg, keep_trace=False)
    metrics = run_stream(engine, stream, eval_set=test, eval_interval=cfg.eval_interval)
    return {
        "trial": trial,
        "seed": seed,
        "accuracy": metrics["accuracy"],
        "accuracy_curve": metrics["accuracy_curve"],
        "queries": metrics["queries"],
        "labels": metrics["labels"],
        "labels_per_class": {str(k): v for k, v in metrics["labels_per_class"].items()},
        "nodes": metrics["nodes"],
        "graph_stats": graph_stats(engine.graph).to_dict(),
        "graph_hash": engine.graph.state_hash(),
        "_ms_per_sample": metrics["ms_per_sample"],   # stripped from raw.jsonl
    }


SUMMARY_METRICS = [
    ("accuracy", lambda t: t["accuracy"]),
    ("queries", lambda t: t["queries"]),
    ("labels", lambda t: t["labels"]),
    ("nodes", lambda t: t["nodes"]),
    ("coactivations_per_node", lambda t: t["graph_stats"]["coactivations_per_node"]),
    ("mean_neighbors", lambda t: t["graph_stats"]["mean_neighbors"]),
    ("nodes_without_edges", lambda t: t["graph_stats"]["nodes_without_edges"]),
    ("mean_edge_weight", lambda t: t["graph_stats"]["mean_edge_weight"]),
]


def run_benchmark(cfg: BenchConfig, out_dir: str | Path | None = None) -> dict:
    """Run all trials; optionally write raw.jsonl / summary.csv / timing.json."""
    trials = [run_trial(cfg, i) for i in range(cfg.trials)]
    summary_rows = []
    for name, getter in SUMMARY_METRICS:
        mean, std = mean_std([getter(t) for t in trials])
        summary_rows.append((name, mean, std))
    summary = {name: {"mean": m, "std": s} for name, m, s in summary_rows}
    timing = [t.pop("_ms_per_sample") for t in trials]

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "raw.jsonl").open("w", encoding="utf-8") as fh:
            for t in trials:
                fh.write(json.dumps(t, sort_keys=True) + "\n")
        lines = ["metric,mean,std"]
        for name, m, s in summary_rows:
            lines.append(f"{name},{m!r},{s!r}")
        (out / "summary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        (out / "timing.json").write_text(
            json.dumps(
                {"ms_per_sample": timing, "ms_per_sample_mean": sum(timing) / len(timing)},
                indent=2,
            ),
            encoding="utf-8",
        )
    return {"summary": summary, "trials": trials, "ms_per_sample": timing}


ABLATION_LAYERS = (0, 1, 3, 5)


def ablation_suite(
    cfg: BenchConfig,
    out_dir: str | Path | None = None,
    layers=ABLATION_LAYERS,
    scores=("dw", "plain"),
    strategies=("random", "memory", "explorer"),
) -> list[dict]:
    """Cross-product sweep over layer depth, score mode, and strategy."""
    rows = []
    for strategy in strategies:
        for score in scores:
            for L in layers:
                engine_cfg = dataclasses.replace(
                    cfg.engine,
                    strategy=strategy,
                    score=score,
                    params=dataclasses.replace(cfg.engine.params, L=L),
                )
                result = run_benchmark(dataclasses.replace(cfg, engine=engine_cfg))
                acc = result["summary"]["accuracy"]
                rows.append(
                    {
                        "strategy": strategy,
                        "score": score,
                        "L": L,
                        "accuracy_mean": acc["mean"],
                        "accuracy_std": acc["std"],
                        "queries_mean": result["summary"]["queries"]["mean"],
                    }
                )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["strategy,score,L,accuracy_mean,accuracy_std,queries_mean"]
        for r in rows:
            lines.append(
                f"{r['strategy']},{r['score']},{r['L']},"
                f"{r['accuracy_mean']!r},{r['accuracy_std']!r},{r['queries_mean']!r}"
            )
        (out / "ablation.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows
