#!/usr/bin/env python3
"""Strategy / propagation-depth / density-weighting ablation on 8 clusters.

Streams a fixed-geometry 8-cluster 4-D dataset (even-parity vertices of
{0.3, 0.7}^4, Gaussian spread 0.10) through five engine variants and
reports mean +/- std test accuracy over seeds:

    explorer L=3 dw      the full configuration
    random   L=3 dw      random query placement
    explorer L=0 dw      no label propagation
    memory   L=3 dw      best-of-window querying
    memory   L=3 plain   same, without density weighting

Writes one CSV row per (variant, seed).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import time
from pathlib import Path

import numpy as np

from topostream.engine import Engine, EngineConfig, run_stream
from topostream.graph import Hyperparams
from topostream.harness import accuracy, mean_std

CENTERS = np.array(
    [
        [0.3 + 0.4 * b for b in bits]
        for bits in itertools.product([0, 1], repeat=4)
        if sum(bits) % 2 == 0
    ]
)
SPREAD = 0.10

VARIANTS = [
    ("explorer-L3-dw", "explorer", 3, "dw"),
    ("random-L3-dw", "random", 3, "dw"),
    ("explorer-L0-dw", "explorer", 0, "dw"),
    ("memory-L3-dw", "memory", 3, "dw"),
    ("memory-L3-plain", "memory", 3, "plain"),
]


def make_data(seed: int, n_train: int, n_test: int):
    rng = np.random.default_rng(seed)
    per = (n_train + n_test) // len(CENTERS)
    X = np.vstack([rng.normal(c, SPREAD, (per, 4)) for c in CENTERS])
    y = np.repeat(np.arange(len(CENTERS)), per)
    X = np.clip(X, 0.0, 1.0)
    order = rng.permutation(len(X))
    X, y = X[order], y[order]
    return (X[:n_train], y[:n_train]), (X[n_train : n_train + n_test], y[n_train : n_train + n_test])


def run_variant(seed, strategy, layers, score, data, window):
    (X_train, y_train), test = data
    cfg = EngineConfig(
        params=Hyperparams(L=layers),
        B=1,
        W=window,
        strategy=strategy,
        score=score,
        seed=seed,
    )
    engine = Engine(dim=4, config=cfg, keep_trace=False)
    run_stream(engine, ((x, int(l)) for x, l in zip(X_train, y_train)), eval_set=None)
    return accuracy(engine, test), engine.graph.n_nodes


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--n-train", type=int, default=10_000)
    ap.add_argument("--n-test", type=int, default=2_000)
    ap.add_argument("--window", type=int, default=500)
    ap.add_argument("--out", default="results/cluster_ablation.csv")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    scores: dict[str, list[float]] = {name: [] for name, *_ in VARIANTS}
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "seed", "accuracy", "nodes"])
        for seed in range(args.seeds):
            data = make_data(seed, args.n_train, args.n_test)
            for name, strategy, layers, score in VARIANTS:
                acc, nodes = run_variant(seed, strategy, layers, score, data, args.window)
                scores[name].append(acc)
                writer.writerow([name, seed, f"{acc:.4f}", nodes])
            print(f"seed {seed}: " + "  ".join(f"{n}={scores[n][-1]:.3f}" for n in scores))

    print(f"\nmean accuracy over {args.seeds} seeds ({time.perf_counter() - start:.0f}s):")
    for name, values in scores.items():
        mean, std = mean_std(values)
        print(f"  {name:18s} {mean:.3f} +/- {std:.3f}")
    print(f"rows written to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
