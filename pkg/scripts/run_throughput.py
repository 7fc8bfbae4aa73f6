#!/usr/bin/env python3
"""Per-sample processing cost as the topology grows.

Feeds uniform random 4-D inputs (worst case for node growth) and reports
the mean wall-clock cost of a full observe step — learn, aggregate, score,
decide — in windows around increasing node-count milestones.
"""

from __future__ import annotations

import argparse

import numpy as np

from topostream.engine import Engine, EngineConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--milestones", default="250,500,1000,2000")
    ap.add_argument("--measure", type=int, default=1000,
                    help="samples timed at each milestone")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    milestones = [int(x) for x in args.milestones.split(",")]
    rng = np.random.default_rng(args.seed)
    engine = Engine(
        dim=4,
        config=EngineConfig(B=1, W=500, strategy="explorer", seed=args.seed),
        keep_trace=False,
    )

    print(f"{'nodes':>8} {'ms/sample':>10}")
    for target in sorted(milestones):
        fed = 0
        while engine.graph.n_nodes < target and fed < 100_000:
            engine.process(rng.random(4), y_true=0, oracle=lambda sid: 0)
            fed += 1
        if engine.graph.n_nodes < target:
            print(f"{target:>8} unreachable (growth saturated at {engine.graph.n_nodes})")
            continue
        before = engine.process_seconds
        for _ in range(args.measure):
            engine.process(rng.random(4), y_true=0, oracle=lambda sid: 0)
        ms = (engine.process_seconds - before) / args.measure * 1000.0
        print(f"{engine.graph.n_nodes:>8} {ms:>10.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
