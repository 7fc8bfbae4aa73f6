"""Command-line entry points.

Subcommands: gen-data, train, bench, ablate, serve.  Settings come from an
optional flat TOML file (--config) overridden by flags of the same name;
every model hyperparameter is a plain key (alpha, beta, rho, delta, tau,
k_e, k_d, L) alongside engine keys (B, W, strategy, score, seed), data
keys (source, k, dims, spread, ratios, n_train, n_test, shuffle), and
benchmark keys (trials, base_seed, eval_interval).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib

from topostream.datasets import (
    DataSpec,
    calibration_first,
    gen_blobs,
    gen_imbalanced,
    materialize,
    save_dataset,
)
from topostream.engine import Engine, EngineConfig, run_stream
from topostream.graph import Hyperparams

PARAM_KEYS = ("alpha", "beta", "rho", "delta", "tau", "k_e", "k_d", "L")
ENGINE_KEYS = ("B", "W", "strategy", "score", "seed")
DATA_KEYS = ("source", "k", "dims", "spread", "ratios", "n_train", "n_test", "shuffle")
BENCH_KEYS = ("trials", "base_seed", "eval_interval")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat TOML settings file")
    for key in ("alpha", "beta", "rho", "delta", "tau", "k_e", "k_d", "spread"):
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    for key in ("L", "B", "W", "seed", "k", "dims", "n_train", "n_test",
                "trials", "base_seed", "eval_interval"):
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, type=int)
    parser.add_argument("--strategy", choices=("random", "memory", "explorer"))
    parser.add_argument("--score", choices=("dw", "plain"))
    parser.add_argument("--source", help="'blobs', 'imbalanced', or a dataset file path")
    parser.add_argument("--ratios", help="comma-separated class ratios, e.g. 0.9,0.1")


def _gather(args: argparse.Namespace) -> dict:
    """Merge config-file keys with explicitly passed flags (flags win)."""
    cfg: dict = {}
    if getattr(args, "config", None):
        loaded = tomllib.loads(Path(args.config).read_text(encoding="utf-8"))
        known = set(PARAM_KEYS + ENGINE_KEYS + DATA_KEYS + BENCH_KEYS)
        unknown = sorted(set(loaded) - known)
        if unknown:
            raise ValueError(
                f"unknown config keys {unknown}; the file is flat key=value "
                "(no sections), with keys from: " + ", ".join(sorted(known))
            )
        cfg.update(loaded)
    for key in PARAM_KEYS + ENGINE_KEYS + DATA_KEYS + BENCH_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if isinstance(cfg.get("ratios"), str):
        cfg["ratios"] = [float(v) for v in cfg["ratios"].split(",") if v]
    return cfg


def _build_configs(cfg: dict) -> tuple[EngineConfig, DataSpec, dict]:
    params = Hyperparams(**{k: cfg[k] for k in PARAM_KEYS if k in cfg})
    engine = EngineConfig(params=params, **{k: cfg[k] for k in ENGINE_KEYS if k in cfg})
    data_kwargs = {k: cfg[k] for k in DATA_KEYS if k in cfg}
    if "seed" in cfg:
        data_kwargs["seed"] = cfg["seed"]
    data = DataSpec(**data_kwargs)
    bench = {k: cfg[k] for k in BENCH_KEYS if k in cfg}
    return engine, data, bench


def cmd_gen_data(args: argparse.Namespace) -> int:
    cfg = _gather(args)
    k = cfg.get("k", 2)
    n = args.n
    dims = cfg.get("dims", 4)
    spread = cfg.get("spread", 0.06)
    seed = cfg.get("seed", 0)
    if args.kind == "imbalanced":
        ratios = cfg.get("ratios") or [1.0 / k] * k
        data = gen_imbalanced(k, n, ratios, seed, dims=dims, spread=spread)
    else:
        data = gen_blobs(k, n, spread, dims, seed)
    if args.calibration:
        data = calibration_first(data, args.calibration)
    save_dataset(args.out, data, calibration=args.calibration)
    print(f"wrote {n} samples, {k} classes, dims={dims} -> {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    engine_cfg, data_spec, bench = _build_configs(_gather(args))
    stream, test, dims = materialize(data_spec)
    engine = Engine(dim=dims, config=engine_cfg)
    metrics = run_stream(
        engine, stream,
        eval_set=test if len(test[0]) else None,
        eval_interval=bench.get("eval_interval", 500),
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "trace.jsonl").open("w", encoding="utf-8") as fh:
        for entry in engine.trace:
            fh.write(json.dumps(entry) + "\n")
    snapshot = engine.graph.to_snapshot()
    snapshot["hash"] = engine.graph.state_hash()
    (out / "snapshot.json").write_text(json.dumps(snapshot), encoding="utf-8")
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2), encoding="utf-8")
    acc = "n/a" if metrics["accuracy"] is None else f"{metrics['accuracy']:.4f}"
    print(
        f"samples={metrics['samples']} nodes={metrics['nodes']} "
        f"queries={metrics['queries']} accuracy={acc} hash={snapshot['hash'][:12]}"
    )
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from topostream.harness import BenchConfig, run_benchmark

    engine_cfg, data_spec, bench = _build_configs(_gather(args))
    cfg = BenchConfig(engine=engine_cfg, data=data_spec, **bench)
    result = run_benchmark(cfg, args.out_dir)
    for metric, agg in result["summary"].items():
        print(f"{metric}: {agg['mean']:.4f} ± {agg['std']:.4f}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    from topostream.harness import BenchConfig, ablation_suite

    engine_cfg, data_spec, bench = _build_configs(_gather(args))
    cfg = BenchConfig(engine=engine_cfg, data=data_spec, **bench)
    layers = tuple(int(v) for v in args.layers.split(","))
    strategies = tuple(args.strategies.split(","))
    scores = tuple(args.scores.split(","))
    rows = ablation_suite(cfg, args.out_dir, layers=layers, scores=scores, strategies=strategies)
    for r in rows:
        print(
            f"{r['strategy']:<9} score={r['score']:<5} L={r['L']} "
            f"acc={r['accuracy_mean']:.4f}±{r['accuracy_std']:.4f} "
            f"queries={r['queries_mean']:.1f}"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from topostream.service import serve

    print(f"serving on http://{args.host}:{args.port}")
    serve(host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topostream",
        description="Online active semi-supervised learning on a topological graph",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic dataset file")
    _add_config_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=("blobs", "imbalanced"), default="blobs")
    p.add_argument("--n", type=int, required=True, help="total samples")
    p.add_argument("--calibration", type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="run one stream, write trace + snapshot + metrics")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", help="repeated seeded trials, write summary + raw")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="layer/score/strategy sweep")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--layers", default="0,1,3,5")
    p.add_argument("--strategies", default="random,memory,explorer")
    p.add_argument("--scores", default="dw,plain")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
