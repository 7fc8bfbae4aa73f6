"""Per-sample stream loop: learn, infer, decide, query, label.

The engine exposes two levels:

* `observe`/`resolve` — one sample in, an inference record and possibly a
  pending query out; the label may arrive later (human oracle).
* `process`/`run_stream` — synchronous convenience where the oracle
  answers immediately (dataset-backed benchmarks).

`classify` is evaluation-only: it matches against every node ignoring
vigilance and never mutates anything.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from topostream.graph import DEFAULT_PARAMS, Hyperparams, TopoGraph, complement_code
from topostream.inference import UNLABELED, InferenceRecord, class_probabilities, infer, predict
from topostream.message_passing import aggregate_label_and_count
from topostream.strategies import (
    STRATEGY_NAMES,
    BudgetState,
    QueryDecision,
    make_strategy,
)

__all__ = [
    "SKIPPED",
    "EngineConfig",
    "Engine",
    "DatasetOracle",
    "run_stream",
    "classify_many",
]

SKIPPED = "skipped"   # oracle answer when a query goes unanswered

SCORE_MODES = ("dw", "plain")


@dataclass(frozen=True)
class EngineConfig:
    """Everything that determines a stream run, minus the data itself."""

    params: Hyperparams = DEFAULT_PARAMS
    B: int = 1
    W: int = 50
    strategy: str = "explorer"
    score: str = "dw"       # "dw": decide on s_t; "plain": decide on u_t
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGY_NAMES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGY_NAMES}"
            )
        if self.score not in SCORE_MODES:
            raise ValueError(f"score must be one of {SCORE_MODES}, got {self.score!r}")


class Engine:
    """Owns one graph, one budget, one strategy; processes one stream."""

    def __init__(self, dim: int, config: EngineConfig | None = None, keep_trace: bool = True):
        self.config = config or EngineConfig()
        self.graph = TopoGraph(dim=dim)
        self.rng = np.random.default_rng(self.config.seed)
        self.budget = BudgetState(B=self.config.B, W=self.config.W)
        self.strategy = make_strategy(self.config.strategy, self.budget, self.rng)
        self.t = 0
        self.queries_issued = 0
        self.labels_received = 0
        self.skips = 0
        self.trace: list[dict] = [] if keep_trace else None
        self.process_seconds = 0.0   # summed wall time of observe+resolve

    # -- one sample ------------------------------------------------------------

    def observe(self, r: Sequence[float], y_true: Any = None) -> tuple[InferenceRecord, QueryDecision]:
        """Learn from one sample and decide whether to query the oracle.

        Returns the inference record and the (possibly empty) query
        decision; the caller is responsible for answering a fired query via
        `resolve`.  `y_true` is only echoed into the trace.
        """
        t0 = time.perf_counter()
        coded = complement_code(r)
        winner, _, _ = self.graph.learn(coded, self.config.params)
        rec = infer(self.graph, winner, self.config.params)
        score = rec.s_t if self.config.score == "dw" else rec.u_t
        decision = self.strategy.observe(score, self.t, winner)
        if decision.query:
            self.queries_issued += 1
        sample_index = self.t
        self.t += 1
        self.budget.advance()
        if self.budget.at_boundary:
            self.strategy.roll_window()
        self.process_seconds += time.perf_counter() - t0
        if self.trace is not None:
            entry = {
                "t": sample_index,
                "winner": rec.winner,
                "y_hat": rec.y_hat,
                "u_e": rec.u_e,
                "u_a": rec.u_a,
                "u_t": rec.u_t,
                "s_t": rec.s_t,
                "queried": decision.query,
            }
            if y_true is not None:
                entry["y_true"] = y_true
            self.trace.append(entry)
        return rec, decision

    def resolve(self, decision: QueryDecision, label: Any) -> None:
        """Deliver the oracle's answer for a fired query (or SKIPPED)."""
        if not decision.query:
            raise ValueError("resolve called for a decision that queried nothing")
        t0 = time.perf_counter()
        if label == SKIPPED:
            self.skips += 1           # the budget slot stays consumed
        else:
            self.graph.add_label(decision.node_id, label)
            self.labels_received += 1
        self.process_seconds += time.perf_counter() - t0

    def process(self, r: Sequence[float], y_true: Any, oracle: Callable[[int], Any]) -> InferenceRecord:
        """observe + immediately answer any query from `oracle(sample_id)`."""
        rec, decision = self.observe(r, y_true=y_true)
        if decision.query:
            self.resolve(decision, oracle(decision.sample_id))
        return rec

    # -- evaluation (pure) -------------------------------------------------------

    def classify(self, r: Sequence[float]) -> tuple[Any, np.ndarray]:
        """Prediction for one point against the frozen graph.

        The winner is the choice-value argmax over all nodes — vigilance is
        ignored so every point gets matched — and nothing is mutated.
        """
        g = self.graph
        if g.n_nodes == 0:
            return UNLABELED, np.zeros(0)
        coded = complement_code(r)
        winner = int(
            np.argmax(
                np.minimum(coded, g.weights).sum(axis=1)
                / (self.config.params.alpha + g.weights.sum(axis=1))
            )
        )
        q_agg, _ = aggregate_label_and_count(
            g, winner, self.config.params.L, self.config.params.delta
        )
        p = class_probabilities(q_agg)
        return predict(p, g.classes), p

    def mean_ms_per_sample(self) -> float:
        return 1000.0 * self.process_seconds / max(self.t, 1)


def classify_many(graph: TopoGraph, R: np.ndarray, params: Hyperparams) -> list:
    """Vectorized `classify` over rows of R; returns predicted labels.

    Aggregation is cached per winner node, so repeated winners cost one
    message-passing pass.
    """
    m = R.shape[0]
    if graph.n_nodes == 0 or m == 0:
        return [UNLABELED] * m
    W = graph.weights
    denom = params.alpha + W.sum(axis=1)
    coded = np.hstack([R, 1.0 - R])
    winners = np.empty(m, dtype=np.intp)
    step = max(1, 8_000_000 // (W.shape[0] * W.shape[1] + 1))
    for lo in range(0, m, step):
        block = coded[lo : lo + step]
        T = np.minimum(block[:, None, :], W[None, :, :]).sum(axis=2) / denom
        winners[lo : lo + step] = np.argmax(T, axis=1)
    cache: dict[int, Any] = {}
    out = []
    for w in winners:
        w = int(w)
        if w not in cache:
            q_agg, _ = aggregate_label_and_count(graph, w, params.L, params.delta)
            cache[w] = predict(class_probabilities(q_agg), graph.classes)
        out.append(cache[w])
    return out


class DatasetOracle:
    """Answers queries from labels seen on the stream so far."""

    def __init__(self):
        self._labels: dict[int, Any] = {}

    def remember(self, sample_id: int, label: Any) -> None:
        self._labels[sample_id] = label

    def __call__(self, sample_id: int) -> Any:
        return self._labels[sample_id]


def run_stream(
    engine: Engine,
    stream: Iterable[tuple[np.ndarray, Any]],
    eval_set: tuple[np.ndarray, Sequence] | None = None,
    eval_interval: int = 500,
) -> dict:
    """Fold the engine over (features, label) pairs, single pass.

    With an eval set attached, hold-out accuracy is recorded every
    `eval_interval` samples and once more at the end.  Returns a metrics
    dict; the engine keeps the trace and final graph.
    """
    oracle = DatasetOracle()
    curve: list[tuple[int, float]] = []

    def evaluate() -> float:
        R_test, y_test = eval_set
        preds = classify_many(engine.graph, R_test, engine.config.params)
        return float(np.mean([p == y for p, y in zip(preds, y_test)]))

    n = 0
    for r, y in iter(stream):
        oracle.remember(engine.t, y)
        engine.process(r, y, oracle)
        n += 1
        if eval_set is not None and n % eval_interval == 0:
            curve.append((n, evaluate()))
    final_acc = None
    if eval_set is not None:
        if not curve or curve[-1][0] != n:
            curve.append((n, evaluate()))
        final_acc = curve[-1][1]
    per_class: dict = {}
    for c, mass in zip(engine.graph.classes, engine.graph.densities.sum(axis=0)):
        per_class[c] = int(mass)
    return {
        "samples": n,
        "nodes": engine.graph.n_nodes,
        "queries": engine.queries_issued,
        "labels": engine.labels_received,
        "skips": engine.skips,
        "labels_per_class": per_class,
        "accuracy": final_acc,
        "accuracy_curve": curve,
        "ms_per_sample": engine.mean_ms_per_sample(),
    }
