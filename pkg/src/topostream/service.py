"""Session-oriented HTTP interface to the stream engine.

Each session owns one engine consuming one materialized dataset stream.
Clients advance it (`step`, `pacing`), answer label queries (`label`),
and watch it through a gapless, resumable event feed (`events`) plus
point-in-time `state`/`snapshot` reads.

Event kinds: sample_processed, query_requested, label_accepted,
window_rolled, eval_point, end_of_stream.  Every payload carries "v": 1.
"""

from __future__ import annotations

import dataclasses
import json
import threading
import time
import uuid
from typing import Any, Iterator

import numpy as np
from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from topostream.datasets import DataSpec, materialize
from topostream.engine import SKIPPED, Engine, EngineConfig, classify_many
from topostream.graph import Hyperparams
from topostream.inference import UNLABELED, class_probabilities, predict
from topostream.message_passing import aggregate_label_and_count

__all__ = ["SessionRegistry", "create_app", "serve"]

V = 1
PARAM_KEYS = ("alpha", "beta", "rho", "delta", "tau", "k_e", "k_d", "L")
ENGINE_KEYS = ("B", "W", "strategy", "score", "seed")
DATA_KEYS = ("source", "k", "dims", "spread", "ratios", "n_train", "n_test", "seed", "shuffle")


def _configs_from_payload(body: dict) -> tuple[EngineConfig, DataSpec, dict]:
    """Build engine/data configs from a flat JSON payload, naming bad fields."""
    cfg = dict(body.get("config") or {})
    data = dict(body.get("data") or {})
    try:
        params = Hyperparams(**{k: cfg[k] for k in PARAM_KEYS if k in cfg})
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=f"config: {exc}") from exc
    try:
        engine_cfg = EngineConfig(
            params=params, **{k: cfg[k] for k in ENGINE_KEYS if k in cfg}
        )
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=f"config: {exc}") from exc
    unknown = set(data) - set(DATA_KEYS)
    if unknown:
        raise HTTPException(status_code=422, detail=f"data: unknown keys {sorted(unknown)}")
    try:
        data_spec = DataSpec(**data)
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=f"data: {exc}") from exc
    options = {
        "oracle": body.get("oracle", "human"),
        "eval_interval": int(body.get("eval_interval", 500)),
        "query_deadline_s": float(body.get("query_deadline_s", 120.0)),
    }
    if options["oracle"] not in ("human", "dataset"):
        raise HTTPException(status_code=422, detail="oracle must be 'human' or 'dataset'")
    return engine_cfg, data_spec, options


class Session:
    """One engine plus its stream, event log, and pending-query slot."""

    def __init__(self, engine_cfg: EngineConfig, data_spec: DataSpec, options: dict):
        self.id = uuid.uuid4().hex[:12]
        stream, test, dims = materialize(data_spec)
        self.samples = list(stream)            # (features, label) pairs, in order
        self.test = test
        self.engine = Engine(dim=dims, config=engine_cfg, keep_trace=False)
        self.oracle_mode = options["oracle"]
        self.eval_interval = options["eval_interval"]
        self.query_deadline_s = options["query_deadline_s"]
        self.lock = threading.RLock()
        self.events: list[dict] = []
        self.new_event = threading.Condition(self.lock)
        self.pending: dict | None = None       # {sample_id, node_id, features, deadline}
        self.decision = None                   # QueryDecision backing `pending`
        self.curve: list[tuple[int, float]] = []
        self.pacing_rate = 0.0
        self._pacer: threading.Thread | None = None
        self.done = False

    # -- events ------------------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> None:
        self.events.append({"v": V, "seq": len(self.events), "kind": kind, **payload})
        self.new_event.notify_all()

    # -- stream control ------------------------------------------------------------

    def _check_deadline(self) -> None:
        if self.pending and time.monotonic() > self.pending["deadline"]:
            self._resolve(SKIPPED)

    def _resolve(self, label: Any) -> None:
        decision, pending = self.decision, self.pending
        self.pending = None
        self.decision = None
        skipped = label == SKIPPED
        self.engine.resolve(decision, label)
        self._emit(
            "label_accepted",
            {
                "sample_id": pending["sample_id"],
                "label": None if skipped else label,
                "skipped": skipped,
                "classes": list(self.engine.graph.classes),
            },
        )

    def step(self, count: int) -> int:
        """Advance up to `count` samples; stops early on a pending query."""
        with self.lock:
            self._check_deadline()
            if self.pending:
                raise HTTPException(status_code=409, detail="query pending")
            advanced = 0
            for _ in range(count):
                if self.engine.t >= len(self.samples):
                    if not self.done:
                        self.done = True
                        if len(self.test[0]) and (
                            not self.curve or self.curve[-1][0] != self.engine.t
                        ):
                            acc = self._evaluate()
                            self.curve.append((self.engine.t, acc))
                            self._emit("eval_point", {"t": self.engine.t, "accuracy": acc})
                        self._emit("end_of_stream", {"t": self.engine.t})
                    break
                r, y = self.samples[self.engine.t]
                rec, decision = self.engine.observe(r, y_true=y)
                advanced += 1
                t = self.engine.t - 1
                self._emit(
                    "sample_processed",
                    {
                        "t": t,
                        "winner": rec.winner,
                        "y_hat": rec.y_hat,
                        "u_e": rec.u_e,
                        "u_a": rec.u_a,
                        "u_t": rec.u_t,
                        "s_t": rec.s_t,
                        "queried": decision.query,
                        "n_nodes": self.engine.graph.n_nodes,
                        "n_classes": self.engine.graph.n_classes,
                        "node": self._node_render(rec.winner),
                    },
                )
                if self.engine.budget.t_p == 0:
                    self._emit("window_rolled", {"t": t, "b": self.engine.budget.b})
                if decision.query:
                    features = self.samples[decision.sample_id][0]
                    if self.oracle_mode == "dataset":
                        self._emit(
                            "query_requested",
                            {"sample_id": decision.sample_id, "node_id": decision.node_id,
                             "features": list(map(float, features)), "t": t},
                        )
                        self.decision = decision
                        self.pending = {"sample_id": decision.sample_id, "deadline": float("inf")}
                        self._resolve(self.samples[decision.sample_id][1])
                    else:
                        self.pending = {
                            "sample_id": decision.sample_id,
                            "node_id": decision.node_id,
                            "features": list(map(float, features)),
                            "deadline": time.monotonic() + self.query_deadline_s,
                        }
                        self.decision = decision
                        self._emit(
                            "query_requested",
                            {"sample_id": decision.sample_id, "node_id": decision.node_id,
                             "features": self.pending["features"], "t": t,
                             "deadline_s": self.query_deadline_s},
                        )
                        break   # stream pauses while a human query is pending
                if self.eval_interval and self.engine.t % self.eval_interval == 0 and len(self.test[0]):
                    acc = self._evaluate()
                    self.curve.append((self.engine.t, acc))
                    self._emit("eval_point", {"t": self.engine.t, "accuracy": acc})
            return advanced

    def _evaluate(self) -> float:
        X, y = self.test
        preds = classify_many(self.engine.graph, X, self.engine.config.params)
        return float(np.mean([p != UNLABELED and p == t for p, t in zip(preds, y)]))

    def _node_render(self, node_id: int) -> dict:
        node = self.engine.graph.node(node_id)
        return {
            "id": node_id,
            "pos": _decode_position(node.w, self.engine.graph.dim),
            "d": node.d,
            "q": node.q.tolist(),
        }

    def submit_label(self, sample_id: int, label: Any = None, skip: bool = False) -> None:
        with self.lock:
            self._check_deadline()
            if not self.pending:
                raise HTTPException(status_code=409, detail="no query pending")
            if sample_id != self.pending["sample_id"]:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale sample id {sample_id}; pending is {self.pending['sample_id']}",
                )
            self._resolve(SKIPPED if skip else label)

    # -- pacing ------------------------------------------------------------------

    def set_pacing(self, rate: float) -> None:
        if rate < 0:
            raise HTTPException(status_code=422, detail="rate must be >= 0")
        with self.lock:
            self.pacing_rate = rate
            if rate > 0 and (self._pacer is None or not self._pacer.is_alive()):
                self._pacer = threading.Thread(target=self._pace_loop, daemon=True)
                self._pacer.start()

    def _pace_loop(self) -> None:
        while True:
            with self.lock:
                rate = self.pacing_rate
                if rate <= 0 or self.done:
                    return
                self._check_deadline()
                if not self.pending:
                    self.step(1)
            time.sleep(1.0 / rate)

    # -- reads ---------------------------------------------------------------------

    def state(self) -> dict:
        with self.lock:
            self._check_deadline()
            b = self.engine.budget
            return {
                "v": V,
                "id": self.id,
                "t": self.engine.t,
                "total_samples": len(self.samples),
                "n_nodes": self.engine.graph.n_nodes,
                "n_classes": self.engine.graph.n_classes,
                "classes": list(self.engine.graph.classes),
                "budget": {"B": b.B, "W": b.W, "b": b.b, "t_p": b.t_p},
                "queries": self.engine.queries_issued,
                "labels": self.engine.labels_received,
                "skips": self.engine.skips,
                "pending_query": (
                    {
                        **{k: v for k, v in self.pending.items() if k != "deadline"},
                        "deadline_s": max(0.0, self.pending["deadline"] - time.monotonic()),
                    }
                    if self.pending
                    else None
                ),
                "pacing": self.pacing_rate,
                "done": self.done,
            }

    def snapshot(self) -> dict:
        with self.lock:
            g = self.engine.graph
            params = self.engine.config.params
            nodes = []
            for i in range(g.n_nodes):
                node = g.node(i)
                q_agg, _ = aggregate_label_and_count(g, i, params.L, params.delta)
                nodes.append(
                    {
                        "id": i,
                        "pos": _decode_position(node.w, g.dim),
                        "d": node.d,
                        "q": node.q.tolist(),
                        "predicted": predict(class_probabilities(q_agg), g.classes),
                    }
                )
            edges = [[i, j, g.edge_weight(i, j)] for i, j, _ in g.edge_counts()]
            return {
                "v": V,
                "id": self.id,
                "t": self.engine.t,
                "nodes": nodes,
                "edges": edges,
                "classes": list(g.classes),
                "accuracy_curve": [[n, a] for n, a in self.curve],
                "graph_hash": g.state_hash(),
            }

    def events_from(self, since: int, follow: bool, poll_s: float = 0.2) -> Iterator[str]:
        """Yield NDJSON events with seq > since; optionally wait for more.

        With follow=true the stream stays open until the session is done
        and fully delivered; without it, the backlog is served and closed.
        """
        cursor = since + 1
        while True:
            with self.lock:
                self._check_deadline()
                chunk = list(self.events[cursor:])
                cursor += len(chunk)
                finished = self.done and cursor >= len(self.events)
            if chunk:
                for e in chunk:
                    yield json.dumps(e) + "\n"
                continue
            if not follow or finished:
                return
            with self.new_event:
                if cursor >= len(self.events):
                    self.new_event.wait(timeout=poll_s)


def _decode_position(w: np.ndarray, dim: int) -> list[float]:
    """Center of the category box in the first two feature dimensions.

    Weights store [lower corner, 1 - upper corner]; the midpoint per
    dimension k is (w_k + (1 - w_{k+dim})) / 2.
    """
    k = min(dim, 2)
    return [float((w[i] + (1.0 - w[i + dim])) / 2.0) for i in range(k)]


class SessionRegistry:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, engine_cfg, data_spec, options) -> Session:
        s = Session(engine_cfg, data_spec, options)
        with self._lock:
            self._sessions[s.id] = s
        return s

    def get(self, session_id: str) -> Session:
        with self._lock:
            s = self._sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return s


def create_app(registry: SessionRegistry | None = None) -> FastAPI:
    registry = registry or SessionRegistry()
    app = FastAPI(title="topostream session service")
    # Browser clients are served from their own origin (e.g. a static dev
    # server); the service is a localhost tool, so allow any origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.registry = registry

    @app.post("/sessions")
    def create_session(body: dict = Body(default={})):
        engine_cfg, data_spec, options = _configs_from_payload(body)
        s = registry.create(engine_cfg, data_spec, options)
        return {"v": V, "id": s.id, "state": s.state()}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return registry.get(session_id).state()

    @app.post("/sessions/{session_id}/step")
    def step(session_id: str, body: dict = Body(default={})):
        count = int(body.get("count", 1))
        if count < 1:
            raise HTTPException(status_code=422, detail="count must be >= 1")
        s = registry.get(session_id)
        advanced = s.step(count)
        return {"v": V, "advanced": advanced, "state": s.state()}

    @app.post("/sessions/{session_id}/pacing")
    def pacing(session_id: str, body: dict = Body(default={})):
        if "rate" not in body:
            raise HTTPException(status_code=422, detail="missing 'rate'")
        s = registry.get(session_id)
        s.set_pacing(float(body["rate"]))
        return {"v": V, "pacing": s.pacing_rate}

    @app.post("/sessions/{session_id}/label")
    def label(session_id: str, body: dict = Body(...)):
        if "sample_id" not in body:
            raise HTTPException(status_code=422, detail="missing 'sample_id'")
        skip = bool(body.get("skip", False))
        if not skip and "label" not in body:
            raise HTTPException(status_code=422, detail="missing 'label' (or set skip)")
        s = registry.get(session_id)
        s.submit_label(int(body["sample_id"]), body.get("label"), skip)
        return {"v": V, "state": s.state()}

    @app.get("/sessions/{session_id}/snapshot")
    def snapshot(session_id: str):
        return registry.get(session_id).snapshot()

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, since: int = -1, follow: bool = True):
        s = registry.get(session_id)
        return StreamingResponse(
            s.events_from(since, follow), media_type="application/x-ndjson"
        )

    return app


def serve(host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the service (blocking)."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")
