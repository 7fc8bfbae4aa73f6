"""Self-growing topological graph over a normalized feature stream.

Prototype nodes are hyperrectangle categories in complement-coded space.
Each incoming sample either resonates with (updates) an existing node or
spawns a new one; nodes that clear the vigilance threshold together
accumulate symmetric co-activation counts, which define bounded edge
weights usable for message passing without normalization.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Hyperparams",
    "DEFAULT_PARAMS",
    "Node",
    "TopoGraph",
    "complement_code",
    "match_degree",
    "choice_value",
]


@dataclass(frozen=True)
class Hyperparams:
    """Model parameters. Field names double as config-file keys."""

    alpha: float = 0.01  # choice parameter, > 0
    beta: float = 0.5    # learning rate, (0, 1]
    rho: float = 0.95    # vigilance, (0, 1)
    delta: float = 0.1   # propagation rate, [0, 1]
    tau: float = 0.7     # epistemic/aleatoric mix, [0, 1]
    k_e: float = 1.0     # epistemic sensitivity, > 0
    k_d: float = 0.01    # density sensitivity, > 0
    L: int = 3           # message-passing layers, >= 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must be in (0, 1), got {self.rho}")
        if not 0 <= self.delta <= 1:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if not 0 <= self.tau <= 1:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if not self.k_e > 0:
            raise ValueError(f"k_e must be > 0, got {self.k_e}")
        if not self.k_d > 0:
            raise ValueError(f"k_d must be > 0, got {self.k_d}")
        if not (isinstance(self.L, int) and self.L >= 0):
            raise ValueError(f"L must be an integer >= 0, got {self.L}")


DEFAULT_PARAMS = Hyperparams()


@dataclass
class Node:
    """Read-only view of one category node (arrays are copies)."""

    id: int
    w: np.ndarray           # weight in [0,1]^{2*dim}
    d: int                  # winning count, >= 1
    q: np.ndarray           # per-class label density, len == |C|


def complement_code(r: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return [r, 1 - r]. Components of r must lie in [0, 1]."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or r.size < 1:
        raise ValueError("feature vector must be 1-D and non-empty")
    if np.any(r < 0.0) or np.any(r > 1.0) or not np.all(np.isfinite(r)):
        raise ValueError("feature components must lie in [0, 1]")
    return np.concatenate([r, 1.0 - r])


def coded_l1(coded: np.ndarray) -> float:
    """L1 norm of a complement-coded vector, summed complement-pair first.

    Pairing each component with its complement makes every partial term
    exactly 1.0 in IEEE double, so the result is exactly dim (the norm
    identity holds with no tolerance).
    """
    n = coded.size // 2
    return float(np.sum(coded[:n] + coded[n:]))


def match_degree(coded: np.ndarray, w: np.ndarray) -> float:
    """Similarity ||I ^ w||_1 / ||I||_1 with ^ the elementwise minimum.

    Numerator and denominator share one summation scheme, so the value is
    exactly 1.0 when w >= I elementwise and never exceeds 1.0.
    """
    if coded.shape != w.shape:
        raise ValueError(f"dimension mismatch: {coded.shape} vs {w.shape}")
    return float(np.sum(np.minimum(coded, w)) / np.sum(coded))


def choice_value(coded: np.ndarray, w: np.ndarray, alpha: float) -> float:
    """Selection value ||I ^ w||_1 / (alpha + ||w||_1)."""
    if coded.shape != w.shape:
        raise ValueError(f"dimension mismatch: {coded.shape} vs {w.shape}")
    return float(np.sum(np.minimum(coded, w)) / (alpha + np.sum(w)))


class TopoGraph:
    """Category nodes, symmetric co-activation counts, and the known class set.

    Single-writer: one stream mutates a graph instance at a time.  Node ids
    are append-only integers; nothing is ever deleted.
    """

    def __init__(self, dim: int, capacity: int = 64):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        self.n_nodes = 0
        self.classes: list = []            # observed labels, in first-seen order
        self._class_index: dict = {}       # label -> column in _q
        self._W = np.zeros((capacity, 2 * dim))
        self._d = np.zeros(capacity, dtype=np.int64)
        self._q = np.zeros((capacity, 0))
        self._adj: list[dict[int, int]] = []   # node -> {neighbor: count}, mirrored
        self._label_mass = 0               # total labels routed into q

    # -- capacity/bookkeeping ------------------------------------------------

    def _grow(self) -> None:
        cap = self._W.shape[0] * 2
        self._W = np.resize(self._W, (cap, self._W.shape[1]))
        self._d = np.resize(self._d, cap)
        q = np.zeros((cap, self._q.shape[1]))
        q[: self.n_nodes] = self._q[: self.n_nodes]
        self._q = q

    @property
    def weights(self) -> np.ndarray:
        """(n_nodes, 2*dim) view of node weights. Do not mutate."""
        return self._W[: self.n_nodes]

    @property
    def counts(self) -> np.ndarray:
        """(n_nodes,) view of winning counts. Do not mutate."""
        return self._d[: self.n_nodes]

    @property
    def densities(self) -> np.ndarray:
        """(n_nodes, |C|) view of label densities. Do not mutate."""
        return self._q[: self.n_nodes]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def label_mass(self) -> int:
        """Total number of oracle labels accumulated across all nodes."""
        return self._label_mass

    def node(self, i: int) -> Node:
        self._check_id(i)
        return Node(id=i, w=self._W[i].copy(), d=int(self._d[i]), q=self._q[i].copy())

    def _check_id(self, i: int) -> None:
        if not 0 <= i < self.n_nodes:
            raise KeyError(f"unknown node id {i}")

    # -- activation and learning ---------------------------------------------

    def activate(self, coded: np.ndarray, params: Hyperparams) -> tuple[np.ndarray, int | None]:
        """Return (activated ids ascending, winner id or None).

        Activated nodes are those whose match degree clears the vigilance
        threshold; the winner maximizes the choice value, ties going to the
        lowest id.
        """
        if coded.shape != (2 * self.dim,):
            raise ValueError(f"coded input must have shape ({2 * self.dim},)")
        n = self.n_nodes
        if n == 0:
            return np.empty(0, dtype=np.int64), None
        W = self._W[:n]
        inter = np.minimum(coded, W).sum(axis=1)
        M = inter / np.sum(coded)
        activated = np.nonzero(M >= params.rho)[0]
        if activated.size == 0:
            return activated, None
        T = inter[activated] / (params.alpha + W[activated].sum(axis=1))
        winner = int(activated[np.argmax(T)])   # argmax takes first max: lowest id
        return activated, winner

    def learn(self, coded: np.ndarray, params: Hyperparams) -> tuple[int, np.ndarray, bool]:
        """One learning event. Returns (winner id, activated ids, created).

        No activation: append a fresh node carrying the input.  Otherwise
        blend the input into the winner, bump its winning count, and count a
        co-activation with every other activated node.
        """
        activated, winner = self.activate(coded, params)
        if winner is None:
            winner = self._append_node(coded)
            return winner, activated, True
        w = self._W[winner]
        np.minimum(coded, w, out=self._min_scratch())
        w *= 1.0 - params.beta
        w += params.beta * self._min_scratch()
        self._d[winner] += 1
        adj_w = self._adj[winner]
        for v in activated:
            v = int(v)
            if v == winner:
                continue
            c = adj_w.get(v, 0) + 1
            adj_w[v] = c
            self._adj[v][winner] = c
        return winner, activated, False

    def _min_scratch(self) -> np.ndarray:
        buf = getattr(self, "_scratch", None)
        if buf is None:
            buf = self._scratch = np.empty(2 * self.dim)
        return buf

    def _append_node(self, coded: np.ndarray) -> int:
        if self.n_nodes == self._W.shape[0]:
            self._grow()
        i = self.n_nodes
        self._W[i] = coded
        self._d[i] = 1
        self._q[i] = 0.0
        self._adj.append({})
        self.n_nodes += 1
        return i

    # -- edges -----------------------------------------------------------------

    def edge_count(self, i: int, j: int) -> int:
        self._check_id(i)
        self._check_id(j)
        if i == j:
            raise ValueError("no self edges")
        return self._adj[i].get(j, 0)

    def edge_weight(self, i: int, j: int) -> float:
        """Co-activation ratio c_ij / (d_i + d_j); 0 when never co-activated."""
        c = self.edge_count(i, j)
        if c == 0:
            return 0.0
        return c / float(self._d[i] + self._d[j])

    def neighbors(self, i: int) -> dict[int, int]:
        """{neighbor id: co-activation count} for nodes with count > 0."""
        self._check_id(i)
        return self._adj[i]

    def edge_counts(self) -> Iterator[tuple[int, int, int]]:
        """Yield (i, j, c) once per unordered pair, i < j, insertion order."""
        for i in range(self.n_nodes):
            for j, c in self._adj[i].items():
                if j > i:
                    yield i, j, c

    def set_edge_count(self, i: int, j: int, c: int) -> None:
        """Directly set a pair count (snapshot loading and test graphs)."""
        self._check_id(i)
        self._check_id(j)
        if i == j or c < 0:
            raise ValueError("need i != j and c >= 0")
        if c == 0:
            self._adj[i].pop(j, None)
            self._adj[j].pop(i, None)
        else:
            self._adj[i][j] = c
            self._adj[j][i] = c

    def add_node_raw(self, w: np.ndarray, d: int = 1, q: Sequence[float] | None = None) -> int:
        """Append a node with explicit state (snapshot loading and test graphs)."""
        w = np.asarray(w, dtype=np.float64)
        i = self._append_node(w)
        self._d[i] = d
        if q is not None:
            q = np.asarray(q, dtype=np.float64)
            if q.size != self.n_classes:
                raise ValueError("q must have one entry per known class")
            self._q[i] = q
            self._label_mass += int(round(float(q.sum())))
        return i

    # -- labels ------------------------------------------------------------------

    def expand_classes(self, y_new) -> list:
        """Admit a new class label; every node's density gains a zero entry.

        Adding an already-known class is a no-op.
        """
        if y_new in self._class_index:
            return self.classes
        self._class_index[y_new] = len(self.classes)
        self.classes.append(y_new)
        q = np.zeros((self._q.shape[0], len(self.classes)))
        q[: self.n_nodes, :-1] = self._q[: self.n_nodes]
        self._q = q
        return self.classes

    def add_label(self, node_id: int, y) -> None:
        """Route one oracle label into a node's density."""
        self._check_id(node_id)
        if y not in self._class_index:
            self.expand_classes(y)
        self._q[node_id, self._class_index[y]] += 1.0
        self._label_mass += 1

    def class_of(self, index: int):
        return self.classes[index]

    # -- serialization ----------------------------------------------------------

    def to_snapshot(self) -> dict:
        """JSON-ready snapshot: nodes (w, d, q), edge counts, class set."""
        return {
            "dim": self.dim,
            "classes": [_json_label(c) for c in self.classes],
            "nodes": [
                {
                    "id": i,
                    "w": self._W[i].tolist(),
                    "d": int(self._d[i]),
                    "q": self._q[i].tolist(),
                }
                for i in range(self.n_nodes)
            ],
            "edges": sorted([i, j, c] for i, j, c in self.edge_counts()),
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "TopoGraph":
        g = cls(dim=snap["dim"])
        for y in snap["classes"]:
            g.expand_classes(y)
        for nd in snap["nodes"]:
            g.add_node_raw(np.asarray(nd["w"]), d=nd["d"], q=np.asarray(nd["q"]))
        for i, j, c in snap["edges"]:
            g.set_edge_count(i, j, c)
        return g

    def state_hash(self) -> str:
        """SHA-256 over the canonical snapshot JSON."""
        blob = json.dumps(self.to_snapshot(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _json_label(y):
    """Class labels must survive a JSON round trip unchanged."""
    if isinstance(y, (np.integer,)):
        return int(y)
    return y
