"""L-layer information aggregation over the topological graph.

Propagates any non-negative per-node field (label densities, winning
counts) toward a target node along co-activation edge weights:

    X_i^(l) = X_i^(l-1) + delta * sum_j e_ij * X_j^(l-1)

Layers update synchronously from a frozen copy of the previous layer.
Only the target's final value is needed, so layer l touches just the
nodes within L-l hops of the target; this restriction is exact (the
dropped nodes cannot influence the target in the remaining layers).
"""

from __future__ import annotations

import numpy as np

from topostream.graph import TopoGraph

__all__ = ["neighbors", "layered_neighborhood", "aggregate", "aggregate_label_and_count"]


def neighbors(graph: TopoGraph, i: int) -> set[int]:
    """Direct neighbors of i: nodes with a positive co-activation count."""
    return set(graph.neighbors(i))


def layered_neighborhood(graph: TopoGraph, target: int, L: int) -> list[set[int]]:
    """BFS layers N^(0)..N^(L) by shortest-path distance from the target.

    Always returns L+1 sets; layers beyond the reachable component are empty.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    layers: list[set[int]] = [{target}]
    seen = {target}
    frontier = [target]
    for _ in range(L):
        nxt: set[int] = set()
        for v in frontier:
            for j in graph.neighbors(v):
                if j not in seen:
                    seen.add(j)
                    nxt.add(j)
        layers.append(nxt)
        frontier = sorted(nxt)
    return layers


def _neighborhood_plan(graph: TopoGraph, target: int, L: int):
    """Flatten the layered neighborhood into propagation-ready arrays.

    Returns (order, dist, nbrs): node ids grouped by layer (ascending ids
    within a layer), their distances, and for each updatable node the local
    indices + live edge weights of its direct neighbors.
    """
    layers = layered_neighborhood(graph, target, L)
    order: list[int] = []
    dist: list[int] = []
    for l, layer in enumerate(layers):
        for v in sorted(layer):
            order.append(v)
            dist.append(l)
    idx = {v: k for k, v in enumerate(order)}
    d = graph.counts
    nbrs: list[tuple[np.ndarray, np.ndarray] | None] = []
    for v, dv in zip(order, dist):
        if dv >= L:
            nbrs.append(None)  # frozen source in every layer, never updated
            continue
        adj = graph.neighbors(v)
        js = np.fromiter((idx[j] for j in adj), dtype=np.intp, count=len(adj))
        es = np.fromiter(
            (c / float(d[v] + d[j]) for j, c in adj.items()),
            dtype=np.float64,
            count=len(adj),
        )
        nbrs.append((js, es))
    return order, dist, nbrs


def _propagate(X: np.ndarray, dist: list[int], nbrs, L: int, delta: float) -> np.ndarray:
    """Run the recursion in place on local values ordered by layer."""
    for l in range(1, L + 1):
        cutoff = L - l
        prev = X.copy()
        for k, dv in enumerate(dist):
            if dv > cutoff:
                break  # dist is sorted; the rest are out of this layer's set
            nb = nbrs[k]
            if nb is None or nb[0].size == 0:
                continue
            js, es = nb
            X[k] = prev[k] + delta * (es @ prev[js])
    return X


def aggregate(graph: TopoGraph, target: int, field, L: int, delta: float):
    """Aggregated field value at the target after L layers.

    `field` holds one row (scalar or vector) per node id.  Returns a float
    for scalar fields, an array for vector fields.  Edge weights are read
    from the graph's current counts; no node state is touched.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must be in [0, 1]")
    field = np.asarray(field, dtype=np.float64)
    if not 0 <= target < graph.n_nodes:
        raise KeyError(f"unknown node id {target}")
    if L == 0 or delta == 0.0:
        out = field[target]
        return float(out) if field.ndim == 1 else out.copy()
    order, dist, nbrs = _neighborhood_plan(graph, target, L)
    X = field[order].astype(np.float64, copy=True)
    _propagate(X, dist, nbrs, L, delta)
    return float(X[0]) if field.ndim == 1 else X[0]


def aggregate_label_and_count(
    graph: TopoGraph, target: int, L: int, delta: float
) -> tuple[np.ndarray, float]:
    """Aggregate label density q and winning count d in one propagation.

    The recursion is componentwise, so q's columns and d stack into one
    field without changing any value.  Returns (q_agg, d_agg).
    """
    k = graph.n_classes
    if L == 0 or delta == 0.0 or graph.neighbors(target) == {}:
        return graph.densities[target].copy(), float(graph.counts[target])
    order, dist, nbrs = _neighborhood_plan(graph, target, L)
    X = np.empty((len(order), k + 1))
    X[:, :k] = graph.densities[order]
    X[:, k] = graph.counts[order]
    _propagate(X, dist, nbrs, L, delta)
    return X[0, :k].copy(), float(X[0, k])
