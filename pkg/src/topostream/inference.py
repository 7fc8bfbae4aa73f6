"""Class probabilities, predictions, uncertainties, and query scores.

All pure functions over aggregated node statistics, plus `infer`, which
composes them with message passing into one per-sample record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from topostream.graph import Hyperparams, TopoGraph
from topostream.message_passing import aggregate_label_and_count

__all__ = [
    "UNLABELED",
    "InferenceRecord",
    "class_probabilities",
    "predict",
    "epistemic_uncertainty",
    "aleatoric_uncertainty",
    "combined_score",
    "density_weighted_score",
    "infer",
]

UNLABELED = "unlabeled"   # prediction before any class has ever been observed


@dataclass(frozen=True)
class InferenceRecord:
    """Everything computed for one sample after the learn step."""

    winner: int | None
    p: np.ndarray            # probability over known classes (may be empty)
    y_hat: Any               # class label, or UNLABELED when no class exists
    u_e: float               # label-scarcity uncertainty, [0,1]
    u_a: float               # class-mixing uncertainty, [0,1]
    u_t: float               # combined uncertainty, [0,1]
    s_t: float               # density-weighted query score, [0,1]
    d_agg: float             # aggregated winning count at the winner


def class_probabilities(q_agg: np.ndarray) -> np.ndarray:
    """Normalize aggregated label density; all-zero mass → uniform."""
    q_agg = np.asarray(q_agg, dtype=np.float64)
    if q_agg.size == 0:
        return q_agg.copy()
    total = q_agg.sum()
    if total <= 0.0:
        return np.full(q_agg.size, 1.0 / q_agg.size)
    return q_agg / total


def predict(p: np.ndarray, classes: list | None = None):
    """Most probable class; ties go to the lowest index; no classes → sentinel."""
    p = np.asarray(p)
    if p.size == 0:
        return UNLABELED
    idx = int(np.argmax(p))   # argmax picks the first maximum
    return classes[idx] if classes is not None else idx


def epistemic_uncertainty(q_agg: np.ndarray, k_e: float) -> float:
    """1 - tanh(k_e * total aggregated label mass); 1 when nothing is labeled."""
    total = float(np.sum(q_agg)) if np.size(q_agg) else 0.0
    return 1.0 - math.tanh(k_e * total)


def aleatoric_uncertainty(p: np.ndarray, class_count: int) -> float:
    """Entropy of p normalized by log of the class count; 0 when |C| <= 1.

    A constant distribution returns exactly 1.0 (maximal entropy by
    symmetry); the general ratio is clamped to [0,1] against last-ulp
    rounding spill.
    """
    if class_count <= 1:
        return 0.0
    p = np.asarray(p, dtype=np.float64)
    if np.all(p == p.flat[0]):
        return 1.0
    mask = p > 0.0
    h = -float(np.sum(p[mask] * np.log(p[mask])))
    return min(max(h / math.log(class_count), 0.0), 1.0)


def combined_score(u_e: float, u_a: float, tau: float) -> float:
    """tau-weighted mix of the two uncertainties."""
    return tau * u_e + (1.0 - tau) * u_a


def density_weighted_score(d_agg: float, u_t: float, k_d: float) -> float:
    """Uncertainty discounted by how much data the region has seen."""
    return math.tanh(k_d * d_agg) * u_t


def infer(graph: TopoGraph, winner: int, params: Hyperparams) -> InferenceRecord:
    """Aggregate q and d at the winner, then score the sample."""
    q_agg, d_agg = aggregate_label_and_count(graph, winner, params.L, params.delta)
    p = class_probabilities(q_agg)
    y_hat = predict(p, graph.classes)
    u_e = epistemic_uncertainty(q_agg, params.k_e)
    u_a = aleatoric_uncertainty(p, graph.n_classes)
    u_t = combined_score(u_e, u_a, params.tau)
    s_t = density_weighted_score(d_agg, u_t, params.k_d)
    return InferenceRecord(
        winner=winner, p=p, y_hat=y_hat,
        u_e=u_e, u_a=u_a, u_t=u_t, s_t=s_t, d_agg=d_agg,
    )
