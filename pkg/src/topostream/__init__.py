"""Online active semi-supervised learning on a self-growing topological graph."""

from topostream.graph import (
    DEFAULT_PARAMS,
    Hyperparams,
    Node,
    TopoGraph,
    choice_value,
    complement_code,
    match_degree,
)

__all__ = [
    "DEFAULT_PARAMS",
    "Hyperparams",
    "Node",
    "TopoGraph",
    "choice_value",
    "complement_code",
    "match_degree",
]

__version__ = "0.1.0"
