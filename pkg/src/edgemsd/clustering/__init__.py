"""Community structure of the infected subnetwork.

Edge clusterers return an :class:`EdgeClusterAssignment` (label 0 marks
noise edges); node clusterers return a :class:`NodeClusterAssignment`.
Either can be turned into the binary node-by-cluster
:func:`membership` matrix consumed by the detector.

New clusterers are plugged in through :func:`register`; each is a callable
``fn(sub, *, rng, min_cluster_size) -> assignment``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import ClusteringError
from ..graph import Subgraph


@dataclass(frozen=True, eq=False)
class EdgeClusterAssignment:
    labels: np.ndarray  # per edge of sub.edge_list; 0 = noise, else 1..K
    k: int
    method: str = "link"
    partition_density: float | None = None
    cut_labels: np.ndarray | None = field(default=None, repr=False)
    cut_density: float | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if labels.size and (labels.min() < 0 or labels.max() > self.k):
            raise ClusteringError(f"edge labels must lie in 0..{self.k}")


@dataclass(frozen=True, eq=False)
class NodeClusterAssignment:
    labels: np.ndarray  # per node of sub, 1..K
    k: int
    method: str
    modularity: float | None = None
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if labels.size and set(np.unique(labels).tolist()) != set(range(1, self.k + 1)):
            raise ClusteringError(f"node labels must cover exactly 1..{self.k}")


def relabel_by_first_node(labels) -> tuple[np.ndarray, int]:
    """Renumber arbitrary cluster ids to 1..K in order of first appearance."""
    mapping: dict = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, c in enumerate(labels):
        if c not in mapping:
            mapping[c] = len(mapping) + 1
        out[i] = mapping[c]
    return out, len(mapping)


def membership(sub: Subgraph, assignment) -> np.ndarray:
    """Binary ``N_I x K`` matrix; row i has a 1 in column k iff node i touches cluster k."""
    k = assignment.k
    n = sub.n_nodes
    b = np.zeros((n, k), dtype=np.int8)
    if isinstance(assignment, EdgeClusterAssignment):
        if len(assignment.labels) != sub.n_edges:
            raise ClusteringError(
                f"assignment covers {len(assignment.labels)} edges, subnetwork has {sub.n_edges}"
            )
        edges = sub.edge_list
        keep = assignment.labels > 0
        cols = assignment.labels[keep] - 1
        b[edges[keep, 0], cols] = 1
        b[edges[keep, 1], cols] = 1
    elif isinstance(assignment, NodeClusterAssignment):
        if len(assignment.labels) != n:
            raise ClusteringError(
                f"assignment covers {len(assignment.labels)} nodes, subnetwork has {n}"
            )
        b[np.arange(n), assignment.labels - 1] = 1
    else:
        raise TypeError(f"unsupported assignment type {type(assignment).__name__}")
    return b


_REGISTRY: dict[str, Callable] = {}


def register(name: str, fn: Callable) -> None:
    _REGISTRY[name] = fn


def get_clusterer(name: str) -> Callable:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ClusteringError(f"unknown clusterer {name!r}; choose from {sorted(_REGISTRY)}") from None


def available() -> list[str]:
    return sorted(_REGISTRY)


from .eigen import leading_eigenvector  # noqa: E402
from .link import edge_similarity, link_communities, partition_density  # noqa: E402
from .louvain import louvain, modularity  # noqa: E402

register("link", lambda sub, rng=None, min_cluster_size=3: link_communities(sub, min_cluster_size))
register("link-fixed", lambda sub, rng=None, min_cluster_size=3: link_communities(sub, min_cluster_size, 0.0))
register("louvain", lambda sub, rng=None, min_cluster_size=3: louvain(sub.graph, rng))
register("eigen", lambda sub, rng=None, min_cluster_size=3: leading_eigenvector(sub.graph))

__all__ = [
    "EdgeClusterAssignment",
    "NodeClusterAssignment",
    "available",
    "edge_similarity",
    "get_clusterer",
    "leading_eigenvector",
    "link_communities",
    "louvain",
    "membership",
    "modularity",
    "partition_density",
    "register",
]
