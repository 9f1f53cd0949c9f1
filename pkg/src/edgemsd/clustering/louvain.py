"""Louvain greedy modularity optimization."""

from __future__ import annotations

import numpy as np

from ..errors import ClusteringError
from ..graph import Graph

GAIN_EPS = 1e-9


def modularity(g: Graph, labels) -> float:
    """Newman-Girvan modularity of a node partition of ``g``."""
    m = g.n_edges
    if m == 0:
        raise ClusteringError("modularity is undefined on an edgeless graph")
    labels = np.asarray(labels)
    e = g.edges
    internal = labels[e[:, 0]] == labels[e[:, 1]]
    _, inv = np.unique(labels, return_inverse=True)
    in_w = np.bincount(inv[e[internal, 0]], minlength=inv.max() + 1)
    tot = np.bincount(inv, weights=g.degree, minlength=inv.max() + 1)
    return float(np.sum(in_w / m - (tot / (2.0 * m)) ** 2))


class _Level:
    """Weighted graph at one aggregation level; self-loop weight kept apart."""

    def __init__(self, nbrs: list[dict[int, float]], loops: list[float]):
        self.nbrs = nbrs
        self.loops = loops
        self.k = [sum(nb.values()) + 2.0 * lp for nb, lp in zip(nbrs, loops)]
        self.m = (sum(self.k)) / 2.0

    def __len__(self):
        return len(self.nbrs)

    def modularity(self, comm: list[int]) -> float:
        inner: dict[int, float] = {}
        tot: dict[int, float] = {}
        for u, nb in enumerate(self.nbrs):
            c = comm[u]
            tot[c] = tot.get(c, 0.0) + self.k[u]
            inner[c] = inner.get(c, 0.0) + self.loops[u]
            for v, w in nb.items():
                if comm[v] == c and u < v:
                    inner[c] += w
        m = self.m
        return sum(inner[c] / m - (tot[c] / (2 * m)) ** 2 for c in tot)

    def move_nodes(self, rng: np.random.Generator | None) -> tuple[list[int], bool]:
        n = len(self)
        comm = list(range(n))
        tot = list(self.k)
        m = self.m
        order = np.arange(n)
        if rng is not None:
            rng.shuffle(order)
        moved_any = False
        improved = True
        while improved:
            improved = False
            for u in order.tolist():
                cu = comm[u]
                ku = self.k[u]
                links: dict[int, float] = {}
                for v, w in self.nbrs[u].items():
                    cv = comm[v]
                    links[cv] = links.get(cv, 0.0) + w
                tot[cu] -= ku
                stay = links.get(cu, 0.0) / m - tot[cu] * ku / (2 * m * m)
                best_c, best_gain = cu, stay
                for c in sorted(links):
                    gain = links[c] / m - tot[c] * ku / (2 * m * m)
                    if gain > best_gain:
                        best_c, best_gain = c, gain
                if best_c != cu and best_gain - stay > GAIN_EPS:
                    comm[u] = best_c
                    improved = moved_any = True
                else:
                    best_c = cu
                tot[best_c] += ku
        return comm, moved_any

    def aggregate(self, comm: list[int]) -> tuple["_Level", list[int]]:
        ids = {c: i for i, c in enumerate(sorted(set(comm)))}
        new = [ids[c] for c in comm]
        n = len(ids)
        nbrs: list[dict[int, float]] = [{} for _ in range(n)]
        loops = [0.0] * n
        for u, nb in enumerate(self.nbrs):
            cu = new[u]
            loops[cu] += self.loops[u]
            for v, w in nb.items():
                if u >= v:
                    continue
                cv = new[v]
                if cu == cv:
                    loops[cu] += w
                else:
                    nbrs[cu][cv] = nbrs[cu].get(cv, 0.0) + w
                    nbrs[cv][cu] = nbrs[cv].get(cu, 0.0) + w
        return _Level(nbrs, loops), new


def louvain(g: Graph, rng: np.random.Generator | None = None):
    """Partition ``g`` by Louvain local moving and aggregation.

    Node visit order within each level is shuffled by ``rng`` (fixed index
    order when ``rng`` is None). The returned assignment records the
    modularity after every level in ``history``.
    """
    from . import NodeClusterAssignment, relabel_by_first_node

    if g.n_edges == 0:
        raise ClusteringError("louvain needs at least one edge")
    level = _Level([{v: 1.0 for v in nb} for nb in g.adjacency], [0.0] * g.n_nodes)
    node_comm = list(range(g.n_nodes))
    history = [level.modularity(list(range(len(level))))]
    while True:
        comm, moved = level.move_nodes(rng)
        if not moved:
            break
        level, new = level.aggregate(comm)
        node_comm = [new[c] for c in node_comm]
        history.append(level.modularity(list(range(len(level)))))
    labels, k = relabel_by_first_node(node_comm)
    return NodeClusterAssignment(labels, k, "louvain", modularity(g, labels), tuple(history))
