"""Link communities: single-linkage edge clustering cut at maximum partition density.

Two edges sharing a keystone node k, ``(a, k)`` and ``(k, b)``, have
similarity ``|n+(a) & n+(b)| / |n+(a) | n+(b)|`` where ``n+(x)`` is x together
with its neighbors. Edges are merged level by level in decreasing
similarity; the level with the highest partition density is kept (ties go
to the coarser level). Clusters of that cut that are too small become noise:
a cluster is kept when it has at least ``min_cluster_size`` edges and at
least ``min_cluster_share`` of all edges, except that the share rule never
discards the largest cluster.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

import numpy as np

from ..errors import ClusteringError
from ..graph import Subgraph


def edge_similarity(sub: Subgraph, m1: int, m2: int) -> float:
    edges = sub.edge_list
    e1 = (int(edges[m1, 0]), int(edges[m1, 1]))
    e2 = (int(edges[m2, 0]), int(edges[m2, 1]))
    shared = set(e1) & set(e2)
    if m1 == m2 or len(shared) != 1:
        raise ClusteringError(f"edges {m1} and {m2} do not share exactly one endpoint")
    (k,) = shared
    a = e1[0] if e1[1] == k else e1[1]
    b = e2[0] if e2[1] == k else e2[1]
    adj = sub.graph.adjacency
    na = set(adj[a]) | {a}
    nb = set(adj[b]) | {b}
    return len(na & nb) / len(na | nb)


def _density_term(m: int, n: int) -> Fraction:
    if n <= 2:
        return Fraction(0)
    return Fraction(m * (m - (n - 1)), (n - 2) * (n - 1))


def partition_density(sub: Subgraph, assignment) -> float:
    """``(2/M) * sum_c m_c (m_c - n_c + 1) / ((n_c - 2)(n_c - 1))`` over non-noise clusters."""
    labels = np.asarray(assignment.labels if hasattr(assignment, "labels") else assignment)
    m_total = sub.n_edges
    if m_total == 0:
        return 0.0
    if len(labels) != m_total:
        raise ClusteringError(f"assignment covers {len(labels)} edges, subnetwork has {m_total}")
    edges = sub.edge_list
    total = Fraction(0)
    for c in np.unique(labels):
        if c <= 0:
            continue
        sel = edges[labels == c]
        total += _density_term(len(sel), len(np.unique(sel)))
    return float(2 * total / m_total)


def _similar_pairs(sub: Subgraph) -> list[tuple[float, int, int]]:
    """All adjacent edge pairs ``(similarity, m1, m2)`` with ``m1 < m2``."""
    adj = sub.graph.adjacency
    incl = [frozenset(nb) | {v} for v, nb in enumerate(adj)]
    incident: list[list[tuple[int, int]]] = [[] for _ in adj]
    for m, (i, j) in enumerate(sub.edge_list.tolist()):
        incident[i].append((m, j))
        incident[j].append((m, i))
    cache: dict[tuple[int, int], float] = {}
    pairs = []
    for inc in incident:
        for (m1, a), (m2, b) in combinations(inc, 2):
            key = (a, b) if a < b else (b, a)
            s = cache.get(key)
            if s is None:
                na, nb = incl[a], incl[b]
                inter = len(na & nb)
                s = inter / (len(na) + len(nb) - inter)
                cache[key] = s
            pairs.append((s, m1, m2) if m1 < m2 else (s, m2, m1))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    return pairs


class _Dendrogram:
    """Union-find over edges tracking per-cluster edge and node counts."""

    def __init__(self, edges: np.ndarray):
        self.parent = list(range(len(edges)))
        self.m = [1] * len(edges)
        self.nodes = [{int(i), int(j)} for i, j in edges]
        self.n_clusters = len(edges)
        self.density_sum = Fraction(0)  # clusters with one edge contribute 0

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        # smaller root id survives, keeping the structure order-independent
        if ry < rx:
            rx, ry = ry, rx
        self.density_sum -= _density_term(self.m[rx], len(self.nodes[rx]))
        self.density_sum -= _density_term(self.m[ry], len(self.nodes[ry]))
        small, big = sorted((self.nodes[rx], self.nodes[ry]), key=len)
        big |= small
        self.nodes[rx] = big
        self.nodes[ry] = set()
        self.m[rx] += self.m[ry]
        self.parent[ry] = rx
        self.n_clusters -= 1
        self.density_sum += _density_term(self.m[rx], len(self.nodes[rx]))


def dendrogram_levels(sub: Subgraph, pairs: list | None = None) -> list[dict]:
    """Partition density at every similarity level of the single-linkage sweep.

    Level 0 is the all-singletons partition; level ``t`` holds every merge
    with similarity >= its threshold. Each entry has ``threshold``,
    ``n_clusters``, ``density`` and ``n_pairs`` (merge pairs consumed).
    """
    m_total = sub.n_edges
    dendro = _Dendrogram(sub.edge_list)
    levels = [{"threshold": None, "n_clusters": dendro.n_clusters, "density": Fraction(0), "n_pairs": 0}]
    if pairs is None:
        pairs = _similar_pairs(sub)
    pos = 0
    while pos < len(pairs):
        s = pairs[pos][0]
        while pos < len(pairs) and pairs[pos][0] == s:
            dendro.union(pairs[pos][1], pairs[pos][2])
            pos += 1
        levels.append(
            {
                "threshold": s,
                "n_clusters": dendro.n_clusters,
                "density": 2 * dendro.density_sum / m_total,
                "n_pairs": pos,
            }
        )
    return levels


DEFAULT_MIN_SHARE = 0.10


def link_communities(sub: Subgraph, min_cluster_size: int = 3, min_cluster_share: float = DEFAULT_MIN_SHARE):
    """Cluster the edges of ``sub``; see the module docstring.

    The unfiltered dendrogram cut is kept in ``cut_labels`` and its
    partition density in ``cut_density``.
    """
    from . import EdgeClusterAssignment

    m_total = sub.n_edges
    if m_total == 0:
        raise ClusteringError("no infected edges")
    if min_cluster_size < 1:
        raise ClusteringError("min_cluster_size must be >= 1")
    if not 0.0 <= min_cluster_share <= 1.0:
        raise ClusteringError("min_cluster_share must lie in [0, 1]")
    all_pairs = _similar_pairs(sub)
    levels = dendrogram_levels(sub, all_pairs)
    best = levels[0]
    for lev in levels[1:]:
        # later levels are coarser, so >= prefers fewer clusters on ties
        if lev["density"] >= best["density"]:
            best = lev
    dendro = _Dendrogram(sub.edge_list)
    for _, m1, m2 in all_pairs[: best["n_pairs"]]:
        dendro.union(m1, m2)
    roots = [dendro.find(m) for m in range(m_total)]
    members: dict[int, list[int]] = {}
    for m, r in enumerate(roots):
        members.setdefault(r, []).append(m)
    clusters = sorted(members.values(), key=lambda ms: (-len(ms), ms[0]))
    cut = np.zeros(m_total, dtype=np.int64)
    for c, ms in enumerate(clusters, start=1):
        cut[ms] = c
    share_floor = min(math.ceil(min_cluster_share * m_total), len(clusters[0]))
    floor = max(min_cluster_size, share_floor)
    kept = [ms for ms in clusters if len(ms) >= floor]
    if not kept:
        raise ClusteringError("all edges noise; lower min_cluster_size")
    labels = np.zeros(m_total, dtype=np.int64)
    for c, ms in enumerate(kept, start=1):
        labels[ms] = c
    return EdgeClusterAssignment(
        labels, len(kept), "link", partition_density(sub, labels),
        cut_labels=cut, cut_density=float(best["density"]),
    )
