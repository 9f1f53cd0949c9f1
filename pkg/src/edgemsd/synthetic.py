"""Synthetic school-friendship networks and small test graphs.

The school model stands in for survey friendship networks that cannot be
redistributed: nodes sit in grade blocks, most ties stay within a grade, and
a share of new ties close triangles so the graph has the clustering typical
of friendship data.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph

# (name, nodes, edges) of the three survey networks the defaults mimic
SCHOOL_SIZES = (
    ("school15", 1089, 5370),
    ("school20", 922, 5229),
    ("school75", 1011, 5459),
)


def school_network(
    n_nodes: int,
    n_edges: int,
    rng: np.random.Generator,
    n_grades: int = 6,
    within_grade: float = 0.8,
    closure: float = 0.5,
) -> Graph:
    """Random friendship graph with exactly ``n_nodes`` nodes and ``n_edges`` edges.

    Every node first gets one random friend so none is isolated. Then each
    new tie starts at a uniformly chosen node u and, with probability
    ``closure``, goes to a friend of a friend; otherwise to a random node of
    u's grade (probability ``within_grade``) or of the whole school.
    """
    max_edges = n_nodes * (n_nodes - 1) // 2
    if not 0 < n_edges <= max_edges:
        raise ValueError(f"n_edges must lie in 1..{max_edges}")
    grade = rng.integers(0, n_grades, size=n_nodes)
    members = [np.flatnonzero(grade == k) for k in range(n_grades)]
    nbrs: list[set[int]] = [set() for _ in range(n_nodes)]
    nbr_list: list[list[int]] = [[] for _ in range(n_nodes)]
    edges: list[tuple[int, int]] = []

    def add(u: int, v: int) -> bool:
        if u == v or v in nbrs[u] or len(edges) >= n_edges:
            return False
        nbrs[u].add(v)
        nbrs[v].add(u)
        nbr_list[u].append(v)
        nbr_list[v].append(u)
        edges.append((u, v))
        return True

    def random_partner(u: int) -> int:
        pool = members[grade[u]] if rng.random() < within_grade and len(members[grade[u]]) > 1 else None
        if pool is None:
            return int(rng.integers(n_nodes))
        return int(pool[rng.integers(len(pool))])

    for u in rng.permutation(n_nodes).tolist():
        if not nbrs[u]:
            v = random_partner(u)
            while v == u:
                v = int(rng.integers(n_nodes))
            add(u, v)
    while len(edges) < n_edges:
        u = int(rng.integers(n_nodes))
        if rng.random() < closure and nbr_list[u]:
            w = nbr_list[u][rng.integers(len(nbr_list[u]))]
            v = nbr_list[w][rng.integers(len(nbr_list[w]))]
        else:
            v = random_partner(u)
        add(u, v)
    return Graph([str(i) for i in range(n_nodes)], edges)


def grid_graph(rows: int, cols: int) -> Graph:
    """Rectangular lattice with labels ``r_c``."""
    labels = [f"{r}_{c}" for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                edges.append((i, i + 1))
            if r + 1 < rows:
                edges.append((i, i + cols))
    return Graph(labels, edges)
