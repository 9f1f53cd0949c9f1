"""Newman's leading-eigenvector modularity bisection."""

from __future__ import annotations

import numpy as np
import scipy.sparse.csgraph as csgraph

from ..errors import ClusteringError
from ..graph import Graph

EIG_EPS = 1e-9


def leading_eigenvector(g: Graph):
    """Recursive spectral bisection on the (generalized) modularity matrix.

    Connected components are split apart first since no modularity gain can
    come from grouping them. Each group is then divided by the sign pattern
    of the leading eigenvector of
    ``B_g = B[g, g] - diag(row sums of B[g, g])``; a group is final when the
    leading eigenvalue is <= 1e-9 or the split gains no modularity.
    """
    from . import NodeClusterAssignment, relabel_by_first_node
    from .louvain import modularity

    if g.n_edges == 0:
        raise ClusteringError("leading eigenvector needs at least one edge")
    a = g.csr.toarray()
    k = g.degree.astype(np.float64)
    two_m = 2.0 * g.n_edges
    b = a - np.outer(k, k) / two_m

    _, comp = csgraph.connected_components(g.csr, directed=False)
    pending = [np.flatnonzero(comp == c) for c in range(comp.max() + 1)]
    final: list[np.ndarray] = []
    while pending:
        group = pending.pop()
        if len(group) < 2:
            final.append(group)
            continue
        bg = b[np.ix_(group, group)]
        bg = bg - np.diag(bg.sum(axis=1))
        try:
            vals, vecs = np.linalg.eigh(bg)
        except np.linalg.LinAlgError as exc:
            raise ClusteringError(f"eigendecomposition failed on a group of {len(group)} nodes: {exc}") from exc
        lead_val = vals[-1]
        if lead_val <= EIG_EPS:
            final.append(group)
            continue
        vec = vecs[:, -1]
        s = np.where(vec >= 0, 1.0, -1.0)
        gain = float(s @ bg @ s) / (2.0 * two_m)
        if gain <= EIG_EPS or abs(s.sum()) == len(s):
            final.append(group)
            continue
        pending.append(group[s > 0])
        pending.append(group[s < 0])

    raw = np.empty(g.n_nodes, dtype=np.int64)
    for cid, group in enumerate(sorted(final, key=lambda grp: grp.min())):
        raw[group] = cid
    labels, n_clusters = relabel_by_first_node(raw.tolist())
    return NodeClusterAssignment(labels, n_clusters, "eigen", modularity(g, labels))
