"""Undirected simple graphs, infection subnetworks and normalized adjacency.

Nodes carry arbitrary string labels and are addressed internally by dense
indices ``0..N-1`` assigned in sorted label order (numeric order when every
label is an integer). All structures are immutable once built.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp

from .errors import EdgeListError, GraphError


def label_sort_key(labels: Iterable[str]):
    """Return a sort key putting integer-like label sets in numeric order."""
    labels = list(labels)
    try:
        for lab in labels:
            int(lab)
    except ValueError:
        return str
    return lambda lab: (int(lab), lab)


class Graph:
    """Immutable undirected simple graph.

    ``edges`` is an ``(M, 2)`` int array of pairs ``i < j`` sorted
    lexicographically; ``adjacency[i]`` is the sorted tuple of neighbors of i.
    """

    __slots__ = ("labels", "edges", "adjacency", "n_arcs", "n_self_loops", "__dict__")

    def __init__(
        self,
        labels: Sequence[str],
        edges: Iterable[tuple[int, int]] = (),
        n_arcs: int | None = None,
        n_self_loops: int = 0,
    ):
        labels = tuple(str(lab) for lab in labels)
        if len(set(labels)) != len(labels):
            raise GraphError("duplicate node labels")
        n = len(labels)
        pairs = set()
        loops = 0
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) references a node outside 0..{n - 1}")
            if i == j:
                loops += 1
                continue
            pairs.add((i, j) if i < j else (j, i))
        ordered = sorted(pairs)
        self.labels = labels
        self.edges = np.array(ordered, dtype=np.int64).reshape(-1, 2)
        self.edges.setflags(write=False)
        adj: list[list[int]] = [[] for _ in range(n)]
        for i, j in ordered:
            adj[i].append(j)
            adj[j].append(i)
        self.adjacency = tuple(tuple(sorted(a)) for a in adj)
        self.n_arcs = len(ordered) if n_arcs is None else n_arcs
        self.n_self_loops = n_self_loops + loops

    @classmethod
    def from_edges(cls, pairs: Iterable[tuple], nodes: Iterable = ()) -> "Graph":
        """Build a graph from label pairs, plus optional extra (isolated) nodes.

        Directed arcs are symmetrized; the number of distinct non-loop arcs is
        kept in ``n_arcs``.
        """
        pairs = [(str(a), str(b)) for a, b in pairs]
        all_labels = {str(v) for v in nodes}
        for a, b in pairs:
            all_labels.add(a)
            all_labels.add(b)
        labels = sorted(all_labels, key=label_sort_key(all_labels))
        index = {lab: i for i, lab in enumerate(labels)}
        arcs = {(a, b) for a, b in pairs if a != b}
        loops = sum(1 for a, b in pairs if a == b)
        return cls(
            labels,
            ((index[a], index[b]) for a, b in arcs),
            n_arcs=len(arcs),
            n_self_loops=loops,
        )

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def degree(self) -> np.ndarray:
        deg = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n_nodes)
        deg.setflags(write=False)
        return deg

    @cached_property
    def csr(self) -> sp.csr_array:
        """0/1 adjacency matrix in CSR form."""
        n = self.n_nodes
        if self.n_edges == 0:
            return sp.csr_array((n, n), dtype=np.float64)
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        mat = sp.csr_array((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        mat.sort_indices()
        return mat

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def has_edge(self, i: int, j: int) -> bool:
        adj = self.adjacency[i]
        k = np.searchsorted(adj, j)
        return k < len(adj) and adj[k] == j

    def lookup(self, labels: Iterable) -> list[int]:
        """Map external labels to indices, failing on the first unknown one."""
        out = []
        for lab in labels:
            try:
                out.append(self.index[str(lab)])
            except KeyError:
                raise GraphError(f"unknown node {lab!r}") from None
        return out

    def label_set(self, nodes: Iterable[int]) -> list[str]:
        return [self.labels[i] for i in sorted(nodes)]

    def edge_labels(self) -> list[tuple[str, str]]:
        return [(self.labels[i], self.labels[j]) for i, j in self.edges]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.labels, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def load_edge_list(
    source: TextIO | str,
    comment: str = "#",
    delimiter: str | None = None,
) -> Graph:
    """Read a whitespace (or ``delimiter``) separated edge list.

    ``source`` is an open text stream or a path. Every non-blank,
    non-comment line must hold exactly two node labels.
    """
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            return load_edge_list(fh, comment=comment, delimiter=delimiter)
    pairs = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or (comment and line.startswith(comment)):
            continue
        tokens = line.split(delimiter)
        tokens = [t.strip() for t in tokens]
        if len(tokens) != 2 or not all(tokens):
            raise EdgeListError(f"expected 2 node labels, found {len(tokens)}: {line!r}", line=lineno)
        pairs.append((tokens[0], tokens[1]))
    if not pairs:
        raise EdgeListError("edge list is empty")
    return Graph.from_edges(pairs)


def write_edge_list(g: Graph, stream: TextIO | None = None) -> str | None:
    """Write one ``label label`` line per undirected edge.

    Isolated nodes cannot be represented and are lost. Returns the text when
    no stream is given.
    """
    buf = stream if stream is not None else io.StringIO()
    for a, b in g.edge_labels():
        buf.write(f"{a} {b}\n")
    if stream is None:
        return buf.getvalue()
    return None


@dataclass(frozen=True)
class Subgraph:
    """Induced subgraph of a parent graph.

    ``nodes[r]`` is the parent index of local node ``r``; ``graph`` uses local
    indices with the parent's labels. ``edge_list`` is sorted by local
    endpoint indices, which doubles as the edge numbering used by clusterers.
    """

    nodes: tuple[int, ...]
    graph: Graph

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @property
    def edge_list(self) -> np.ndarray:
        return self.graph.edges

    @cached_property
    def local_index(self) -> dict[int, int]:
        return {v: r for r, v in enumerate(self.nodes)}


# The infected subnetwork G_I is an induced subgraph over the infected nodes.
InfectedSubnetwork = Subgraph


def _check_members(g: Graph, nodes: Iterable[int]) -> list[int]:
    out = []
    for v in nodes:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)) or not 0 <= v < g.n_nodes:
            raise GraphError(f"unknown node {v!r}")
        out.append(int(v))
    return out


def induced_subgraph(g: Graph, keep: Iterable[int], order: Sequence[int] | None = None) -> Subgraph:
    """Subgraph on ``keep`` with every parent edge among kept nodes.

    Local indices follow sorted parent order unless ``order`` (a permutation
    of ``keep``) is supplied.
    """
    keep_list = sorted(set(_check_members(g, keep)))
    if order is not None:
        order = _check_members(g, order)
        if sorted(order) != keep_list or len(order) != len(keep_list):
            raise GraphError("order must be a permutation of the kept nodes")
        keep_list = order
    local = {v: r for r, v in enumerate(keep_list)}
    edges = []
    for v in keep_list:
        rv = local[v]
        for w in g.adjacency[v]:
            rw = local.get(w)
            if rw is not None and rv < rw:
                edges.append((rv, rw))
    sub = Graph([g.labels[v] for v in keep_list], edges)
    return Subgraph(tuple(keep_list), sub)


def boundary_nodes(g: Graph, infected: Iterable[int]) -> frozenset[int]:
    """Uninfected nodes with at least one infected neighbor."""
    inf = set(_check_members(g, infected))
    out = set()
    for v in inf:
        out.update(w for w in g.adjacency[v] if w not in inf)
    return frozenset(out)


@dataclass(frozen=True)
class ExtendedNetwork:
    """Infected nodes plus their uninfected boundary.

    Rows of label matrices follow ``nodes``: infected nodes in sorted order
    first, then boundary nodes in sorted order. ``graph`` is the subgraph
    induced on those rows (boundary-boundary edges included).
    """

    infected: tuple[int, ...]
    boundary: tuple[int, ...]
    graph: Graph

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.infected + self.boundary

    @property
    def n_nodes(self) -> int:
        return len(self.infected) + len(self.boundary)

    @property
    def n_infected(self) -> int:
        return len(self.infected)

    @cached_property
    def node_index(self) -> dict[int, int]:
        return {v: r for r, v in enumerate(self.nodes)}

    @cached_property
    def infected_subnetwork(self) -> Subgraph:
        """G_I, whose local indices coincide with the first N_I rows."""
        n_i = self.n_infected
        edges = [(i, j) for i, j in self.graph.edges if j < n_i]
        return Subgraph(self.infected, Graph(self.graph.labels[:n_i], edges))


def extended_network(g: Graph, infected: Iterable[int]) -> ExtendedNetwork:
    inf = sorted(set(_check_members(g, infected)))
    if not inf:
        raise GraphError("empty infection snapshot")
    bnd = sorted(boundary_nodes(g, inf))
    sub = induced_subgraph(g, inf + bnd, order=inf + bnd)
    return ExtendedNetwork(tuple(inf), tuple(bnd), sub.graph)


def normalized_adjacency(g: Graph) -> sp.csr_array:
    """``D^-1/2 W D^-1/2`` as CSR; zero-degree rows and columns stay zero."""
    w = g.csr
    deg = g.degree.astype(np.float64)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    d = sp.dia_array((inv_sqrt[np.newaxis, :], [0]), shape=w.shape)
    out = sp.csr_array(d @ w @ d)
    out.sort_indices()
    return out


@dataclass(frozen=True)
class GraphStats:
    n_nodes: int
    n_edges: int
    avg_degree: float
    density: float

    def to_dict(self, rounded: bool = True) -> dict:
        """JSON-ready dict; ``rounded`` uses the 2/4 decimal places of the dataset table."""
        avg, dens = self.avg_degree, self.density
        if rounded:
            avg, dens = round(avg, 2), round(dens, 4)
        return {"nodes": self.n_nodes, "edges": self.n_edges, "avg_degree": avg, "density": dens}


def stats(g: Graph, edge_count: str = "undirected") -> GraphStats:
    """Size, mean degree ``2M/N`` and density ``M/(N(N-1))``.

    ``edge_count="arcs"`` uses the number of distinct directed input arcs
    for M instead of the symmetrized edge count.
    """
    n = g.n_nodes
    if n < 2:
        raise GraphError("density is undefined for fewer than 2 nodes")
    if edge_count == "undirected":
        m = g.n_edges
    elif edge_count == "arcs":
        m = g.n_arcs
    else:
        raise ValueError(f"edge_count must be 'undirected' or 'arcs', not {edge_count!r}")
    return GraphStats(n, m, 2.0 * m / n, m / (n * (n - 1)))


def bfs_distances(g: Graph, sources: Iterable[int]) -> np.ndarray:
    """Hop distance from the nearest source; unreachable nodes get ``inf``."""
    dist = np.full(g.n_nodes, math.inf)
    frontier = list(set(sources))
    for s in frontier:
        dist[s] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for w in g.adjacency[v]:
                if dist[w] == math.inf:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist
