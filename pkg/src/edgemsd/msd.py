"""Multiple-source detection by community-based label propagation.

Pipeline: extended infected network -> clustering of the infected
subnetwork -> node ages -> initial label matrix -> propagation to the fixed
point -> per-community argmax.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import clustering
from .clustering import NodeClusterAssignment, membership
from .errors import ClusteringError, ConvergenceError, DetectionError, MSDError
from .graph import ExtendedNetwork, Graph, extended_network, normalized_adjacency

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True, eq=False)
class AgeVector:
    infected_age: np.ndarray  # one entry per infected row of the extended network
    uninfected_age: np.ndarray  # one entry per boundary row


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    values: np.ndarray  # N_EI x (K + 1)
    n_infected: int
    alpha: float = DEFAULT_ALPHA
    iterations: int | None = None

    @property
    def k(self) -> int:
        return self.values.shape[1] - 1


@dataclass(frozen=True, eq=False)
class DetectionResult:
    per_cluster_source: list  # node index or None per community, k = 1..K
    detected_sources: frozenset
    scores: list  # normalized score at each argmax (None for skipped columns)
    k_detected: int
    clusterer: str = ""
    alpha: float = DEFAULT_ALPHA
    labels: LabelMatrix | None = field(default=None, repr=False)
    assignment: object = field(default=None, repr=False)

    def to_json(self, g: Graph) -> dict:
        return {
            "k_detected": self.k_detected,
            "per_cluster_source": [None if s is None else g.labels[s] for s in self.per_cluster_source],
            "detected_sources": g.label_set(self.detected_sources),
            "scores": self.scores,
            "clusterer": self.clusterer,
            "alpha": self.alpha,
        }


def compute_ages(g: Graph, ext: ExtendedNetwork, log_base: float | None = None) -> AgeVector:
    """Prominence ages of infected nodes and exoneration ages of boundary nodes.

    Infected u: ``(I_u / O_u) * (1 + log O_u)`` with I_u its degree among
    infected nodes and O_u its degree in ``g``. Boundary v: mean of I_u over
    its infected neighbors. ``log_base=None`` means the natural log.
    """
    n_i = ext.n_infected
    infected = np.asarray(ext.infected, dtype=np.int64)
    inner = ext.infected_subnetwork.graph.degree.astype(np.float64)
    outer = g.degree[infected].astype(np.float64)
    if np.any(outer == 0):
        bad = g.labels[int(infected[np.flatnonzero(outer == 0)[0]])]
        raise DetectionError(
            f"infected node {bad!r} is isolated in the network; exclude isolated nodes from seeding",
            stage="ages",
        )
    logs = np.log(outer) if log_base is None else np.log(outer) / math.log(log_base)
    infected_age = inner / outer * (1.0 + logs)

    cross = ext.graph.csr[n_i:, :n_i]
    n_inf_nbrs = np.asarray(cross.sum(axis=1)).ravel()
    uninfected_age = (cross @ inner) / n_inf_nbrs if n_i < ext.n_nodes else np.zeros(0)
    return AgeVector(infected_age, np.asarray(uninfected_age, dtype=np.float64))


def init_labels(ext: ExtendedNetwork, ages: AgeVector, member: np.ndarray, alpha: float = DEFAULT_ALPHA) -> LabelMatrix:
    """Initial labels: age-weighted memberships plus an exoneration column.

    Infected row i gets ``A_i`` in every community column it belongs to;
    boundary row v gets ``max_w A_w - A_v`` in the last column.
    """
    n_i = ext.n_infected
    member = np.asarray(member)
    if member.ndim != 2 or member.shape[0] != n_i:
        raise DetectionError(f"membership has shape {member.shape}, expected ({n_i}, K)", stage="labels")
    k = member.shape[1]
    if k == 0:
        raise DetectionError("no communities detected", stage="labels")
    l0 = np.zeros((ext.n_nodes, k + 1))
    l0[:n_i, :k] = ages.infected_age[:, None] * member
    ua = ages.uninfected_age
    if ua.size:
        l0[n_i:, k] = ua.max() - ua
    return LabelMatrix(l0, n_i, alpha)


def _as_array(labels) -> np.ndarray:
    return labels.values if isinstance(labels, LabelMatrix) else np.asarray(labels, dtype=np.float64)


def _wrap(like, values: np.ndarray, alpha: float, iterations=None) -> LabelMatrix:
    n_i = like.n_infected if isinstance(like, LabelMatrix) else values.shape[0]
    return LabelMatrix(values, n_i, alpha, iterations)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")


def propagate_iterative(adj, l0, alpha: float = DEFAULT_ALPHA, tol: float = 1e-10, max_iter: int = 10_000) -> LabelMatrix:
    """Iterate ``L <- alpha * A @ L + (1 - alpha) * L0`` from L0 until the max change is below ``tol``."""
    _check_alpha(alpha)
    base = _as_array(l0)
    if adj.shape[0] != base.shape[0]:
        raise ValueError(f"adjacency is {adj.shape}, labels have {base.shape[0]} rows")
    anchor = (1.0 - alpha) * base
    cur = base.copy()
    change = math.inf
    for it in range(1, max_iter + 1):
        nxt = alpha * (adj @ cur) + anchor
        change = float(np.max(np.abs(nxt - cur))) if cur.size else 0.0
        cur = nxt
        if change < tol:
            return _wrap(l0, cur, alpha, it)
    raise ConvergenceError(f"no convergence after {max_iter} iterations (last change {change:.3e})", residual=change)


def propagate_closed_form(adj, l0, alpha: float = DEFAULT_ALPHA, tol: float = 1e-12) -> LabelMatrix:
    """Solve ``(I - alpha * A) L = (1 - alpha) L0`` by sparse LU.

    ``tol`` bounds the max-abs residual, scaled by ``max(1, max|L0|)``; one
    round of iterative refinement is tried before giving up.
    """
    _check_alpha(alpha)
    base = _as_array(l0)
    n = base.shape[0]
    if adj.shape[0] != n:
        raise ValueError(f"adjacency is {adj.shape}, labels have {n} rows")
    if n == 0 or base.size == 0:
        return _wrap(l0, base.copy(), alpha)
    system = sp.csc_array(sp.identity(n, format="csc") - alpha * sp.csc_array(adj))
    rhs = (1.0 - alpha) * base
    lu = spla.splu(system)
    sol = lu.solve(rhs)
    limit = tol * max(1.0, float(np.max(np.abs(base))))
    resid = rhs - system @ sol
    if np.max(np.abs(resid)) >= limit:
        sol = sol + lu.solve(resid)
        resid = rhs - system @ sol
    worst = float(np.max(np.abs(resid)))
    if worst >= limit:
        raise ConvergenceError(f"linear solve residual {worst:.3e} exceeds {limit:.1e}", residual=worst)
    return _wrap(l0, sol, alpha)


def identify_sources(l_star, ext: ExtendedNetwork, member: np.ndarray | None = None) -> DetectionResult:
    """Pick the highest row-normalized score among infected rows in each community column.

    Ties on the normalized score go to the larger raw propagated label, then
    to the smallest node index. A column with no positive score (a community
    whose members all have zero age, e.g. an infected node with no infected
    neighbor) falls back to its first member when ``member`` is given, and is
    skipped otherwise.
    """
    values = _as_array(l_star)
    n_i = ext.n_infected
    k = values.shape[1] - 1
    sums = values.sum(axis=1, keepdims=True)
    norm = np.divide(values, sums, out=np.zeros_like(values), where=sums > 0)
    sources: list = []
    scores: list = []
    for col in range(k):
        col_norm = norm[:n_i, col]
        top = col_norm.max() if n_i else 0.0
        if top <= 0.0 and member is not None and member[:, col].any():
            row = int(np.flatnonzero(member[:, col])[0])
            sources.append(ext.infected[row])
            scores.append(0.0)
            continue
        if top <= 0.0:
            sources.append(None)
            scores.append(None)
            continue
        cand = np.flatnonzero(col_norm == top)
        if cand.size > 1:
            raw = values[cand, col]
            cand = cand[raw == raw.max()]
        row = int(cand[0])  # rows are in increasing node index
        sources.append(ext.infected[row])
        scores.append(float(top))
    if all(s is None for s in sources):
        raise DetectionError("no identifiable sources", stage="identification")
    alpha = l_star.alpha if isinstance(l_star, LabelMatrix) else DEFAULT_ALPHA
    return DetectionResult(
        per_cluster_source=sources,
        detected_sources=frozenset(s for s in sources if s is not None),
        scores=scores,
        k_detected=k,
        alpha=alpha,
        labels=l_star if isinstance(l_star, LabelMatrix) else None,
    )


def _singletons(sub):
    labels = np.arange(1, sub.n_nodes + 1)
    return NodeClusterAssignment(labels, sub.n_nodes, "singletons")


def cluster_infected(sub, clusterer: str = "link", rng=None, min_cluster_size: int = 3):
    """Run the named clusterer on G_I with the detector's fallbacks.

    An edgeless G_I puts every infected node in its own community (each one
    must then be a seed); a link clustering that leaves only noise is rerun
    with ``min_cluster_size=1``.
    """
    if sub.n_edges == 0:
        return _singletons(sub)
    fn = clustering.get_clusterer(clusterer)
    try:
        return fn(sub, rng=rng, min_cluster_size=min_cluster_size)
    except ClusteringError as exc:
        if clusterer.startswith("link") and min_cluster_size > 1 and "noise" in str(exc):
            log.debug("all link clusters were noise; retrying with min_cluster_size=1")
            return fn(sub, rng=rng, min_cluster_size=1)
        raise


def detect(
    g: Graph,
    infected,
    clusterer: str = "link",
    alpha: float = DEFAULT_ALPHA,
    tol: float = 1e-10,
    min_cluster_size: int = 3,
    rng: np.random.Generator | None = None,
    solver: str = "closed",
    log_base: float | None = None,
) -> DetectionResult:
    """Estimate the source set from the infected node indices ``infected``.

    ``solver="closed"`` solves the linear system and falls back to iteration
    if the solve fails its residual check; ``solver="iterative"`` iterates
    only. ``rng`` feeds randomized clusterers (Louvain visit order).
    """

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DetectionError:
            raise
        except (MSDError, ValueError) as exc:
            raise DetectionError(str(exc), stage=name) from exc

    ext = stage("graph", extended_network, g, infected)
    sub = ext.infected_subnetwork
    assignment = stage("clustering", cluster_infected, sub, clusterer, rng, min_cluster_size)
    member = stage("membership", membership, sub, assignment)
    ages = stage("ages", compute_ages, g, ext, log_base)
    l0 = stage("labels", init_labels, ext, ages, member, alpha)
    adj = normalized_adjacency(ext.graph)
    if solver == "closed":
        try:
            l_star = propagate_closed_form(adj, l0, alpha)
        except (ConvergenceError, RuntimeError) as exc:
            log.warning("closed-form solve failed (%s); iterating instead", exc)
            l_star = stage("propagation", propagate_iterative, adj, l0, alpha, tol)
    elif solver == "iterative":
        l_star = stage("propagation", propagate_iterative, adj, l0, alpha, tol)
    else:
        raise ValueError(f"solver must be 'closed' or 'iterative', not {solver!r}")
    result = stage("identification", identify_sources, l_star, ext, member)
    return DetectionResult(
        per_cluster_source=result.per_cluster_source,
        detected_sources=result.detected_sources,
        scores=result.scores,
        k_detected=result.k_detected,
        clusterer=clusterer,
        alpha=alpha,
        labels=l_star,
        assignment=assignment,
    )
