"""Multi-seed susceptible-infected spread used to generate snapshots.

Randomness comes from :func:`make_rng`, a PCG64 generator seeded through
``numpy.random.SeedSequence``. Independent streams are derived by spawn key:
``make_rng(master_seed, a, b, ...)`` always yields the same stream for the same
key, whatever order the streams are created in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import DiffusionError
from .graph import Graph


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Reproducible generator for the stream ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class DiffusionConfig:
    infection_prob: float = 0.2
    target_fraction: float = 0.10
    max_steps: int | None = None  # None -> 10 * N
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.infection_prob <= 1.0:
            raise DiffusionError(f"infection_prob must lie in [0, 1], got {self.infection_prob}")
        if not 0.0 < self.target_fraction <= 1.0:
            raise DiffusionError(f"target_fraction must lie in (0, 1], got {self.target_fraction}")
        if self.max_steps is not None and self.max_steps < 1:
            raise DiffusionError(f"max_steps must be >= 1, got {self.max_steps}")


@dataclass(frozen=True)
class InfectionOutcome:
    seeds: frozenset[int]
    infected: frozenset[int]
    steps: int
    hit_target: bool

    def to_json(self, g: Graph) -> dict:
        return {
            "seeds": g.label_set(self.seeds),
            "infected": g.label_set(self.infected),
            "steps": self.steps,
            "hit_target": self.hit_target,
        }


def select_seeds(g: Graph, k: int, rng: np.random.Generator) -> frozenset[int]:
    """Draw ``k`` distinct non-isolated nodes uniformly without replacement."""
    candidates = np.flatnonzero(g.degree > 0)
    if k < 1:
        raise DiffusionError(f"need at least one seed, got k={k}")
    if k > len(candidates):
        raise DiffusionError(f"k={k} exceeds the {len(candidates)} non-isolated nodes")
    return frozenset(int(v) for v in rng.choice(candidates, size=k, replace=False))


def simulate(
    g: Graph,
    seeds: Iterable[int],
    cfg: DiffusionConfig,
    rng: np.random.Generator | None = None,
    history: list | None = None,
) -> InfectionOutcome:
    """Run discrete rounds of SI spread from ``seeds``.

    In each round every infected node independently tries each susceptible
    neighbor with probability ``infection_prob``; a susceptible node with c
    infected neighbors is therefore infected with probability
    ``1 - (1 - p)**c`` (one uniform draw per exposed node, in index order).
    Stops once the infected share strictly exceeds ``target_fraction``, when
    no susceptible node is exposed any more, or after ``max_steps`` rounds.

    If ``history`` is a list, the infected set after each round is appended.
    """
    seeds = frozenset(seeds)
    if not seeds:
        raise DiffusionError("seed set is empty")
    for s in seeds:
        if not isinstance(s, (int, np.integer)) or not 0 <= s < g.n_nodes:
            raise DiffusionError(f"unknown seed node {s!r}")
    if rng is None:
        rng = make_rng(cfg.seed)
    n = g.n_nodes
    max_steps = cfg.max_steps if cfg.max_steps is not None else 10 * n
    adj = g.csr
    infected = np.zeros(n, dtype=bool)
    infected[list(seeds)] = True
    count = len(seeds)
    p = cfg.infection_prob
    steps = 0
    hit = False
    while steps < max_steps:
        exposure = adj @ infected.astype(np.float64)
        exposed = np.flatnonzero((exposure > 0) & ~infected)
        if exposed.size == 0:
            break
        steps += 1
        if p > 0.0:
            prob = 1.0 - (1.0 - p) ** exposure[exposed]
            newly = exposed[rng.random(exposed.size) < prob]
            infected[newly] = True
            count += newly.size
        if history is not None:
            history.append(frozenset(np.flatnonzero(infected).tolist()))
        if count / n > cfg.target_fraction:
            hit = True
            break
    return InfectionOutcome(seeds, frozenset(np.flatnonzero(infected).tolist()), steps, hit)


def dump_snapshot(outcome: InfectionOutcome, g: Graph, stream: TextIO) -> None:
    json.dump(outcome.to_json(g), stream, indent=2)
    stream.write("\n")


def load_snapshot(stream: TextIO, g: Graph) -> InfectionOutcome:
    """Read a snapshot JSON written by :func:`dump_snapshot`.

    Only ``infected`` is required; ``seeds`` defaults to empty.
    """
    try:
        data = json.load(stream)
    except json.JSONDecodeError as exc:
        raise DiffusionError(f"malformed snapshot JSON: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("infected"), list):
        raise DiffusionError("snapshot must be an object with an 'infected' list")
    infected = frozenset(g.lookup(data["infected"]))
    seeds = frozenset(g.lookup(data.get("seeds", [])))
    return InfectionOutcome(seeds, infected, int(data.get("steps", 0)), bool(data.get("hit_target", False)))
