import itertools

import numpy as np
import pytest

from edgemsd.graph import Graph


def graph_of(*edges, nodes=()):
    return Graph.from_edges(edges, nodes=nodes)


def path(n):
    return graph_of(*[(i, i + 1) for i in range(1, n)])


def cycle(n):
    return graph_of(*[(i, i % n + 1) for i in range(1, n + 1)])


def clique(labels):
    return list(itertools.combinations(labels, 2))


def joined_cliques(size):
    """Two ``size``-cliques on 0..size-1 and size..2size-1, bridged by one edge."""
    a = list(range(size))
    b = list(range(size, 2 * size))
    return graph_of(*clique(a), *clique(b), (a[-1], b[0]))


def random_graph(n, p, rng):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph([str(i) for i in range(n)], edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
