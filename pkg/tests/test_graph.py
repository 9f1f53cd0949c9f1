import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgemsd.errors import EdgeListError, GraphError
from edgemsd.graph import (
    Graph,
    boundary_nodes,
    extended_network,
    induced_subgraph,
    load_edge_list,
    normalized_adjacency,
    stats,
    write_edge_list,
)
from edgemsd.synthetic import grid_graph

from conftest import cycle, graph_of, path, random_graph


def load(text):
    return load_edge_list(io.StringIO(text))


class TestLoadEdgeList:
    def test_reciprocal_pair_collapses(self):
        g = load("1 2\n2 1\n2 3\n")
        assert (g.n_nodes, g.n_edges) == (3, 2)
        assert g.n_arcs == 3

    def test_self_loop_dropped_and_counted(self):
        g = load("1 1\n")
        assert (g.n_nodes, g.n_edges, g.n_self_loops) == (1, 0, 1)

    def test_comments_blank_lines_and_duplicates(self):
        g = load("# header\n\n1 2\n1 2\n  # indented comment\n3\t1\n")
        assert g.edge_labels() == [("1", "2"), ("1", "3")]

    def test_numeric_labels_sort_numerically(self):
        g = load("10 2\n2 1\n")
        assert g.labels == ("1", "2", "10")

    def test_string_labels(self):
        g = load("bob alice\ncarol bob\n")
        assert g.labels == ("alice", "bob", "carol")

    def test_custom_delimiter(self):
        g = load_edge_list(io.StringIO("a,b\nb,c\n"), delimiter=",")
        assert g.n_edges == 2

    @pytest.mark.parametrize("text,line", [("1 2\n1 2 3\n", 2), ("1\n", 1), ("1 2\n\n% bad line x\n", 3)])
    def test_wrong_token_count_reports_line(self, text, line):
        with pytest.raises(EdgeListError, match=f"line {line}") as err:
            load(text)
        assert err.value.line == line

    @pytest.mark.parametrize("text", ["", "# only a comment\n", "\n\n"])
    def test_empty_input(self, text):
        with pytest.raises(EdgeListError, match="empty"):
            load(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_edge_list(str(tmp_path / "missing.txt"))

    def test_roundtrip_through_export(self, rng):
        g = random_graph(40, 0.1, rng)
        g = induced_subgraph(g, [v for v in range(g.n_nodes) if g.degree[v] > 0]).graph
        again = load(write_edge_list(g))
        assert again == g


class TestGraphInvariants:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), max_size=60))
    def test_symmetric_simple(self, pairs):
        g = graph_of(*pairs, nodes=range(16))
        for i, nb in enumerate(g.adjacency):
            assert i not in nb
            assert list(nb) == sorted(set(nb))
            for j in nb:
                assert i in g.adjacency[j]
        assert g.n_edges == sum(len(nb) for nb in g.adjacency) // 2
        assert all(i < j for i, j in g.edges)
        assert g.n_edges == len({frozenset(p) for p in pairs if p[0] != p[1]})

    def test_rejects_out_of_range_edge(self):
        with pytest.raises(GraphError):
            Graph(["a", "b"], [(0, 2)])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(GraphError):
            Graph(["a", "a"], [])


class TestInducedSubgraph:
    def test_triangle_keep_two(self):
        g = graph_of((1, 2), (2, 3), (1, 3))
        sub = induced_subgraph(g, g.lookup([1, 2]))
        assert sub.graph.edge_labels() == [("1", "2")]

    def test_keep_all_is_identity(self, rng):
        g = random_graph(20, 0.2, rng)
        assert induced_subgraph(g, range(g.n_nodes)).graph == g

    def test_non_adjacent_pair(self):
        g = cycle(4)
        sub = induced_subgraph(g, g.lookup([1, 3]))
        assert (sub.n_nodes, sub.n_edges) == (2, 0)

    def test_unknown_node(self):
        with pytest.raises(GraphError, match="99"):
            induced_subgraph(path(3), [0, 99])

    def test_edges_exactly_those_among_kept(self, rng):
        g = random_graph(30, 0.15, rng)
        keep = set(rng.choice(30, 12, replace=False).tolist())
        sub = induced_subgraph(g, keep)
        got = {(sub.nodes[i], sub.nodes[j]) for i, j in sub.edge_list}
        want = {(i, j) for i, j in g.edges.tolist() if i in keep and j in keep}
        assert got == want
        assert sub.edge_list.tolist() == sorted(sub.edge_list.tolist())


class TestBoundary:
    def test_star_center_infected(self):
        g = graph_of(("c", "a"), ("c", "b"), ("c", "d"), ("c", "e"))
        assert boundary_nodes(g, g.lookup(["c"])) == frozenset(g.lookup("abde"))

    def test_all_infected(self):
        g = path(4)
        assert boundary_nodes(g, range(4)) == frozenset()

    def test_path_end(self):
        g = path(3)
        assert boundary_nodes(g, g.lookup([1])) == frozenset(g.lookup([2]))

    def test_random_boundary_properties(self, rng):
        for _ in range(20):
            g = random_graph(40, 0.08, rng)
            infected = set(rng.choice(40, 8, replace=False).tolist())
            bnd = boundary_nodes(g, infected)
            assert not bnd & infected
            for v in bnd:
                assert any(w in infected for w in g.adjacency[v])
            for v in set(range(40)) - infected - bnd:
                assert not any(w in infected for w in g.adjacency[v])


class TestExtendedNetwork:
    def test_path(self):
        g = path(4)
        ext = extended_network(g, g.lookup([1, 2]))
        assert g.label_set(ext.nodes) == ["1", "2", "3"]
        assert ext.graph.edge_labels() == [("1", "2"), ("2", "3")]

    def test_empty_snapshot(self):
        with pytest.raises(GraphError, match="empty infection snapshot"):
            extended_network(path(3), [])

    def test_row_order_and_boundary_edges(self):
        # boundary nodes 4 and 5 are adjacent to each other; that edge is kept
        g = graph_of((1, 2), (2, 4), (1, 5), (4, 5), (5, 6))
        ext = extended_network(g, g.lookup([2, 1]))
        assert [g.labels[v] for v in ext.nodes] == ["1", "2", "4", "5"]
        assert ext.node_index[g.index["4"]] == 2
        assert ("4", "5") in ext.graph.edge_labels()
        assert ext.infected_subnetwork.graph.edge_labels() == [("1", "2")]

    def test_grid_ring(self):
        g = grid_graph(15, 15)
        infected = set(g.lookup(["7_7", "7_8", "8_7", "8_8"]))
        ext = extended_network(g, infected)
        ring = {"6_7", "6_8", "9_7", "9_8", "7_6", "8_6", "7_9", "8_9"}
        assert set(g.label_set(ext.boundary)) == ring
        assert set(ext.infected) == infected


class TestNormalizedAdjacency:
    def test_single_edge(self):
        a = normalized_adjacency(graph_of((1, 2))).toarray()
        np.testing.assert_array_equal(a, [[0, 1], [1, 0]])

    def test_isolated_node(self):
        a = normalized_adjacency(Graph(["x"], [])).toarray()
        np.testing.assert_array_equal(a, [[0.0]])

    def test_path_hand_values(self):
        a = normalized_adjacency(path(3)).toarray()
        assert a[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert a[1, 2] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
        assert a[0, 2] == 0.0

    def test_zero_degree_rows_zero(self):
        g = graph_of((1, 2), nodes=[3])
        a = normalized_adjacency(g).toarray()
        assert not a[2].any() and not a[:, 2].any()

    def test_symmetry_and_spectral_radius(self, rng):
        for n in (5, 50, 200, 500):
            g = random_graph(n, min(1.0, 6.0 / n), rng)
            a = normalized_adjacency(g)
            assert abs(a - a.T).max() == 0
            dense = a.toarray()
            assert dense.min() >= 0 and dense.max() <= 1
            x = rng.random(n)
            for _ in range(500):
                y = a @ x
                nrm = np.linalg.norm(y)
                if nrm == 0:
                    break
                x = y / nrm
            assert np.linalg.norm(a @ x) <= 1 + 1e-9
            assert np.abs(np.linalg.eigvalsh(dense)).max() <= 1 + 1e-9


class TestStats:
    @pytest.mark.parametrize(
        "n,m,avg,dens",
        [(1089, 5370, 9.86, 0.0045), (922, 5229, 11.34, 0.0062), (1011, 5459, 10.80, 0.0053)],
    )
    def test_table_values(self, n, m, avg, dens):
        labels = [str(i) for i in range(n)]
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)][:m]
        st_ = stats(Graph(labels, edges))
        assert round(st_.avg_degree, 2) == pytest.approx(avg)
        assert round(st_.density, 4) == pytest.approx(dens)

    def test_two_nodes(self):
        st_ = stats(graph_of((1, 2)))
        assert (st_.avg_degree, st_.density) == (1.0, 0.5)
        assert st_.to_dict() == {"nodes": 2, "edges": 1, "avg_degree": 1.0, "density": 0.5}

    def test_too_small(self):
        with pytest.raises(GraphError):
            stats(Graph(["a"], []))

    def test_arc_convention(self):
        g = load("1 2\n2 1\n2 3\n")
        assert stats(g, edge_count="arcs").n_edges == 3
