import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimers.graphs import (Graph, cycle_graph, edge_ball, from_edge_list, lattice_box,
                           parse_graph_spec, path_graph, regular_tree)


def test_path_and_cycle_sizes():
    p = path_graph(5)
    assert (p.vertex_count, p.edge_count) == (5, 4)
    assert p.edges.tolist() == [[0, 1], [1, 2], [2, 3], [3, 4]]
    c = cycle_graph(5)
    assert (c.vertex_count, c.edge_count) == (5, 5)
    assert all(c.degree(v) == 2 for v in range(5))


@given(dim=st.integers(1, 3), side=st.integers(3, 6), periodic=st.booleans())
@settings(max_examples=40, deadline=None)
def test_lattice_box_counts_and_degrees(dim, side, periodic):
    g = lattice_box(dim, side, "periodic" if periodic else "free")
    n = side**dim
    assert g.vertex_count == n
    expected = dim * n if periodic else dim * side ** (dim - 1) * (side - 1)
    assert g.edge_count == expected
    deg = np.diff(g.indptr)
    assert deg.max() <= g.degree_bound == 2 * dim
    if periodic:
        assert np.all(deg == 2 * dim)
    # CSR agrees with the edge list
    for e, (a, b) in enumerate(g.edges.tolist()):
        assert g.edge_between(a, b) == e and g.edge_between(b, a) == e


def test_lattice_row_major_ids():
    g = lattice_box(2, 4)
    assert g.vertex_at((1, 0)) == 4
    assert g.coords(7) == (1, 3)
    t = lattice_box(2, 4, "periodic")
    assert t.vertex_at((-1, 5)) == t.vertex_at((3, 1))


def test_boundary_of_free_square():
    g = lattice_box(2, 6)
    assert len(g.boundary_vertices()) == 4 * 5
    assert len(lattice_box(2, 6, "periodic").boundary_vertices()) == 0


def test_regular_tree():
    g = regular_tree(3, 3)
    assert g.vertex_count == 1 + 3 + 6 + 12
    assert g.edge_count == g.vertex_count - 1
    assert g.degree(0) == 3 and max(np.diff(g.indptr)) == 3


def test_edge_ball_on_path():
    g = path_graph(10)
    b = edge_ball(g, 4, 2)  # edge (4, 5)
    assert b.vertices == frozenset(range(2, 8))
    assert b.edges == frozenset(range(2, 7))
    assert edge_ball(g, 4, 0).edges == frozenset({4})


def test_distances_with_cutoff():
    g = path_graph(6)
    assert g.distances_from([0]).tolist() == [0, 1, 2, 3, 4, 5]
    assert g.distances_from([0], cutoff=2).tolist() == [0, 1, 2, -1, -1, -1]


def test_edge_list_round_trip():
    g = lattice_box(2, 3, "periodic")
    h = from_edge_list(g.to_edge_list())
    assert np.array_equal(g.edges, h.edges) and h.vertex_count == g.vertex_count


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 3)]])
def test_invalid_edges_rejected(edges):
    with pytest.raises(ValueError):
        Graph.from_edges(3, edges)


def test_degree_bound_enforced():
    with pytest.raises(ValueError):
        Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)], degree_bound=2)


def test_graph_spec_grammar():
    assert parse_graph_spec("path:7").edge_count == 6
    assert parse_graph_spec("cycle:7").edge_count == 7
    assert parse_graph_spec("lattice:2:8:periodic").edge_count == 128
    assert parse_graph_spec("lattice:2:8").name == "lattice:2:8:free"
    assert parse_graph_spec("tree:3:2").vertex_count == 10
    for bad in ["", "path", "path:x", "lattice:2:8:twisted", "cycle:2", "blob:3"]:
        with pytest.raises(ValueError):
            parse_graph_spec(bad)


def test_arrays_are_read_only():
    g = path_graph(4)
    with pytest.raises(ValueError):
        g.edges[0, 0] = 3
