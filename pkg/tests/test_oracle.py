import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dimers.graphs import Graph, cycle_graph, lattice_box, path_graph, regular_tree
from dimers.oracle import (GraphTooLarge, exact_distribution, exact_mgf, exact_moment,
                           exact_pair_uncovered, exact_uncovered_probability, exact_variance,
                           permutation_distribution)


def test_path_examples():
    assert exact_distribution(path_graph(1)) == {1: 1}
    assert exact_distribution(path_graph(3)) == {1: 1}
    assert exact_distribution(path_graph(4)) == {0: Fraction(2, 3), 2: Fraction(1, 3)}
    assert exact_variance(path_graph(4)) == Fraction(8, 9)


def test_cycle_examples():
    assert exact_distribution(cycle_graph(4)) == {0: 1}
    assert exact_distribution(cycle_graph(5)) == {1: 1}
    # the first dimer leaves a 4-vertex path behind
    assert exact_distribution(cycle_graph(6)) == {0: Fraction(2, 3), 2: Fraction(1, 3)}


def test_star_leaves_all_but_two_uncovered():
    g = regular_tree(5, 1)
    assert exact_distribution(g) == {4: 1}


def test_moments_are_consistent():
    g = lattice_box(2, 3)
    dist = exact_distribution(g)
    assert sum(dist.values()) == 1
    assert exact_moment(g, 1) == sum(k * p for k, p in dist.items())
    assert exact_moment(g, 1) == sum(exact_uncovered_probability(g, v) for v in range(9))
    assert exact_mgf(g, 0.0) == pytest.approx(1.0)


def test_pair_probabilities():
    g = path_graph(6)
    # second moment from pair probabilities
    second = sum(exact_uncovered_probability(g, u) for u in range(6)) + sum(
        exact_pair_uncovered(g, u, v) for u, v in itertools.permutations(range(6), 2))
    assert second == exact_moment(g, 2)
    assert exact_pair_uncovered(g, 1, 4) == exact_pair_uncovered(g, 4, 1)
    with pytest.raises(ValueError):
        exact_pair_uncovered(g, 2, 2)


@st.composite
def small_graphs(draw):
    n = draw(st.integers(2, 6))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=7))
    return Graph.from_edges(n, chosen)


@given(small_graphs())
@settings(max_examples=60, deadline=None)
def test_dp_matches_permutation_enumeration(g):
    assert exact_distribution(g) == permutation_distribution(g)


def test_size_caps():
    with pytest.raises(GraphTooLarge):
        exact_distribution(path_graph(40))
    with pytest.raises(ValueError):
        permutation_distribution(path_graph(12))
