import numpy as np
import pytest
from hypothesis import given

from grounded_spectra.graph import (
    GraphError,
    broom_pair,
    broom_tree,
    build_graph,
    complete_graph,
    edge_boundary,
    ground,
    incidence_data,
    is_connected,
    partition,
    path_graph,
    star_graph,
)

from conftest import graphs_with_leaders


def test_build_path():
    g = build_graph(3, [(0, 1), (1, 2)])
    assert g.degrees.tolist() == [1, 2, 1]
    assert g.m == 2


def test_self_loop_rejected():
    with pytest.raises(GraphError, match="self-loop"):
        build_graph(2, [(0, 0)])


def test_out_of_range_rejected():
    with pytest.raises(GraphError):
        build_graph(2, [(0, 2)])


def test_duplicates_collapse():
    g = build_graph(4, [(0, 1), (0, 1), (2, 3)])
    assert g.m == 2
    assert build_graph(2, [(1, 0), (0, 1)]).m == 1


def test_adjacency_read_only():
    g = path_graph(3)
    with pytest.raises(ValueError):
        g.adjacency[0, 1] = 0


@pytest.mark.parametrize(
    "g, expected",
    [
        (path_graph(3), True),
        (build_graph(4, []), False),
        (build_graph(4, [(0, 1), (2, 3)]), False),
    ],
)
def test_is_connected(g, expected):
    assert is_connected(g) is expected


def test_edge_boundary_examples():
    assert edge_boundary(path_graph(3), {0}) == [(0, 1)]
    assert len(edge_boundary(star_graph(4), {0})) == 4
    k4 = complete_graph(4)
    cut = edge_boundary(k4, {0, 1})
    brute = [(u, v) for u, v in k4.edges if (u in (0, 1)) != (v in (0, 1))]
    assert sorted(cut) == sorted(brute) and len(cut) == 4


@pytest.mark.parametrize("X", [set(), {0, 1, 2}])
def test_edge_boundary_rejects_trivial_sets(X):
    with pytest.raises(GraphError):
        edge_boundary(path_graph(3), X)


def test_ground_path_at_end():
    p, gs = ground(path_graph(3), {0})
    assert p.followers == (1, 2)
    np.testing.assert_array_equal(gs.grounded_laplacian, [[2, -1], [-1, 1]])
    assert p.beta.tolist() == [1, 0]


def test_ground_path_at_middle():
    _, gs = ground(path_graph(3), {1})
    np.testing.assert_array_equal(gs.grounded_laplacian, np.eye(2))


def test_ground_k4():
    _, gs = ground(complete_graph(4), {3})
    np.testing.assert_array_equal(gs.grounded_laplacian, 3 * np.eye(3) - (np.ones((3, 3)) - np.eye(3)))


@pytest.mark.parametrize("S", [set(), {0, 1, 2}])
def test_ground_rejects_bad_leader_sets(S):
    with pytest.raises(GraphError):
        ground(path_graph(3), S)


def test_ground_rejects_disconnected():
    with pytest.raises(GraphError, match="disconnected"):
        ground(build_graph(4, [(0, 1), (2, 3)]), {0})


def test_incidence_path():
    g = path_graph(3)
    inc = incidence_data(g, partition(g, {0}))
    assert inc.incidence.shape == (3, 2)
    np.testing.assert_array_equal(inc.incidence @ inc.incidence.T, g.laplacian())
    # tail is the smaller endpoint
    assert inc.incidence[0, 0] == -1 and inc.incidence[1, 0] == 1


def test_incidence_edge_space_contains_grounded_spectrum_path():
    g = path_graph(3)
    p, gs = ground(g, {0})
    inc = incidence_data(g, p)
    lg_eigs = np.linalg.eigvalsh(gs.grounded_laplacian)
    n_eigs = np.linalg.eigvalsh(inc.edge_space)
    for lam in lg_eigs:
        assert np.min(np.abs(n_eigs - lam)) < 1e-10


def test_incidence_single_edge():
    g = build_graph(2, [(0, 1)])
    p, gs = ground(g, {1})
    inc = incidence_data(g, p)
    np.testing.assert_array_equal(inc.edge_space, [[1.0]])
    np.testing.assert_array_equal(gs.grounded_laplacian, [[1.0]])


def test_broom_numbering():
    g = broom_tree(9, 4)
    assert g.degrees[4] == 5
    assert all(g.degrees[i] == 1 for i in range(4))
    assert g.degrees[8] == 1
    assert is_connected(g)
    assert broom_pair().degrees.tolist() == [1, 1, 3, 2, 3, 1, 1]


@given(graphs_with_leaders())
def test_graph_invariants(case):
    g, _ = case
    A = g.adjacency
    assert np.array_equal(A, A.T)
    assert not A.diagonal().any()
    assert set(np.unique(A)) <= {0, 1}
    assert np.array_equal(A.sum(axis=1), g.degrees)
    assert g.m * 2 == g.degrees.sum()


@given(graphs_with_leaders())
def test_grounded_system_invariants(case):
    g, S = case
    p, gs = ground(g, S)
    assert set(p.leaders).isdisjoint(p.followers)
    assert set(p.leaders) | set(p.followers) == set(range(g.n))
    assert list(p.followers) == sorted(p.followers)
    assert p.beta.sum() == p.boundary_size == len(edge_boundary(g, S))
    assert ((0 <= p.beta) & (p.beta <= len(S))).all()
    lg = gs.grounded_laplacian
    np.testing.assert_array_equal(lg, gs.follower_laplacian + gs.leader_count_diag)
    np.testing.assert_array_equal(lg.sum(axis=1), p.beta)
    np.testing.assert_array_equal(np.hstack([lg, gs.coupling]).sum(axis=1), 0)
    assert (gs.coupling <= 0).all()
    assert np.linalg.eigvalsh(lg)[0] > 1e-12


@given(graphs_with_leaders())
def test_incidence_factorizations(case):
    g, S = case
    p, gs = ground(g, S)
    inc = incidence_data(g, p)
    assert (np.abs(inc.incidence).sum(axis=0) == 2).all()
    assert (inc.incidence.sum(axis=0) == 0).all()
    np.testing.assert_array_equal(inc.incidence @ inc.incidence.T, g.laplacian())
    np.testing.assert_array_equal(inc.follower_rows @ inc.follower_rows.T, gs.grounded_laplacian)


@given(graphs_with_leaders())
def test_edge_space_contains_grounded_spectrum(case):
    g, S = case
    p, gs = ground(g, S)
    inc = incidence_data(g, p)
    lg_eigs = np.linalg.eigvalsh(gs.grounded_laplacian)
    n_eigs = list(np.linalg.eigvalsh(inc.edge_space))
    # multiset containment: match each L_g eigenvalue to a distinct N eigenvalue
    for lam in lg_eigs:
        j = int(np.argmin([abs(x - lam) for x in n_eigs]))
        assert abs(n_eigs[j] - lam) <= 1e-9 * max(1.0, lam)
        n_eigs.pop(j)
