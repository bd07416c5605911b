"""Graphs, leader partitions and the matrices derived from grounding a leader set.

Vertices are ``0..n-1``. Followers are always ordered by ascending vertex index,
and every matrix carries the explicit follower/leader index maps.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph input or a graph that violates an operation's precondition."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray = field(repr=False, compare=False)
    degrees: np.ndarray = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[v])

    def laplacian(self) -> np.ndarray:
        return (np.diag(self.degrees) - self.adjacency).astype(float)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u, v])


def build_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Build a simple undirected graph; duplicate edges are merged."""
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    seen = set()
    for pair in edge_list:
        u, v = (int(x) for x in pair)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        seen.add((min(u, v), max(u, v)))
    edges = tuple(sorted(seen))
    adj = np.zeros((n, n), dtype=np.int64)
    if edges:
        idx = np.array(edges)
        adj[idx[:, 0], idx[:, 1]] = 1
        adj[idx[:, 1], idx[:, 0]] = 1
    adj.setflags(write=False)
    deg = adj.sum(axis=1)
    deg.setflags(write=False)
    return Graph(n=n, edges=edges, adjacency=adj, degrees=deg)


def graph_from_adjacency(adjacency: np.ndarray) -> Graph:
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError("adjacency must be square")
    if not np.array_equal(a, a.T):
        raise GraphError("adjacency must be symmetric")
    iu, ju = np.nonzero(np.triu(a, 1))
    if np.any(np.diag(a)):
        raise GraphError("adjacency has nonzero diagonal (self-loop)")
    return build_graph(a.shape[0], zip(iu.tolist(), ju.tolist()))


def components(g: Graph, within: Sequence[int] | None = None) -> list[list[int]]:
    """Connected components of ``g``, or of the subgraph induced by ``within``."""
    verts = list(range(g.n)) if within is None else sorted(set(within))
    allowed = np.zeros(g.n, dtype=bool)
    allowed[verts] = True
    seen = np.zeros(g.n, dtype=bool)
    out = []
    for s in verts:
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if allowed[w] and not seen[w]:
                    seen[w] = True
                    comp.append(int(w))
                    queue.append(w)
        out.append(sorted(comp))
    return out


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(components(g)) == 1


def _vertex_set(g: Graph, X: Iterable[int]) -> list[int]:
    xs = sorted({int(x) for x in X})
    for x in xs:
        if not 0 <= x < g.n:
            raise GraphError(f"vertex {x} out of range for n={g.n}")
    return xs


def edge_boundary(g: Graph, X: Iterable[int]) -> list[tuple[int, int]]:
    """Edges with exactly one endpoint in ``X``."""
    xs = _vertex_set(g, X)
    if not xs or len(xs) == g.n:
        raise GraphError("boundary needs a nonempty proper vertex subset")
    inside = np.zeros(g.n, dtype=bool)
    inside[xs] = True
    return [(u, v) for u, v in g.edges if inside[u] != inside[v]]


@dataclass(frozen=True)
class LeaderPartition:
    leaders: tuple[int, ...]
    followers: tuple[int, ...]
    beta: np.ndarray = field(repr=False, compare=False)
    boundary_size: int = 0

    @property
    def n_followers(self) -> int:
        return len(self.followers)

    @property
    def n_leaders(self) -> int:
        return len(self.leaders)

    def follower_position(self, v: int) -> int:
        return self.followers.index(v)


@dataclass(frozen=True)
class GroundedSystem:
    """L_g = follower_laplacian + diag(beta); ``coupling`` is the follower-by-leader block of L."""

    grounded_laplacian: np.ndarray = field(repr=False)
    coupling: np.ndarray = field(repr=False)
    follower_laplacian: np.ndarray = field(repr=False)
    leader_count_diag: np.ndarray = field(repr=False)
    followers: tuple[int, ...] = ()
    leaders: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return self.grounded_laplacian.shape[0]


def partition(g: Graph, S: Iterable[int]) -> LeaderPartition:
    leaders = _vertex_set(g, S)
    if not leaders:
        raise GraphError("leader set must be nonempty")
    if len(leaders) == g.n:
        raise GraphError("leader set must leave at least one follower")
    is_leader = np.zeros(g.n, dtype=bool)
    is_leader[leaders] = True
    followers = np.flatnonzero(~is_leader)
    beta = g.adjacency[np.ix_(followers, leaders)].sum(axis=1)
    beta.setflags(write=False)
    return LeaderPartition(
        leaders=tuple(leaders),
        followers=tuple(int(f) for f in followers),
        beta=beta,
        boundary_size=int(beta.sum()),
    )


def ground(g: Graph, S: Iterable[int], require_connected: bool = True) -> tuple[LeaderPartition, GroundedSystem]:
    """Delete the leader rows/columns of L; returns the partition and its grounded system."""
    p = partition(g, S)
    if require_connected and not is_connected(g):
        raise GraphError("graph is disconnected")
    F, L = list(p.followers), list(p.leaders)
    a_ff = g.adjacency[np.ix_(F, F)]
    # integer assembly; float only at the end
    lbar = np.diag(a_ff.sum(axis=1)) - a_ff
    e = np.diag(p.beta)
    lg = lbar + e
    lap = np.diag(g.degrees) - g.adjacency
    assert np.array_equal(lg, lap[np.ix_(F, F)])
    mats = []
    for mat in (lg, -g.adjacency[np.ix_(F, L)], lbar, e):
        mat = mat.astype(float)
        mat.setflags(write=False)
        mats.append(mat)
    return p, GroundedSystem(*mats, followers=p.followers, leaders=p.leaders)


@dataclass(frozen=True)
class IncidenceData:
    incidence: np.ndarray = field(repr=False)
    follower_rows: np.ndarray = field(repr=False)
    edge_space: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.incidence.shape[1]


def incidence_data(g: Graph, p: LeaderPartition) -> IncidenceData:
    """Oriented incidence matrix (tail = smaller endpoint, -1; head = larger, +1)."""
    B = np.zeros((g.n, g.m), dtype=np.int64)
    for col, (u, v) in enumerate(g.edges):
        B[u, col] = -1
        B[v, col] = 1
    BF = B[list(p.followers)]
    N = BF.T @ BF
    assert np.array_equal(B @ B.T, np.diag(g.degrees) - g.adjacency)
    out = []
    for mat in (B, BF, N):
        mat = mat.astype(float)
        mat.setflags(write=False)
        out.append(mat)
    return IncidenceData(*out)


# --- named graph families -------------------------------------------------

def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, combinations(range(n), 2))


def star_graph(leaves: int) -> Graph:
    """Star with center 0 and ``leaves`` leaf vertices."""
    return build_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_bipartite(a: int, b: int) -> Graph:
    return build_graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def broom_tree(n: int, delta: int) -> Graph:
    """Broom B_{n,delta}: a star with ``delta`` leaves plus a path hanging off its center.

    Numbering follows the usual drawing: leaves ``0..delta-1``, center ``delta``,
    then the tail ``delta+1..n-1`` walking away from the center. Adding one gives
    the 1-based labels (center of B_{1001,500} is label 501).
    """
    if not 1 <= delta <= n - 1:
        raise GraphError(f"broom needs 1 <= delta <= n-1, got n={n}, delta={delta}")
    c = delta
    edges = [(i, c) for i in range(delta)]
    edges += [(v - 1, v) for v in range(c + 1, n)]
    return build_graph(n, edges)


BROOM_PAIR_GRAY = 3
BROOM_PAIR_BLACK = (2, 4)


def broom_pair() -> Graph:
    """Two degree-3 hubs (2 and 4), each with two leaves, joined through vertex 3."""
    return build_graph(7, [(0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (4, 6)])
