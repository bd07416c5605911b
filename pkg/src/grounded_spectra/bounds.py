"""Graph-theoretic bounds on the extreme eigenvalues of the grounded Laplacian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import (
    Graph,
    GraphError,
    GroundedSystem,
    LeaderPartition,
    build_graph,
    components,
    ground,
    is_connected,
)
from .numerics import SpectralSummary, eigendecompose, smallest_eigenpair

EXACT_ISOPERIMETRIC_MAX = 20
_CHUNK = 1 << 15


@dataclass(frozen=True)
class Lambda1Bounds:
    lower_beta_min: float
    lower_boundary: float
    upper_isoperimetric: float
    upper_boundary: float
    upper_beta_max: float
    xmin_lower_bound: float
    isoperimetric_exact: bool = True

    @property
    def lower(self) -> float:
        return max(self.lower_beta_min, self.lower_boundary)

    def chain(self, lam1: float) -> list[float]:
        return [self.lower, lam1, self.upper_isoperimetric, self.upper_boundary, self.upper_beta_max]


@dataclass(frozen=True)
class LambdaMaxBounds:
    lower_dmax: float
    upper_M: float


@dataclass(frozen=True)
class XminCertificate:
    value: float
    follower_connected: bool
    lambda2_follower: float

    @property
    def vacuous(self) -> bool:
        return not self.follower_connected or self.value <= 0


def _ratio_for_masks(masks: np.ndarray, k: int, deg: np.ndarray, fedges: np.ndarray) -> np.ndarray:
    bits = ((masks[:, None] >> np.arange(k)) & 1).astype(np.int64)
    size = bits.sum(axis=1)
    inner = np.zeros(len(masks), dtype=np.int64)
    if len(fedges):
        inner = (bits[:, fedges[:, 0]] & bits[:, fedges[:, 1]]).sum(axis=1)
    return (bits @ deg - 2 * inner) / size


def isoperimetric_upper(
    g: Graph, p: LeaderPartition, subset_budget: int = 4096, rng: np.random.Generator | None = None
) -> tuple[float, bool]:
    """min over nonempty follower subsets X of |dX|/|X| (boundary in the whole graph).

    Exact by enumeration up to EXACT_ISOPERIMETRIC_MAX followers; otherwise the
    minimum over singletons, the full follower set and ``subset_budget`` random
    subsets, which is still an upper bound on lambda_1.
    """
    F = np.array(p.followers)
    k = len(F)
    deg = g.degrees[F].astype(np.int64)
    pos = {int(v): i for i, v in enumerate(F)}
    fedges = np.array([(pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos], dtype=np.int64)
    fedges = fedges.reshape(-1, 2)
    if k <= EXACT_ISOPERIMETRIC_MAX:
        best = np.inf
        total = 1 << k
        for start in range(1, total, _CHUNK):
            masks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
            best = min(best, float(_ratio_for_masks(masks, k, deg, fedges).min()))
        return best, True
    rng = np.random.default_rng(0) if rng is None else rng
    best = min(float(deg.min()), p.boundary_size / k)
    adj_f = g.adjacency[np.ix_(F, F)]
    for _ in range(subset_budget):
        size = int(rng.integers(1, k + 1))
        X = rng.choice(k, size=size, replace=False)
        inner = int(adj_f[np.ix_(X, X)].sum()) // 2
        best = min(best, (int(deg[X].sum()) - 2 * inner) / size)
    return best, False


def xmin_certificate(g: Graph, p: LeaderPartition, gs: GroundedSystem) -> XminCertificate:
    """Lower bound 1 - 2 sqrt(|S| |dS|) / lambda_2(Lbar) on the Perron vector's smallest entry.

    Reported unclamped; ``-inf`` with ``follower_connected=False`` when the
    follower subgraph is disconnected (or a single vertex) and the bound is void.
    """
    if p.n_followers < 2 or len(components(g, p.followers)) > 1:
        return XminCertificate(-np.inf, False, 0.0)
    lam2 = float(eigendecompose(gs.follower_laplacian).eigenvalues[1])
    value = 1.0 - 2.0 * np.sqrt(p.n_leaders * p.boundary_size) / lam2
    return XminCertificate(float(value), True, lam2)


def lambda1_bounds(
    g: Graph,
    p: LeaderPartition,
    gs: GroundedSystem,
    s: SpectralSummary,
    subset_budget: int = 4096,
    rng: np.random.Generator | None = None,
) -> Lambda1Bounds:
    beta = p.beta
    k = p.n_followers
    iso, exact = isoperimetric_upper(g, p, subset_budget, rng)
    return Lambda1Bounds(
        lower_beta_min=float(beta.min()),
        lower_boundary=p.boundary_size / k * s.x_min,
        upper_isoperimetric=iso,
        upper_boundary=p.boundary_size / k,
        upper_beta_max=float(beta.max()),
        xmin_lower_bound=xmin_certificate(g, p, gs).value,
        isoperimetric_exact=exact,
    )


def f_dominating_level(g: Graph, p: LeaderPartition) -> int:
    """Largest f such that the leader set is f-dominating."""
    return int(p.beta.min())


def follower_max_degree(g: Graph, p: LeaderPartition) -> int:
    return int(g.degrees[list(p.followers)].max())


def follower_edges(g: Graph, p: LeaderPartition) -> list[tuple[int, int]]:
    fset = set(p.followers)
    return [(u, v) for u, v in g.edges if u in fset and v in fset]


def lambda_max_bounds(g: Graph, p: LeaderPartition) -> LambdaMaxBounds:
    dmax = follower_max_degree(g, p)
    pair = max((int(g.degrees[u] + g.degrees[v]) for u, v in follower_edges(g, p)), default=0)
    return LambdaMaxBounds(float(dmax), float(max(dmax, pair)))


def design_optimal_network(n_followers: int, n_leaders: int, beta: int) -> tuple[Graph, LeaderPartition]:
    """Followers 0..n_followers-1 form an independent set, each wired to exactly beta leaders.

    Follower i takes leaders (i*beta + j) mod n_leaders for j < beta; the
    leaders are chained into a path so the whole graph is connected.
    """
    if beta < 1:
        raise GraphError("beta must be at least 1")
    if n_followers < 1 or n_leaders < 1:
        raise GraphError("need at least one follower and one leader")
    if beta > n_leaders:
        raise GraphError(f"beta={beta} exceeds the number of leaders ({n_leaders})")
    leaders = [n_followers + j for j in range(n_leaders)]
    edges = []
    for i in range(n_followers):
        picks = {(i * beta + j) % n_leaders for j in range(beta)}
        assert len(picks) == beta
        edges += [(i, leaders[j]) for j in sorted(picks)]
    edges += [(leaders[j], leaders[j + 1]) for j in range(n_leaders - 1)]
    g = build_graph(n_followers + n_leaders, edges)
    p, _ = ground(g, leaders)
    return g, p


@dataclass(frozen=True)
class EdgeRemoval:
    lambda1_before: float
    lambda1_after: float
    strictly_decreased: bool
    beta_uniform: bool


def robustness_under_edge_removal(g: Graph, p: LeaderPartition, edge: tuple[int, int]) -> EdgeRemoval:
    u, v = edge
    if not (0 <= u < g.n and 0 <= v < g.n) or not g.has_edge(u, v):
        raise GraphError(f"edge ({u}, {v}) is not in the graph")
    leaders = set(p.leaders)
    if (u in leaders) == (v in leaders):
        raise GraphError(f"edge ({u}, {v}) does not join a follower to a leader")
    key = (min(u, v), max(u, v))
    h = build_graph(g.n, [e for e in g.edges if e != key])
    if not is_connected(h):
        raise GraphError(f"removing edge ({u}, {v}) disconnects the graph")
    _, before = ground(g, p.leaders)
    _, after = ground(h, p.leaders)
    l0 = smallest_eigenpair(before.grounded_laplacian).value
    l1 = smallest_eigenpair(after.grounded_laplacian).value
    uniform = bool(p.beta.min() == p.beta.max())
    return EdgeRemoval(l0, l1, l1 < l0, uniform)
