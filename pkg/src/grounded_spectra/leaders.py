"""Single-leader selection: exhaustive ranking, resistance distances and degree certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, GraphError, is_connected
from .numerics import (
    cholesky,
    cholesky_trace_inverse,
    inverse_from_factor,
    largest_eigenvalue,
    smallest_eigenpair,
)

TIE_TOL = 1e-9
DEFAULT_CAP = 1500


def _grounded_at(g: Graph, k: int) -> np.ndarray:
    keep = np.r_[0:k, k + 1 : g.n]
    return g.laplacian()[np.ix_(keep, keep)]


def _require_connected(g: Graph) -> None:
    if not is_connected(g):
        raise GraphError("graph is disconnected")


@dataclass(frozen=True)
class ResistanceData:
    pairwise: np.ndarray = field(repr=False)
    effective: np.ndarray = field(repr=False)


def resistance_data(g: Graph, reference: int = 0) -> ResistanceData:
    """Resistance distances from one grounded inverse: r_ij = M_ii + M_jj - 2 M_ij.

    ``M`` is L_gk^{-1} padded with a zero row/column at the reference vertex k,
    which also yields r_ik = M_ii.
    """
    _require_connected(g)
    if g.n == 1:
        return ResistanceData(np.zeros((1, 1)), np.zeros(1))
    inv = inverse_from_factor(cholesky(_grounded_at(g, reference)))
    keep = np.r_[0:reference, reference + 1 : g.n]
    M = np.zeros((g.n, g.n))
    M[np.ix_(keep, keep)] = inv
    d = np.diag(M)
    R = d[:, None] + d[None, :] - 2 * M
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 0.0)
    return ResistanceData(R, R.sum(axis=1))


def _argbest(values: np.ndarray, maximize: bool) -> int:
    target = np.nanmax(values) if maximize else np.nanmin(values)
    ok = values >= target - TIE_TOL if maximize else values <= target + TIE_TOL
    return int(np.flatnonzero(ok)[0])


@dataclass(frozen=True)
class LeaderRanking:
    grounding_centrality: np.ndarray = field(repr=False)
    h2_cost: np.ndarray = field(repr=False)
    delay_threshold: np.ndarray = field(repr=False)
    lambda_max: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.h2_cost)

    @property
    def best_h2(self) -> int:
        return _argbest(self.h2_cost, maximize=False)

    @property
    def best_hinf(self) -> int:
        return _argbest(self.grounding_centrality, maximize=True)

    @property
    def best_delay(self) -> int:
        return _argbest(self.delay_threshold, maximize=True)

    def argbest(self, metric: str) -> int:
        return {"h2": self.best_h2, "hinf": self.best_hinf, "delay": self.best_delay}[metric]

    def is_best(self, metric: str, k: int) -> bool:
        """True if k attains the optimum of ``metric`` up to TIE_TOL."""
        if metric == "h2":
            return bool(self.h2_cost[k] <= np.nanmin(self.h2_cost) + TIE_TOL)
        vals = self.grounding_centrality if metric == "hinf" else self.delay_threshold
        return bool(vals[k] >= np.nanmax(vals) - TIE_TOL)

    def records(self) -> list[dict]:
        return [
            {
                "vertex": v,
                "grounding_centrality": float(self.grounding_centrality[v]),
                "h2_cost": float(self.h2_cost[v]),
                "delay_threshold": float(self.delay_threshold[v]),
            }
            for v in range(self.n)
        ]


def exhaustive_ranking(g: Graph, cap: int = DEFAULT_CAP, vertices=None) -> LeaderRanking:
    """Ground every vertex in turn and evaluate all three single-leader metrics.

    Inverse iteration for lambda_1 is warm-started from the previous vertex's
    Perron vector (mapped by vertex id), which makes long sweeps over
    structurally similar groundings cheap. ``vertices`` restricts the sweep;
    skipped vertices get NaN.
    """
    if g.n > cap:
        raise GraphError(f"graph has {g.n} vertices, above the ranking cap of {cap}; raise the cap to proceed")
    _require_connected(g)
    if g.n < 2:
        raise GraphError("ranking needs at least two vertices")
    lam1 = np.full(g.n, np.nan)
    h2 = np.full(g.n, np.nan)
    lmax = np.full(g.n, np.nan)
    L = g.laplacian()
    perron = np.ones(g.n)
    order = range(g.n) if vertices is None else sorted(set(vertices))
    for k in order:
        keep = np.r_[0:k, k + 1 : g.n]
        lg = L[np.ix_(keep, keep)]
        c = cholesky(lg)
        pair = smallest_eigenpair(lg, x0=perron[keep] + 1e-3, factor=c)
        perron[keep] = pair.vector
        lam1[k] = pair.value
        h2[k] = 0.5 * cholesky_trace_inverse(lg, factor=c)
        lmax[k] = largest_eigenvalue(lg)
    return LeaderRanking(lam1, h2, math.pi / (2 * lmax), lmax)


def delay_dominance_certificate(g: Graph, k: int) -> bool:
    """d_k >= 2 d_i for every other vertex i."""
    others = np.delete(g.degrees, k)
    return bool(others.size == 0 or g.degrees[k] >= 2 * others.max())


@dataclass(frozen=True)
class SimultaneousCertificate:
    holds: bool
    xmin: float
    margin: float
    reason: str = ""


def simultaneous_certificate(g: Graph, k: int) -> SimultaneousCertificate:
    """Check d_k >= 2 d_i / x_min^2 for all i != k, x_min from the Perron vector of L_gk.

    ``margin`` is d_k minus the largest right-hand side; nonnegative iff it holds.
    """
    _require_connected(g)
    lg = _grounded_at(g, k)
    xmin = float(smallest_eigenpair(lg).vector.min())
    if xmin <= 0:
        return SimultaneousCertificate(False, xmin, -math.inf, "x_min is zero")
    need = 2.0 * np.delete(g.degrees, k).max() / xmin**2
    margin = float(g.degrees[k] - need)
    return SimultaneousCertificate(margin >= 0, xmin, margin, "" if margin >= 0 else "degree condition fails")


def resistance_trace_identity_check(g: Graph, i: int, k: int) -> float:
    """|trace(L_gi^-1) - (trace(L_gk^-1) + n r_ik - 2 S_i^k)| with S_i^k the i-th row sum of L_gk^-1."""
    if i == k:
        raise GraphError("identity needs two distinct vertices")
    _require_connected(g)
    lhs = cholesky_trace_inverse(_grounded_at(g, i))
    inv_k = inverse_from_factor(cholesky(_grounded_at(g, k)))
    pos = i if i < k else i - 1
    r_ik = inv_k[pos, pos]
    s_ik = inv_k[pos].sum()
    rhs = np.trace(inv_k) + g.n * r_ik - 2 * s_ik
    return float(abs(lhs - rhs))
