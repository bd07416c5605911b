"""Time-domain simulation of the follower dynamics with disturbances and uniform delay.

    x_F'(t) = -L_g x_F(t - tau) + L_12 x_S + w(t)

integrated with a fixed-step classical RK4. With tau > 0 every stage only
needs delayed states, which are read from a history buffer exactly tau/dt
steps back (midpoint stages average the two neighbouring stored states).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
from numba import njit

from .graph import GroundedSystem
from .numerics import cholesky, cholesky_trace_inverse

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"

CONVERGE_FACTOR = 1e-6
DIVERGE_FACTOR = 1e6
MIN_STEPS_PER_DELAY = 200
MAX_DT_LAMBDA = 0.05


@njit(cache=True)
def _matvec_into(A, x, b, w, out):
    k = A.shape[0]
    for i in range(k):
        acc = b[i] + w[i]
        for j in range(k):
            acc -= A[i, j] * x[j]
        out[i] = acc


@njit(cache=True)
def _rk4(A, b, hist, lag, dt, nsteps, noise, xstar, stride, blowup):
    """Integrate; returns (recorded states, error norms, last step reached)."""
    k = A.shape[0]
    ring = hist.copy()
    # ring slot of step n is (n + lag) % (lag + 1); hist[j] sits at step j - lag
    x = hist[lag].copy()
    nrec = nsteps // stride + 1
    rec = np.full((nrec, k), np.nan)
    rec[0] = x
    err = np.full(nsteps + 1, np.nan)
    e0 = np.sqrt(np.sum((x - xstar) ** 2))
    err[0] = e0
    has_noise = noise.shape[0] > 0
    w = np.zeros(k)
    k1 = np.empty(k)
    k2 = np.empty(k)
    k3 = np.empty(k)
    k4 = np.empty(k)
    tmp = np.empty(k)
    for n in range(nsteps):
        if has_noise:
            w = noise[n]
        if lag == 0:
            _matvec_into(A, x, b, w, k1)
            for i in range(k):
                tmp[i] = x[i] + 0.5 * dt * k1[i]
            _matvec_into(A, tmp, b, w, k2)
            for i in range(k):
                tmp[i] = x[i] + 0.5 * dt * k2[i]
            _matvec_into(A, tmp, b, w, k3)
            for i in range(k):
                tmp[i] = x[i] + dt * k3[i]
            _matvec_into(A, tmp, b, w, k4)
        else:
            s0 = n % (lag + 1)
            s1 = (n + 1) % (lag + 1)
            _matvec_into(A, ring[s0], b, w, k1)
            for i in range(k):
                tmp[i] = 0.5 * (ring[s0, i] + ring[s1, i])
            _matvec_into(A, tmp, b, w, k2)
            k3[:] = k2
            _matvec_into(A, ring[s1], b, w, k4)
        e = 0.0
        for i in range(k):
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            e += (x[i] - xstar[i]) ** 2
        e = np.sqrt(e)
        if lag > 0:
            ring[(n + 1 + lag) % (lag + 1)] = x
        err[n + 1] = e
        if (n + 1) % stride == 0:
            rec[(n + 1) // stride] = x
        if not np.isfinite(e) or (blowup > 0 and e > blowup):
            return rec, err, n + 1
    return rec, err, nsteps


def equilibrium(gs: GroundedSystem, x_S) -> np.ndarray:
    """Fixed point of the undisturbed dynamics: L_g x* = L_12 x_S.

    ``coupling`` stores the (nonpositive) off-diagonal block of L, so the
    constant input is ``-coupling @ x_S``.
    """
    x_S = np.asarray(x_S, dtype=float)
    c = cholesky(gs.grounded_laplacian)
    return sla.cho_solve((c, True), -gs.coupling @ x_S)


@dataclass
class SimConfig:
    dt: float
    horizon: float
    tau: float = 0.0
    leader_states: np.ndarray | None = None
    x0: np.ndarray | None = None
    history_init: Callable[[float], np.ndarray] | None = None
    disturbance: str = "zero"  # zero | constant | white
    disturbance_value: np.ndarray | float = 0.0
    noise_std: float = 0.0
    seed: int = 0
    record_stride: int = 1
    extend_once: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.tau > 0:
            ratio = self.tau / self.dt
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError(f"tau/dt must be an integer, got {ratio}")
            if self.horizon < 10 * self.tau:
                raise ValueError("horizon must be at least 10 * tau")
        if self.disturbance not in ("zero", "constant", "white"):
            raise ValueError(f"unknown disturbance kind {self.disturbance!r}")

    @property
    def lag(self) -> int:
        return int(round(self.tau / self.dt))


@dataclass
class Trajectory:
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    x_star: np.ndarray = field(repr=False)
    terminal_error: float
    initial_error: float
    classification: str
    horizon: float
    overflow_time: float | None = None


def classify(errors: np.ndarray, e0: float, stopped_early: bool) -> str:
    if stopped_early or not np.isfinite(errors[-1]):
        return DIVERGED
    if e0 == 0:
        return CONVERGED
    if np.nanmax(errors) > DIVERGE_FACTOR * e0:
        return DIVERGED
    window = errors[-max(1, len(errors) // 10) :]
    if window.max() < CONVERGE_FACTOR * e0:
        return CONVERGED
    return INCONCLUSIVE


def _run(gs: GroundedSystem, cfg: SimConfig, horizon: float) -> Trajectory:
    A = np.ascontiguousarray(gs.grounded_laplacian, dtype=float)
    k = A.shape[0]
    x_S = np.ones(len(gs.leaders)) if cfg.leader_states is None else np.asarray(cfg.leader_states, float)
    b = -gs.coupling @ x_S
    xstar = equilibrium(gs, x_S)
    if cfg.disturbance == "constant":
        b = b + np.broadcast_to(np.asarray(cfg.disturbance_value, float), (k,))
    nsteps = int(round(horizon / cfg.dt))
    lag = cfg.lag
    if cfg.history_init is not None:
        hist = np.array([cfg.history_init(-(lag - j) * cfg.dt) for j in range(lag + 1)], dtype=float)
    else:
        x0 = np.zeros(k) if cfg.x0 is None else np.asarray(cfg.x0, float)
        hist = np.tile(x0, (lag + 1, 1))
    if cfg.disturbance == "white":
        rng = np.random.default_rng(cfg.seed)
        noise = rng.standard_normal((nsteps, k)) * (cfg.noise_std / math.sqrt(cfg.dt))
    else:
        noise = np.zeros((0, k))
    e0 = float(np.linalg.norm(hist[-1] - xstar))
    blowup = DIVERGE_FACTOR * e0 if cfg.disturbance != "white" and e0 > 0 else -1.0
    stride = max(1, cfg.record_stride)
    rec, err, last = _rk4(A, b, hist, lag, cfg.dt, nsteps, noise, xstar, stride, blowup)
    stopped = last < nsteps
    err = err[: last + 1]
    nrec = last // stride + 1
    times = np.arange(nrec) * stride * cfg.dt
    cls = classify(err, e0, stopped)
    return Trajectory(
        times=times,
        states=rec[:nrec],
        errors=err,
        x_star=xstar,
        terminal_error=float(err[-1]),
        initial_error=e0,
        classification=cls,
        horizon=horizon,
        overflow_time=last * cfg.dt if stopped else None,
    )


def simulate(gs: GroundedSystem, cfg: SimConfig) -> Trajectory:
    """Simulate; an inconclusive run is repeated once with a doubled horizon."""
    traj = _run(gs, cfg, cfg.horizon)
    if traj.classification == INCONCLUSIVE and cfg.extend_once and cfg.disturbance != "white":
        traj = _run(gs, cfg, 2 * cfg.horizon)
    return traj


def _gershgorin(gs: GroundedSystem) -> float:
    return float(np.abs(gs.grounded_laplacian).sum(axis=1).max())


def probe_config(gs: GroundedSystem, tau: float, horizon: float, stride: int = 1000, seed: int = 0) -> SimConfig:
    """Step size with tau/dt >= 200 and dt * (Gershgorin bound on lambda_max) <= 0.05.

    The start state is a seeded random vector so that every eigenmode is
    excited; a start aligned with the Perron vector would hide the fast modes.
    """
    steps = max(MIN_STEPS_PER_DELAY, math.ceil(tau * _gershgorin(gs) / MAX_DT_LAMBDA))
    dt = tau / steps
    x0 = np.random.default_rng(seed).standard_normal(gs.size)
    return SimConfig(dt=dt, horizon=max(horizon, 10 * tau), tau=tau, x0=x0, record_stride=stride)


@dataclass
class BracketReport:
    lower: float
    upper: float
    analytic: float
    probes: list[tuple[float, str]]
    resolved: bool

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def relative_error(self) -> float:
        return abs(self.midpoint - self.analytic) / self.analytic

    def contains_analytic(self) -> bool:
        return self.lower <= self.analytic <= self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "midpoint": self.midpoint,
            "analytic": self.analytic,
            "relative_error": self.relative_error,
            "resolved": self.resolved,
            "probes": [{"tau": t, "classification": c} for t, c in self.probes],
        }


def bracket_threshold(gs: GroundedSystem, tol: float | None = None, rel_tol: float = 0.01, max_probes: int = 60) -> BracketReport:
    """Bisect on tau between a stable and an unstable delay using simulated classification.

    The starting pair comes from Gershgorin (stable side) and the largest
    diagonal entry (unstable side), each confirmed by simulation. The horizon
    is sized so that probes farther than tol/8 from the boundary classify
    decisively; an inconclusive probe is replaced by probes a quarter-width
    to either side.
    """
    diag_max = float(np.max(np.diag(gs.grounded_laplacian)))
    lo = math.pi / (2 * _gershgorin(gs))
    hi = 1.2 * math.pi / (2 * diag_max)
    if tol is None:
        tol = rel_tol * 0.5 * (lo + hi) if lo < hi else rel_tol * lo
    probes: list[tuple[float, str]] = []

    def horizon_for(tau: float) -> float:
        # near the boundary the slowest mode decays/grows at about 0.7 * delta / tau
        delta = (tol / 8) / tau
        return 25.0 * tau / delta

    def probe(tau: float) -> str:
        cls = simulate(gs, probe_config(gs, tau, horizon_for(tau))).classification
        probes.append((tau, cls))
        return cls

    for _ in range(20):
        if probe(lo) == CONVERGED:
            break
        lo *= 0.5
    else:
        raise RuntimeError("could not find a stable delay")
    for _ in range(20):
        if probe(hi) == DIVERGED:
            break
        hi *= 1.5
    else:
        raise RuntimeError("could not find an unstable delay")

    resolved = True
    while hi - lo > tol and len(probes) < max_probes:
        mid = 0.5 * (lo + hi)
        cls = probe(mid)
        if cls == CONVERGED:
            lo = mid
        elif cls == DIVERGED:
            hi = mid
        else:
            a, b = mid - tol / 4, mid + tol / 4
            ca, cb = probe(a), probe(b)
            if ca == CONVERGED:
                lo = max(lo, a)
            if cb == DIVERGED:
                hi = min(hi, b)
            if ca != CONVERGED or cb != DIVERGED:
                resolved = False
                break
    lam_max = float(np.linalg.eigvalsh(gs.grounded_laplacian)[-1])
    return BracketReport(lo, hi, math.pi / (2 * lam_max), probes, resolved and hi - lo <= tol)


def disturbance_energy_check(
    gs: GroundedSystem,
    trials: int = 50,
    noise_std: float = 1.0,
    horizon: float = 600.0,
    burn_in: float | None = None,
    dt: float | None = None,
    base_seed: int = 42,
) -> float:
    """Monte Carlo estimate of the stationary total error variance per unit noise intensity.

    The system starts at equilibrium so the nominal trajectory is constant and
    the error is x - x*. Each trial averages |e|^2 over the post-burn-in window;
    the estimate is the mean across trials divided by noise_std^2, to be
    compared with half the trace of L_g^{-1}.
    """
    lam_bound = _gershgorin(gs)
    dt = MAX_DT_LAMBDA / lam_bound if dt is None else dt
    burn_in = horizon / 6 if burn_in is None else burn_in
    x_S = np.ones(len(gs.leaders))
    xstar = equilibrium(gs, x_S)
    estimates = []
    for t in range(trials):
        cfg = SimConfig(dt=dt, horizon=horizon, leader_states=x_S, x0=xstar, disturbance="white",
                        noise_std=noise_std, seed=base_seed + t)
        traj = _run(gs, cfg, horizon)
        start = int(burn_in / dt)
        estimates.append(float(np.mean(traj.errors[start:] ** 2)))
    return float(np.mean(estimates)) / noise_std**2


def h2_reference(gs: GroundedSystem) -> float:
    return 0.5 * cholesky_trace_inverse(gs.grounded_laplacian)
