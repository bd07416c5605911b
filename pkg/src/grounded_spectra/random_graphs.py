"""Erdos-Renyi and random regular generators plus the Monte Carlo experiment harness."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import Graph, GraphError, build_graph, ground, is_connected
from .numerics import cholesky, cholesky_trace_inverse, largest_eigenvalue, smallest_eigenpair

RESTART_BUDGET = 10_000
REDRAW_BUDGET = 1_000
# pairing-model acceptance is ~exp(-(d^2-1)/4); past this many expected restarts use sequential pairing
PAIRING_MAX_EXPECTED_RESTARTS = 1_000


@dataclass(frozen=True)
class ErConfig:
    n: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"edge probability must be in (0, 1], got {self.p}")
        if self.n < 1:
            raise ValueError("n must be positive")


@dataclass(frozen=True)
class RrgConfig:
    n: int
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.n * self.d % 2:
            raise ValueError(f"n*d must be even (n={self.n}, d={self.d})")
        if not 0 <= self.d < self.n:
            raise ValueError(f"need 0 <= d < n (n={self.n}, d={self.d})")


def gen_er(cfg: ErConfig, rng: np.random.Generator | None = None) -> Graph:
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    iu, ju = np.triu_indices(cfg.n, 1)
    keep = rng.random(iu.size) < cfg.p
    return build_graph(cfg.n, zip(iu[keep].tolist(), ju[keep].tolist()))


def _pairing_once(n: int, d: int, rng: np.random.Generator) -> list[tuple[int, int]] | None:
    stubs = rng.permutation(np.repeat(np.arange(n), d)).reshape(-1, 2)
    u, v = stubs.min(axis=1), stubs.max(axis=1)
    if np.any(u == v):
        return None
    keys = u * n + v
    if np.unique(keys).size != keys.size:
        return None
    return list(zip(u.tolist(), v.tolist()))


def _sequential_once(n: int, d: int, rng: np.random.Generator) -> list[tuple[int, int]] | None:
    """Steger-Wormald: repeatedly join two random free stubs that form a legal new edge."""
    edges: set[tuple[int, int]] = set()
    stubs = list(np.repeat(np.arange(n), d))
    while stubs:
        rng.shuffle(stubs)
        leftovers = []
        it = iter(stubs)
        for a, b in zip(it, it):
            a, b = (a, b) if a < b else (b, a)
            if a != b and (a, b) not in edges:
                edges.add((int(a), int(b)))
            else:
                leftovers += [a, b]
        if leftovers and len(leftovers) == len(stubs):
            pending = sorted(set(leftovers))
            legal = any(
                (x, y) not in edges for i, x in enumerate(pending) for y in pending[i + 1 :]
            )
            if not legal:
                return None
        stubs = leftovers
    return sorted(edges)


def gen_rrg(cfg: RrgConfig, rng: np.random.Generator | None = None, method: str = "auto") -> Graph:
    """Random d-regular simple graph.

    ``pairing`` is the configuration model restarted from scratch on any loop or
    multi-edge, which is exactly uniform; ``sequential`` pairs stubs greedily
    and is only asymptotically uniform but stays fast for larger d. ``auto``
    picks pairing whenever its expected restart count is modest.
    """
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    n, d = cfg.n, cfg.d
    if d == 0:
        return build_graph(n, [])
    if method == "auto":
        method = "pairing" if math.exp((d * d - 1) / 4) <= PAIRING_MAX_EXPECTED_RESTARTS else "sequential"
    once = {"pairing": _pairing_once, "sequential": _sequential_once}[method]
    for _ in range(RESTART_BUDGET):
        edges = once(n, d, rng)
        if edges is not None:
            return build_graph(n, edges)
    raise GraphError(f"random regular generation failed after {RESTART_BUDGET} restarts (n={n}, d={d})")


# --- experiments ------------------------------------------------------------

@dataclass
class ExperimentResult:
    metric: str
    n: int
    samples: list[float]
    target: float | None
    redraws: int = 0

    @property
    def trials(self) -> int:
        return len(self.samples)

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples))

    @property
    def std(self) -> float:
        return float(np.std(self.samples, ddof=1)) if len(self.samples) > 1 else 0.0

    @property
    def relative_error(self) -> float | None:
        if self.target is None:
            return None
        return abs(self.mean - self.target) / abs(self.target)

    def summary(self) -> dict:
        return {
            "metric": self.metric,
            "n": self.n,
            "trials": self.trials,
            "mean": self.mean,
            "std": self.std,
            "target": self.target,
            "relative_error": self.relative_error,
            "redraws": self.redraws,
        }


@dataclass(frozen=True)
class TrialRecord:
    n: int
    trial: int
    h2: float
    hinf: float
    tau_hat: float
    target: float | None
    ratio: float | None
    leaders: tuple[int, ...] = field(default=(), compare=False)
    redraws: int = 0


def thread_count() -> int:
    env = os.environ.get("GROUNDED_SPECTRA_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(4, os.cpu_count() or 1))


def _map_trials(fn: Callable[[int], TrialRecord], trials: int) -> list[TrialRecord]:
    workers = min(thread_count(), trials)
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, range(trials)))


def _sample_connected(make: Callable[[np.random.Generator], Graph], rng: np.random.Generator) -> tuple[Graph, int]:
    for redraws in range(REDRAW_BUDGET):
        g = make(rng)
        if is_connected(g):
            return g, redraws
    raise GraphError(f"no connected sample after {REDRAW_BUDGET} redraws")


def grounded_metrics(g: Graph, leaders: Sequence[int]) -> tuple[float, float, float]:
    """(H2 disorder, H-infinity disorder, delay threshold) for one grounding."""
    _, gs = ground(g, leaders, require_connected=False)
    lg = gs.grounded_laplacian
    c = cholesky(lg)
    lam1 = smallest_eigenpair(lg, factor=c).value
    lmax = largest_eigenvalue(lg)
    return 0.5 * cholesky_trace_inverse(lg, factor=c), 1.0 / lam1, math.pi / (2 * lmax)


def er_targets(p: float, n_leaders: int) -> dict:
    return {
        "h2": (n_leaders + 1) / (2 * n_leaders * p),
        "hinf": 1.0 / (n_leaders * p),
    }


def _trial(kind: str, n: int, param: float, n_leaders: int, seed: int, trial: int) -> TrialRecord:
    rng = np.random.default_rng(seed)
    if kind == "er":
        make = lambda r: gen_er(ErConfig(n, param), rng=r)  # noqa: E731
    elif kind == "rrg":
        make = lambda r: gen_rrg(RrgConfig(n, int(param)), rng=r)  # noqa: E731
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    g, redraws = _sample_connected(make, rng)
    leaders = tuple(sorted(rng.choice(n, size=n_leaders, replace=False).tolist()))
    h2, hinf, tau = grounded_metrics(g, leaders)
    return TrialRecord(n, trial, h2, hinf, tau, None, None, leaders, redraws)


def run_trials(kind: str, n: int, param: float, n_leaders: int, trials: int, base_seed: int) -> list[TrialRecord]:
    """Trial t uses its own generator seeded with base_seed + t; output order is trial order."""
    return _map_trials(lambda t: _trial(kind, n, param, n_leaders, base_seed + t, t), trials)


def run_disorder_experiment(
    kind: str,
    sizes: Sequence[int],
    trials: int,
    param: float,
    n_leaders: int,
    base_seed: int = 42,
) -> tuple[list[ExperimentResult], list[TrialRecord]]:
    """H2 and H-infinity disorder per size.

    ``param`` is p for ER and d for RRG. ER results carry the asymptotic targets;
    RRG results have no finite target (the claim is linear growth in n).
    """
    results, records = [], []
    for n in sizes:
        recs = run_trials(kind, n, param, n_leaders, trials, base_seed)
        tg = er_targets(param, n_leaders) if kind == "er" else {"h2": None, "hinf": None}
        redraws = sum(r.redraws for r in recs)
        for metric, attr in (("h2", "h2"), ("hinf", "hinf")):
            results.append(ExperimentResult(metric, n, [getattr(r, attr) for r in recs], tg[metric], redraws))
        records += recs
    return results, records


def growth_exponent(sizes: Sequence[int], means: Sequence[float]) -> float:
    """Least-squares slope of log(mean) against log(n)."""
    return float(np.polyfit(np.log(sizes), np.log(means), 1)[0])


def run_delay_experiment(
    sizes: Sequence[int], trials: int, p: float, n_leaders: int, base_seed: int = 42
) -> tuple[list[ExperimentResult], list[TrialRecord]]:
    """Per size, the ratio (pi/(2np)) / tau_hat = lambda_max(L_g) / (np) on ER graphs."""
    results, records = [], []
    for n in sizes:
        recs = run_trials("er", n, p, n_leaders, trials, base_seed)
        target = math.pi / (2 * n * p)
        recs = [
            TrialRecord(r.n, r.trial, r.h2, r.hinf, r.tau_hat, target, target / r.tau_hat, r.leaders, r.redraws)
            for r in recs
        ]
        results.append(ExperimentResult("delay_ratio", n, [r.ratio for r in recs], 1.0, sum(r.redraws for r in recs)))
        records += recs
    return results, records


@dataclass(frozen=True)
class RrgDelayCheck:
    tau_hat: float
    lower: float
    upper: float
    lower_ok: bool
    upper_ok: bool


def rrg_delay_bounds_check(cfg: RrgConfig, n_leaders: int = 1, leaders: Sequence[int] | None = None) -> RrgDelayCheck:
    """tau_hat must lie in [pi/(4d), pi/(2d)] for any leader set of a d-regular graph."""
    rng = np.random.default_rng(cfg.seed)
    g = gen_rrg(cfg, rng=rng)
    if not is_connected(g):
        raise GraphError("generated regular graph is disconnected")
    if leaders is None:
        leaders = rng.choice(cfg.n, size=n_leaders, replace=False).tolist()
    _, gs = ground(g, leaders)
    tau = math.pi / (2 * largest_eigenvalue(gs.grounded_laplacian))
    lo, hi = math.pi / (4 * cfg.d), math.pi / (2 * cfg.d)
    eps = 1e-12
    return RrgDelayCheck(tau, lo, hi, tau >= lo - eps, tau <= hi + eps)


# --- manifest ---------------------------------------------------------------

MANIFEST_KEYS = {"kind", "metric", "sizes", "trials", "n_leaders", "base_seed"}


@dataclass(frozen=True)
class Manifest:
    kind: str
    metric: str
    sizes: tuple[int, ...]
    trials: int
    n_leaders: int
    base_seed: int = 42
    p: float | None = None
    d: int | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "Manifest":
        missing = {"kind", "metric", "sizes", "trials", "n_leaders"} - data.keys()
        if missing:
            raise ValueError(f"manifest missing keys: {sorted(missing)}")
        unknown = data.keys() - MANIFEST_KEYS - {"p", "d", "description"}
        if unknown:
            raise ValueError(f"manifest has unknown keys: {sorted(unknown)}")
        kind, metric = data["kind"], data["metric"]
        if kind not in ("er", "rrg"):
            raise ValueError(f"manifest kind must be 'er' or 'rrg', got {kind!r}")
        if metric not in ("h2", "hinf", "delay"):
            raise ValueError(f"manifest metric must be h2, hinf or delay, got {metric!r}")
        if kind == "er" and data.get("p") is None:
            raise ValueError("ER manifest needs 'p'")
        if kind == "rrg" and data.get("d") is None:
            raise ValueError("RRG manifest needs 'd'")
        if metric == "delay" and kind != "er":
            raise ValueError("delay experiments are defined for ER graphs")
        sizes = data["sizes"]
        if not isinstance(sizes, list) or not sizes or not all(isinstance(s, int) and s > 1 for s in sizes):
            raise ValueError("'sizes' must be a nonempty list of integers > 1")
        for key in ("trials", "n_leaders"):
            if not isinstance(data[key], int) or data[key] < 1:
                raise ValueError(f"'{key}' must be a positive integer")
        return cls(
            kind=kind,
            metric=metric,
            sizes=tuple(sizes),
            trials=data["trials"],
            n_leaders=data["n_leaders"],
            base_seed=int(data.get("base_seed", 42)),
            p=None if data.get("p") is None else float(data["p"]),
            d=None if data.get("d") is None else int(data["d"]),
        )

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None} | {"sizes": list(self.sizes)}


def run_manifest(m: Manifest) -> tuple[list[ExperimentResult], list[TrialRecord]]:
    """Run a manifest; trial records carry the target and ratio for the chosen metric."""
    if m.metric == "delay":
        return run_delay_experiment(m.sizes, m.trials, m.p, m.n_leaders, m.base_seed)
    param = m.p if m.kind == "er" else m.d
    results, records = run_disorder_experiment(m.kind, m.sizes, m.trials, param, m.n_leaders, m.base_seed)
    results = [r for r in results if r.metric == m.metric]
    target = er_targets(m.p, m.n_leaders)[m.metric] if m.kind == "er" else None
    out = []
    for r in records:
        value = r.h2 if m.metric == "h2" else r.hinf
        out.append(
            TrialRecord(r.n, r.trial, r.h2, r.hinf, r.tau_hat, target,
                        None if target is None else value / target, r.leaders, r.redraws)
        )
    return results, out


CSV_FIELDS = ("n", "trial", "h2", "hinf", "tau_hat", "target", "ratio")


def records_to_rows(records: Sequence[TrialRecord]) -> list[dict]:
    return [{k: getattr(r, k) for k in CSV_FIELDS} for r in records]

