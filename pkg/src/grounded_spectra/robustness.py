"""Disturbance (H2 / H-infinity disorder) and delay robustness metrics and their bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bounds import (
    Lambda1Bounds,
    LambdaMaxBounds,
    XminCertificate,
    f_dominating_level,
    lambda1_bounds,
    lambda_max_bounds,
    xmin_certificate,
)
from .graph import Graph, GroundedSystem, LeaderPartition, ground
from .numerics import NumericalError, SpectralSummary, cholesky, cholesky_trace_inverse, spectral_summary


def h2_disorder(gs: GroundedSystem, factor: np.ndarray | None = None) -> float:
    """Half the trace of L_g^{-1} (the squared H2 norm of disturbance-to-error)."""
    return 0.5 * cholesky_trace_inverse(gs.grounded_laplacian, factor=factor)


def hinf_disorder(s: SpectralSummary) -> float:
    if s.lambda_min <= 0:
        raise NumericalError("smallest eigenvalue must be positive")
    return 1.0 / s.lambda_min


def delay_threshold(s: SpectralSummary) -> float:
    if s.lambda_max <= 0:
        raise NumericalError("largest eigenvalue must be positive")
    return math.pi / (2.0 * s.lambda_max)


@dataclass(frozen=True)
class HinfCheck:
    necessary_met: bool
    sufficient_met: bool


def hinf_condition_check(g: Graph, p: LeaderPartition, gamma: float) -> HinfCheck:
    """Necessary: 1/max beta <= gamma. Sufficient: 1/min beta <= gamma (never when min beta = 0)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    bmax, bmin = int(p.beta.max()), int(p.beta.min())
    necessary = bmax > 0 and 1.0 / bmax <= gamma
    sufficient = bmin > 0 and 1.0 / bmin <= gamma
    assert necessary or not sufficient
    return HinfCheck(necessary, sufficient)


@dataclass(frozen=True)
class DelayCheck:
    necessary_met: bool
    sufficient_met: bool
    exact_met: bool


def delay_condition_check(
    g: Graph, p: LeaderPartition, tau: float, lambda_max: float | None = None
) -> DelayCheck:
    if tau <= 0:
        raise ValueError("tau must be positive")
    b = lambda_max_bounds(g, p)
    if lambda_max is None:
        _, gs = ground(g, p.leaders)
        lambda_max = spectral_summary(gs.grounded_laplacian).lambda_max
    necessary = tau < math.pi / (2 * b.lower_dmax)
    sufficient = tau < math.pi / (2 * b.upper_M)
    exact = tau < math.pi / (2 * lambda_max)
    assert (not sufficient or exact) and (not exact or necessary)
    return DelayCheck(necessary, sufficient, exact)


@dataclass(frozen=True)
class RobustnessReport:
    leaders: tuple[int, ...]
    lambda1: float
    lambda_max: float
    x_min: float
    h2_disorder: float
    h2_norm: float
    hinf_disorder: float
    delay_threshold: float
    hinf_interval: tuple[float, float, float | None]
    delay_necessary: float
    delay_sufficient: float
    lambda1_bounds: Lambda1Bounds
    lambda_max_bounds: LambdaMaxBounds
    xmin_certificate: XminCertificate
    f_dominating: int
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        """JSON-ready dict; infinite values become null with an explicit flag."""
        lo, mid, hi = self.hinf_interval
        lb = {k: (v if not isinstance(v, float) or math.isfinite(v) else None)
              for k, v in asdict(self.lambda1_bounds).items()}
        xc = self.xmin_certificate
        return {
            "leaders": list(self.leaders),
            "lambda1": self.lambda1,
            "lambda_max": self.lambda_max,
            "x_min": self.x_min,
            "h2_disorder": self.h2_disorder,
            "h2_norm": self.h2_norm,
            "hinf_disorder": self.hinf_disorder,
            "delay_threshold": self.delay_threshold,
            "hinf_interval": {
                "inv_beta_max": lo,
                "followers_over_boundary": mid,
                "inv_beta_min": hi,
                "inv_beta_min_unbounded": hi is None,
            },
            "delay_necessary": self.delay_necessary,
            "delay_sufficient": self.delay_sufficient,
            "lambda1_bounds": lb,
            "lambda_max_bounds": asdict(self.lambda_max_bounds),
            "xmin_certificate": {
                "value": xc.value if math.isfinite(xc.value) else None,
                "follower_connected": xc.follower_connected,
                "lambda2_follower": xc.lambda2_follower,
                "vacuous": xc.vacuous,
            },
            "f_dominating": self.f_dominating,
            "provenance": dict(self.provenance),
        }


PROVENANCE = {
    "h2_disorder": "0.5 * trace(L_g^-1) via Cholesky",
    "h2_norm": "sqrt(h2_disorder)",
    "hinf_disorder": "1 / lambda_1(L_g)",
    "delay_threshold": "pi / (2 lambda_max(L_g))",
    "hinf_interval": "1/max beta <= (n-|S|)/|dS| <= 1/lambda_1 <= 1/min beta",
    "delay_necessary": "pi / (2 d_max over followers)",
    "delay_sufficient": "pi / (2 M), M = max(d_max^F, max follower-edge d_u + d_v)",
    "lambda1_bounds": "max(min beta, |dS| x_min/(n-|S|)) <= lambda_1 <= min |dX|/|X| <= |dS|/(n-|S|) <= max beta",
    "lambda_max_bounds": "d_max^F <= lambda_max <= M",
    "xmin_certificate": "x_min >= 1 - 2 sqrt(|S||dS|) / lambda_2(Lbar)",
}


def robustness_report(g: Graph, leaders, subset_budget: int = 4096, seed: int = 42) -> RobustnessReport:
    p, gs = ground(g, leaders)
    c = cholesky(gs.grounded_laplacian)
    s = spectral_summary(gs.grounded_laplacian, factor=c)
    h2 = h2_disorder(gs, factor=c)
    lb = lambda1_bounds(g, p, gs, s, subset_budget, np.random.default_rng(seed))
    mb = lambda_max_bounds(g, p)
    bmin, bmax = int(p.beta.min()), int(p.beta.max())
    return RobustnessReport(
        leaders=p.leaders,
        lambda1=s.lambda_min,
        lambda_max=s.lambda_max,
        x_min=s.x_min,
        h2_disorder=h2,
        h2_norm=math.sqrt(h2),
        hinf_disorder=hinf_disorder(s),
        delay_threshold=delay_threshold(s),
        hinf_interval=(1.0 / bmax, p.n_followers / p.boundary_size, 1.0 / bmin if bmin else None),
        delay_necessary=math.pi / (2 * mb.lower_dmax),
        delay_sufficient=math.pi / (2 * mb.upper_M),
        lambda1_bounds=lb,
        lambda_max_bounds=mb,
        xmin_certificate=xmin_certificate(g, p, gs),
        f_dominating=f_dominating_level(g, p),
        provenance=PROVENANCE,
    )
