import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from grounded_spectra.graph import build_graph, is_connected

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_connected_graph(rng: np.random.Generator, n: int, p: float):
    """Random spanning tree plus independent extra edges; always connected."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(0, i)])) for i in range(1, n)]
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges += list(zip(iu[keep].tolist(), ju[keep].tolist()))
    return build_graph(n, edges)


def random_leaders(rng: np.random.Generator, n: int, max_frac: float = 0.5) -> list[int]:
    size = int(rng.integers(1, max(2, int(max_frac * n)) + 1))
    size = min(size, n - 1)
    return sorted(rng.choice(n, size=size, replace=False).tolist())


@st.composite
def connected_graphs(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.floats(0.0, 0.7))
    g = random_connected_graph(np.random.default_rng(seed), n, p)
    assert is_connected(g)
    return g


@st.composite
def graphs_with_leaders(draw, min_n=2, max_n=12):
    g = draw(connected_graphs(min_n, max_n))
    size = draw(st.integers(1, g.n - 1))
    leaders = draw(st.lists(st.integers(0, g.n - 1), min_size=size, max_size=size, unique=True))
    return g, sorted(leaders)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def hub_graph(rng: np.random.Generator, n_base: int, p: float, hub_degree: int):
    """Random connected base graph on 0..n_base-1 plus hub n_base wired to ``hub_degree`` base vertices."""
    base = random_connected_graph(rng, n_base, p)
    nbrs = rng.choice(n_base, size=min(hub_degree, n_base), replace=False)
    return build_graph(n_base + 1, list(base.edges) + [(n_base, int(v)) for v in nbrs])


def appended_hub(rng: np.random.Generator, n: int, p: float, eps: float):
    """ER(n, p) plus a new vertex n wired to ceil((2 + eps) d_max) random vertices."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    base = build_graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))
    m = min(n, int(np.ceil((2 + eps) * base.degrees.max())))
    nbrs = rng.choice(n, size=m, replace=False)
    return build_graph(n + 1, list(base.edges) + [(n, int(v)) for v in nbrs])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
