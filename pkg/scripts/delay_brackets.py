"""Bracket the empirical delay stability boundary on the three reference systems."""
import math
import time

from grounded_spectra.dde import bracket_threshold
from grounded_spectra.graph import BROOM_PAIR_GRAY, broom_pair, complete_graph, ground, path_graph

CASES = {
    "identity (P3 grounded at middle)": (path_graph(3), [1]),
    "broom pair, gray leader": (broom_pair(), [BROOM_PAIR_GRAY]),
    "K4 grounded at one vertex": (complete_graph(4), [0]),
}


def main() -> None:
    for name, (g, leaders) in CASES.items():
        start = time.perf_counter()
        rep = bracket_threshold(ground(g, leaders)[1])
        elapsed = time.perf_counter() - start
        print(
            f"{name}: bracket [{rep.lower:.5f}, {rep.upper:.5f}], analytic {rep.analytic:.5f} "
            f"(pi/{math.pi / rep.analytic:.3f}), rel err {100 * rep.relative_error:.2f}%, "
            f"{len(rep.probes)} probes, {elapsed:.1f}s"
        )


if __name__ == "__main__":
    main()
