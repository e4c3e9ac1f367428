"""Reduce a random regular element to companion form and show the gauge residuals."""

import numpy as np

from qdsred import reduction

SEED = 20240611


def main() -> None:
    rng = np.random.default_rng(SEED)
    L = reduction.YqElement.random(rng, reg=1, ndiag=2, nterms=2, max_pow=0)
    red = reduction.reduce_universal(L, 5)
    print(f"input regularity {L.reg}, gauge regularity {red.gauge.regularity()}, depth {red.gauge.depth}")
    print(f"largest structural zero {red.max_zero:.2e}")
    for d, v in sorted(reduction.verify_gauge(red.gauge, L, red.companion, 5).items()):
        print(f"  diagonal {d:>2}: residual {v:.2e}")


if __name__ == "__main__":
    main()
