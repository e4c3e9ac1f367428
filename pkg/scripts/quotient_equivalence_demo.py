"""Compare the three evaluations of the reduced bracket at integer size.

For each n and each diagonal perturbation, random coefficient functionals are
bracketed via the finite r-matrix, the restricted universal r-matrix and the
scalar formula; the largest pairwise discrepancy is printed.
"""

import numpy as np

from qdsred import poisson

SEED = 20240611


def main() -> None:
    rng = np.random.default_rng(SEED)
    cases = [None, {1: 0.3}, {1: 0.25, 2: -0.1j}]
    print(f"{'n':>2} {'delta':24} {'fin-scal':>10} {'res-scal':>10} {'fin-res':>10} {'scale':>10}")
    for n in (2, 3, 4):
        for delta in cases:
            rep = poisson.quotient_equivalence_check(n, delta, 10, rng)
            print(f"{n:>2} {str(delta or {}):24} {rep.finite_vs_scalar:10.2e} {rep.restricted_vs_scalar:10.2e} "
                  f"{rep.finite_vs_restricted:10.2e} {rep.scale:10.2e}")


if __name__ == "__main__":
    main()
