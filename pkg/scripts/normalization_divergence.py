"""Compare the two normalizations of the branch-averaged top exponent.

Dividing the summed log-norms by the number of words only (per_word) leaves a
quantity that grows linearly in n whenever the average log-norm is nonzero;
dividing by n as well (per_word_per_time) converges. Prints both sequences
and their verdicts for a constant diagonal cocycle and a piecewise-constant one.

Usage: python scripts/normalization_divergence.py [--n-max 14]
"""

from __future__ import annotations

import argparse

from cocyclelab import CocycleGenerator, MapFamily
from cocyclelab.estimators import branch_average_exact

COCYCLES = {
    "diag(2, 1/2)": CocycleGenerator.constant([[2.0, 0.0], [0.0, 0.5]]),
    "piecewise": CocycleGenerator.piecewise_constant(
        [0.0, 0.5, 1.0], [[[2.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 3.0]]]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=14)
    ap.add_argument("--x", type=float, default=0.3)
    args = ap.parse_args()
    fam = MapFamily.expanding_affine(2)
    for name, L in COCYCLES.items():
        for norm in ("per_word", "per_word_per_time"):
            rep = branch_average_exact(fam, L, args.x, args.n_max, norm)
            v = rep.verdict
            tail = ", ".join(f"{e:.5f}" for e in rep.estimates["Lambda_plus"][-4:])
            extra = f"slope {v.slope:.6f}" if v.kind == "diverging" else f"limit {v.limit}"
            print(f"{name:14s} {norm:18s} ... {tail}  -> {v.kind} ({extra})")


if __name__ == "__main__":
    main()
