"""Fast vs exact objective ratio across parameter settings on corpus crops.

    python scripts/oracle_sweep.py --crops 10 --size 32
"""

import argparse
import itertools

import numpy as np

from detailprior.cli import oracle_objectives
from detailprior.corpus import natural_crops, noise_planes
from detailprior.solver import SolverParams


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--crops", type=int, default=10)
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    images = natural_crops(args.crops, args.size, args.seed) + [
        p[:, :, None] for p in noise_planes(args.crops, args.size, args.seed)
    ]
    print("alpha  lambda  gamma  eps  T   median   max")
    for alpha, lam, gamma, eps, iters in itertools.product((0, 4), (0.25, 1, 4), (0.75,), (0.5, 2), (1, 4, 8)):
        params = SolverParams(alpha, lam, gamma, eps, iters)
        ratios = []
        for img in images:
            fast, dense = oracle_objectives(img, params)
            ratios.append(fast / dense if dense else 1.0)
        print(f"{alpha:5g} {lam:7g} {gamma:6g} {eps:4g} {iters:2d} {np.median(ratios):8.4f} {max(ratios):6.4f}")


if __name__ == "__main__":
    main()
