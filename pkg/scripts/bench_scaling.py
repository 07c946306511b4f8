"""ns/pixel of the fast solver over a range of sizes and thread counts.

    python scripts/bench_scaling.py --sizes 128 256 512 1024 2048 --threads 1 4
"""

import argparse

from detailprior.cli import bench_sizes
from detailprior.solver import SolverParams


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--threads", type=int, nargs="+", default=[1])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    for threads in args.threads:
        for n, ns in bench_sizes(args.sizes, SolverParams(), args.repeats, threads):
            print(f"threads={threads} size={n} {ns:.1f} ns/pixel")


if __name__ == "__main__":
    main()
