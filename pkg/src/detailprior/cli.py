"""Command-line entry point: ``detailprior <subcommand> ...``.

Exit codes: 0 success, 1 operational failure, 2 oracle tolerance breach.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from detailprior import baselines, dataset, image_core, metrics, prior, solver
from detailprior.solver import SolverParams

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BREACH = 2
ORACLE_CROP = 64

log = logging.getLogger("detailprior")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("DETAILPRIOR_THREADS", "1")))
    except ValueError:
        return 1


def _add_solver_flags(p):
    d = SolverParams()
    g = p.add_argument_group("detail extraction")
    g.add_argument("--alpha", type=float, default=d.alpha, help="detail amplification")
    g.add_argument("--lambda", dest="lam", type=float, default=d.lam, help="fidelity weight")
    g.add_argument("--gamma", type=float, default=d.gamma, help="gradient sensitivity exponent")
    g.add_argument("--eps", type=float, default=d.epsilon, help="noise-exclusion floor")
    g.add_argument("--iters", type=int, default=d.iterations, help="separable iterations T")


def _add_threads(p):
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker threads (default from DETAILPRIOR_THREADS); output does not depend on it")


def _params(args) -> SolverParams:
    return SolverParams(args.alpha, args.lam, args.gamma, args.eps, args.iters)


def _emit(values: dict, as_json: bool):
    if as_json:
        print(json.dumps(values, sort_keys=True))
        return
    for name, value in values.items():
        if isinstance(value, float) and math.isinf(value):
            value = "inf"
        print(f"{name.replace('_', '-')} {value}")


def cmd_extract(args) -> int:
    img = image_core.load_image(args.input)
    detail = prior.extract_detail(img, _params(args), threads=args.threads)
    image_core.write_dpln(detail.values, args.output)
    if args.viz:
        prior.save_visualization(detail.values, args.viz)
    stats = metrics.sparsity_stats(detail.values, "multiplicative", args.threshold)
    _emit({"l1_mean": stats.l1_mean, "near_zero_fraction": stats.near_zero_fraction}, args.json)
    return EXIT_OK


def cmd_enhance(args) -> int:
    img = image_core.load_image(args.input)
    detail = image_core.read_dpln(args.detail)
    out = prior.enhance(img, detail, prior.EnhancementConfig(gain=args.gain))
    image_core.save_image(out, args.output)
    return EXIT_OK


def cmd_decompose(args) -> int:
    img = image_core.load_image(args.input)
    if args.method == "gif":
        params = {"radius": args.radius, "eps": args.gif_eps}
    else:
        params = {"lambda_s": args.msdm_lambda, "alpha_exp": args.msdm_alpha}
    dec = baselines.additive_decompose(img, args.method, params, threads=args.threads)
    image_core.write_dpln(dec.detail, args.output)
    if args.base:
        image_core.write_dpln(dec.base, args.base)
    if args.viz:
        prior.save_visualization(dec.detail, args.viz)
    stats = metrics.sparsity_stats(dec.detail, "additive", args.threshold)
    _emit({"l1_mean": stats.l1_mean, "near_zero_fraction": stats.near_zero_fraction}, args.json)
    return EXIT_OK


def cmd_degrade(args) -> int:
    img = image_core.load_image(args.input)
    image_core.save_image(dataset.degrade(img, args.scale), args.output)
    return EXIT_OK


def cmd_prepare(args) -> int:
    manifest = dataset.prepare_pairs(args.input_dir, args.output_dir, args.scale, _params(args), threads=args.threads)
    for failure in manifest.failures:
        print(f"failed {failure['path']}: {failure['error']}", file=sys.stderr)
    print(f"prepared {len(manifest.entries)} pairs, {len(manifest.failures)} failures")
    return EXIT_OK if manifest.entries else EXIT_ERROR


def cmd_metrics(args) -> int:
    a = metrics.shave(image_core.load_image(args.reference), args.crop_border)
    b = metrics.shave(image_core.load_image(args.test), args.crop_border)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    values = {
        "psnr_rgb": metrics.psnr(a, b),
        "ssim_y": metrics.ssim(image_core.luminance(a), image_core.luminance(b)),
    }
    if args.json and math.isinf(values["psnr_rgb"]):
        values["psnr_rgb"] = "inf"
    _emit(values, args.json)
    return EXIT_OK


def center_crop(img, size: int = ORACLE_CROP):
    h, w = img.shape[:2]
    ch, cw = min(h, size), min(w, size)
    top, left = (h - ch) // 2, (w - cw) // 2
    return img[top : top + ch, left : left + cw]


def oracle_objectives(img, params: SolverParams, threads: int = 1):
    """(fast, dense) objective values of the extraction on ``img``."""
    y = image_core.luminance(img)
    vf = solver.build_vector_field(y, params.alpha)
    w = solver.fidelity_weights(vf, params.gamma, params.epsilon)
    fast = solver.solve_fast(vf, w, params, threads=threads)
    dense = solver.solve_dense(vf, w, params.lam)
    return (
        solver.objective_value(fast, vf, w, params.lam),
        solver.objective_value(dense, vf, w, params.lam),
    )


def cmd_oracle_check(args) -> int:
    img = image_core.load_image(args.input)
    if img.shape[0] * img.shape[1] > solver.DENSE_MAX_PIXELS:
        img = center_crop(img)
    fast, dense = oracle_objectives(img, _params(args), args.threads)
    ratio = solver.objective_ratio(fast, dense)
    print(f"objective-fast {fast!r}")
    print(f"objective-dense {dense!r}")
    print(f"ratio {ratio!r}")
    if ratio > args.tolerance:
        print(f"ratio {ratio:.6f} exceeds tolerance {args.tolerance}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def bench_sizes(sizes, params: SolverParams, repeats: int = 3, threads: int = 1, seed: int = 0):
    """Median solve_fast nanoseconds per pixel for square noise planes of each size."""
    rng = np.random.default_rng(seed)
    results = []
    for n in sizes:
        if n < 16:
            raise ValueError(f"bench sizes must be >= 16, got {n}")
        y = rng.uniform(0.0, 255.0, size=(n, n))
        vf = solver.build_vector_field(y, params.alpha)
        w = solver.fidelity_weights(vf, params.gamma, params.epsilon)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            solver.solve_fast(vf, w, params, threads=threads)
            times.append(time.perf_counter_ns() - t0)
        results.append((n, float(np.median(times)) / (n * n)))
    return results


def cmd_bench(args) -> int:
    for n, ns in bench_sizes(args.sizes, _params(args), args.repeats, args.threads):
        print(f"{n} {ns:.2f} ns/pixel")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="detailprior", description=__doc__, formatter_class=fmt)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract a multiplicative detail layer", formatter_class=fmt)
    p.add_argument("input")
    p.add_argument("output", help="DPLN file for the detail layer")
    p.add_argument("--viz", help="also write a normalized 16-bit PNG (+ .range sidecar)")
    p.add_argument("--threshold", type=float, default=0.01, help="near-zero cutoff on |log2 D|")
    p.add_argument("--json", action="store_true")
    _add_solver_flags(p)
    _add_threads(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("enhance", help="multiply a detail layer back into an image", formatter_class=fmt)
    p.add_argument("input")
    p.add_argument("detail", help="DPLN detail layer")
    p.add_argument("output")
    p.add_argument("--gain", type=float, default=1.0, help="exponent applied to the detail layer")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("decompose", help="additive baseline decomposition", formatter_class=fmt)
    p.add_argument("input")
    p.add_argument("output", help="DPLN file for the signed detail")
    p.add_argument("--base", help="DPLN file for the base layer")
    p.add_argument("--method", choices=baselines.METHODS, default="gif")
    p.add_argument("--radius", type=int, default=2, help="guided filter radius")
    p.add_argument("--gif-eps", type=float, default=0.3, help="guided filter regularizer")
    p.add_argument("--msdm-lambda", type=float, default=1.0, help="WLS smoothing weight")
    p.add_argument("--msdm-alpha", type=float, default=1.2, help="WLS gradient exponent")
    p.add_argument("--viz")
    p.add_argument("--threshold", type=float, default=0.01, help="near-zero cutoff on normalized |d|")
    p.add_argument("--json", action="store_true")
    _add_threads(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("degrade", help="bicubic downscale by an integer factor", formatter_class=fmt)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--scale", type=int, default=4)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("prepare", help="build LR/HR pairs with detail layers", formatter_class=fmt)
    p.add_argument("input_dir")
    p.add_argument("output_dir")
    p.add_argument("--scale", type=int, default=4)
    _add_solver_flags(p)
    _add_threads(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("metrics", help="PSNR (RGB) and SSIM (Y) between two images", formatter_class=fmt)
    p.add_argument("reference")
    p.add_argument("test")
    p.add_argument("--crop-border", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("oracle-check", help="compare fast and exact solver objectives", formatter_class=fmt)
    p.add_argument("input")
    p.add_argument("--tolerance", type=float, default=1.10)
    _add_solver_flags(p)
    _add_threads(p)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("bench", help="time the fast solver on noise planes", formatter_class=fmt)
    p.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    p.add_argument("--repeats", type=int, default=3)
    _add_solver_flags(p)
    _add_threads(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (image_core.ImageError, dataset.DatasetError, ValueError, OSError) as exc:
        print(f"detailprior {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
