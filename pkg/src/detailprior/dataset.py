"""LR/HR pair preparation with detail layers for detail-supervised SR training."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from detailprior.image_core import (
    ImageError,
    as_image,
    atomic_output,
    load_image,
    mod_crop,
    quantize,
    resize_image,
    save_image,
    write_dpln,
)
from detailprior.prior import extract_detail
from detailprior.solver import SolverParams

log = logging.getLogger(__name__)

SUBDIRS = ("HR", "LR", "HR_detail", "LR_detail")


class DatasetError(Exception):
    pass


@dataclass
class PairManifest:
    entries: list[dict]
    params: SolverParams
    scale: int
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "params": self.params.to_dict(),
            "entries": self.entries,
            "failures": self.failures,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PairManifest:
        return cls(data["entries"], SolverParams(**data["params"]), data["scale"], data.get("failures", []))

    @classmethod
    def load(cls, path) -> PairManifest:
        return cls.from_dict(json.loads(Path(path).read_text()))


def degrade(hr, scale: int = 4) -> np.ndarray:
    """Antialiased bicubic downscale by an exact integer factor."""
    img = as_image(hr)
    if scale < 2:
        raise ValueError(f"scale must be >= 2, got {scale}")
    h, w = img.shape[:2]
    if h % scale or w % scale:
        raise ValueError(f"{w}x{h} is not divisible by scale {scale}; mod-crop first")
    return resize_image(img, w // scale, h // scale)


def _process(path: Path, out: Path, scale: int, params: SolverParams, threads: int) -> dict:
    # details come from the quantized images exactly as written to disk
    hr = quantize(mod_crop(load_image(path), scale))
    lr = quantize(degrade(hr, scale))
    stem = path.stem
    rel = {
        "hr_path": f"HR/{stem}.png",
        "lr_path": f"LR/{stem}.png",
        "hr_detail_path": f"HR_detail/{stem}.dpln",
        "lr_detail_path": f"LR_detail/{stem}.dpln",
    }
    save_image(hr, out / rel["hr_path"])
    save_image(lr, out / rel["lr_path"])
    write_dpln(extract_detail(hr, params, threads=threads).values, out / rel["hr_detail_path"])
    write_dpln(extract_detail(lr, params, threads=threads).values, out / rel["lr_detail_path"])
    return {**rel, "width": hr.shape[1], "height": hr.shape[0], "scale": scale}


def prepare_pairs(input_dir, output_dir, scale: int = 4, params: SolverParams | None = None, threads: int = 1) -> PairManifest:
    """Build HR/LR images and their detail layers for every image in ``input_dir``.

    Files are processed in filename order. Files that fail to load or process
    are recorded in ``failures`` without stopping the batch.
    """
    params = params or SolverParams()
    input_dir, output_dir = Path(input_dir), Path(output_dir)
    if not input_dir.is_dir():
        raise DatasetError(f"{input_dir}: not a directory")
    files = sorted(p for p in input_dir.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise DatasetError(f"{input_dir}: no input files")
    try:
        for sub in SUBDIRS:
            (output_dir / sub).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetError(f"{output_dir}: {exc.strerror or exc}") from exc

    seen = set()
    jobs = []
    failures = []
    for path in files:
        if path.stem in seen:
            failures.append({"path": path.name, "error": f"duplicate stem {path.stem!r}"})
            continue
        seen.add(path.stem)
        jobs.append(path)

    # parallelise across files when there are several, else inside the solver
    by_file = threads > 1 and len(jobs) > 1
    inner = 1 if by_file else threads

    def run(path):
        try:
            return _process(path, output_dir, scale, params, inner)
        except (ImageError, ValueError) as exc:
            return exc

    if by_file:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(p) for p in jobs]

    entries = []
    for path, result in zip(jobs, results):
        if isinstance(result, Exception):
            log.warning("skipping %s: %s", path.name, result)
            failures.append({"path": path.name, "error": str(result)})
        else:
            log.info("prepared %s", path.name)
            entries.append(result)
    failures.sort(key=lambda f: f["path"])

    manifest = PairManifest(entries, params, scale, failures)
    try:
        with atomic_output(output_dir / "manifest.json") as tmp:
            tmp.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    except OSError as exc:
        raise DatasetError(f"{output_dir}: {exc.strerror or exc}") from exc
    return manifest

