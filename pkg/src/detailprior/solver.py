"""Weighted least-squares detail extraction in the log2 luminance domain.

The objective over a log-detail plane ``x`` is

    sum(x**2) + lam * (sum(ah * (vh - dh(x))**2) + sum(av * (vv - dv(x))**2))

with forward differences ``dh``, ``dv`` and edge-aware weights
``a = 1 / (|v|**gamma + epsilon)``. ``solve_dense`` solves the normal
equations directly; ``solve_fast`` approximates them with alternating
horizontal/vertical tridiagonal sweeps under a geometric lambda schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

DENSE_MAX_PIXELS = 4096


@dataclass(frozen=True)
class SolverParams:
    alpha: float = 4.0
    lam: float = 1.0
    gamma: float = 0.75
    epsilon: float = 2.0
    iterations: int = 4

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not 0 < self.gamma <= 2:
            raise ValueError(f"gamma must be in (0, 2], got {self.gamma}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be an integer >= 1, got {self.iterations}")

    def to_dict(self) -> dict:
        return asdict(self)


class VectorField(NamedTuple):
    vh: np.ndarray  # (H, W-1)
    vv: np.ndarray  # (H-1, W)

    @property
    def shape(self) -> tuple[int, int]:
        return self.vh.shape[0], self.vv.shape[1]

    def __neg__(self) -> VectorField:
        return VectorField(-self.vh, -self.vv)


class FidelityWeights(NamedTuple):
    ah: np.ndarray
    av: np.ndarray


def _check_field(field: VectorField, weights: FidelityWeights | None = None):
    h, w = field.shape
    if field.vh.shape != (h, w - 1) or field.vv.shape != (h - 1, w):
        raise ValueError(f"inconsistent field shapes {field.vh.shape}, {field.vv.shape}")
    if weights is not None and (
        weights.ah.shape != field.vh.shape or weights.av.shape != field.vv.shape
    ):
        raise ValueError("weights do not match field dimensions")
    return h, w


def build_vector_field(y, alpha: float) -> VectorField:
    """Amplified log2 ratios of neighbouring luminance samples (offset by +1)."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2 or y.shape[0] < 2 or y.shape[1] < 2:
        raise ValueError(f"luminance plane must be at least 2x2, got {y.shape}")
    if np.any(y < 0):
        raise ValueError("luminance must be nonnegative")
    y1 = y + 1.0
    gain = 1.0 + alpha
    vh = gain * np.log2(y1[:, 1:] / y1[:, :-1])
    vv = gain * np.log2(y1[1:, :] / y1[:-1, :])
    return VectorField(vh, vv)


def psi(z, gamma: float, epsilon: float):
    return np.sqrt(np.abs(z) ** gamma + epsilon)


def fidelity_weights(field: VectorField, gamma: float, epsilon: float) -> FidelityWeights:
    # 1 / psi(z)**2 without the sqrt round trip
    return FidelityWeights(
        1.0 / (np.abs(field.vh) ** gamma + epsilon),
        1.0 / (np.abs(field.vv) ** gamma + epsilon),
    )


def lambda_schedule(lam: float, iterations: int) -> list[float]:
    if iterations < 1 or not lam > 0:
        raise ValueError("need iterations >= 1 and lam > 0")
    denom = 4.0**iterations - 1.0
    return [1.5 * 4.0 ** (iterations - t) / denom * lam for t in range(1, iterations + 1)]


def _difference_operators(h: int, w: int):
    """Sparse forward-difference stencils over a row-major (h, w) grid."""
    idx = np.arange(h * w).reshape(h, w)

    def stencil(hi, lo):
        m = hi.size
        rows = np.concatenate([np.arange(m), np.arange(m)])
        cols = np.concatenate([hi.ravel(), lo.ravel()])
        vals = np.concatenate([np.ones(m), -np.ones(m)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, h * w))

    return stencil(idx[:, 1:], idx[:, :-1]), stencil(idx[1:, :], idx[:-1, :])


def dense_system(field: VectorField, weights: FidelityWeights, lam: float):
    """Assemble the normal equations ``M x = b`` as a dense matrix and vector."""
    h, w = _check_field(field, weights)
    dh, dv = _difference_operators(h, w)
    ah = sp.diags(weights.ah.ravel())
    av = sp.diags(weights.av.ravel())
    m = sp.identity(h * w) + lam * (dh.T @ ah @ dh + dv.T @ av @ dv)
    b = lam * (dh.T @ (weights.ah.ravel() * field.vh.ravel()) + dv.T @ (weights.av.ravel() * field.vv.ravel()))
    return m.toarray(), np.asarray(b).ravel()


def solve_dense(field: VectorField, weights: FidelityWeights, lam: float) -> np.ndarray:
    h, w = _check_field(field, weights)
    if h * w > DENSE_MAX_PIXELS:
        raise ValueError(f"{h}x{w} plane exceeds the dense solver limit of {DENSE_MAX_PIXELS} pixels")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    m, b = dense_system(field, weights, lam)
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        # M = E + PSD terms, so this means the inputs were not finite/positive
        raise RuntimeError("normal-equation matrix is not positive definite") from exc
    return scipy.linalg.cho_solve(factor, b).reshape(h, w)


def _thomas_lines(prev, v, w, lam_t):
    """Solve a batch of tridiagonal line problems.

    Lines run along axis 0 and the batch along axis 1, so each elimination
    step touches one contiguous row. Each column solves
    ``(E + lam_t * D'WD) x = prev + lam_t * D'W v``.
    """
    n = prev.shape[0]
    lw = lam_t * w
    lwv = lw * v
    diag = np.ones_like(prev)
    diag[:-1] += lw
    diag[1:] += lw
    rhs = prev.copy()
    rhs[:-1] -= lwv
    rhs[1:] += lwv
    # super- and sub-diagonal both equal -lw
    cp = np.empty_like(lw)
    dp = np.empty_like(prev)
    denom = diag[0]
    dp[0] = rhs[0] / denom
    for i in range(n - 1):
        cp[i] = -lw[i] / denom
        denom = diag[i + 1] + lw[i] * cp[i]
        dp[i + 1] = (rhs[i + 1] + lw[i] * dp[i]) / denom
    x = dp
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


def solve_line(prev, v, w, lambda_t: float) -> np.ndarray:
    """Exact minimiser of ``sum((x - prev)**2) + lambda_t * sum(w * (v - diff(x))**2)``."""
    prev = np.asarray(prev, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = prev.shape[0]
    if prev.ndim != 1 or n < 2:
        raise ValueError("line must be 1-D with at least 2 samples")
    if v.shape != (n - 1,) or w.shape != (n - 1,):
        raise ValueError("v and w must have length N - 1")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    out = _thomas_lines(prev[:, None], v[:, None], w[:, None], float(lambda_t))
    return out[:, 0]


def _sweep(u, v, w, lam_t, threads):
    """One pass of line solves along axis 0 of ``u`` for every column."""
    if u.shape[0] < 2:
        return u
    cols = u.shape[1]
    if threads <= 1 or cols < 2 * threads:
        return _thomas_lines(u, v, w, lam_t)
    bounds = np.linspace(0, cols, threads + 1).astype(int)
    chunks = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    out = np.empty_like(u)

    def run(span):
        a, b = span
        out[:, a:b] = _thomas_lines(
            np.ascontiguousarray(u[:, a:b]),
            np.ascontiguousarray(v[:, a:b]),
            np.ascontiguousarray(w[:, a:b]),
            lam_t,
        )

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(run, chunks))
    return out


def alternating_solve(field, weights, schedule, init=None, threads: int = 1) -> np.ndarray:
    """Warm-started horizontal-then-vertical sweeps, one pair per schedule entry."""
    h, w = _check_field(field, weights)
    # lines along axis 0: horizontal sweeps work on the transpose
    u_t = np.zeros((w, h)) if init is None else np.array(init, dtype=np.float64).T.copy()
    vh_t = np.ascontiguousarray(field.vh.T)
    ah_t = np.ascontiguousarray(weights.ah.T)
    vv = np.ascontiguousarray(field.vv)
    av = np.ascontiguousarray(weights.av)
    for lam_t in schedule:
        u_t = _sweep(u_t, vh_t, ah_t, lam_t, threads)
        u = _sweep(np.ascontiguousarray(u_t.T), vv, av, lam_t, threads)
        u_t = np.ascontiguousarray(u.T)
    return np.ascontiguousarray(u_t.T)


def solve_fast(field: VectorField, weights: FidelityWeights, params: SolverParams, threads: int = 1) -> np.ndarray:
    schedule = lambda_schedule(params.lam, params.iterations)
    return alternating_solve(field, weights, schedule, threads=threads)


def objective_value(solution, field: VectorField, weights: FidelityWeights, lam: float) -> float:
    x = np.asarray(solution, dtype=np.float64)
    _check_field(field, weights)
    if x.shape != field.shape:
        raise ValueError(f"solution shape {x.shape} does not match field {field.shape}")
    rh = field.vh - np.diff(x, axis=1)
    rv = field.vv - np.diff(x, axis=0)
    fidelity = float(np.sum(weights.ah * rh * rh) + np.sum(weights.av * rv * rv))
    return float(np.sum(x * x)) + lam * fidelity


def objective_ratio(fast_obj: float, dense_obj: float) -> float:
    """fast/dense objective ratio with 0/0 defined as 1."""
    if dense_obj == 0:
        return 1.0 if fast_obj == 0 else math.inf
    return fast_obj / dense_obj
