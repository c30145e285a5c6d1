"""Regression metrics, histogram divergences, Friedman/Nemenyi ranking, 2-D PCA."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

DIVERGENCE_BINS = 100
DIVERGENCE_EPS = 1e-8

# Studentized range statistic divided by sqrt(2), infinite degrees of freedom
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}


@dataclass(frozen=True)
class MetricsReport:
    mae: float
    mse: float
    r2: float
    nde: float
    n: int

    def as_dict(self) -> dict[str, float]:
        return {"mae": self.mae, "mse": self.mse, "r2": self.r2, "nde": self.nde}


def regression_metrics(y_true, y_pred) -> MetricsReport:
    """MAE, MSE, R^2 and NDE on the scale of the inputs.

    NDE is sum((y - yhat)^2) / sum(y^2).
    """
    y = np.asarray(y_true, dtype=np.float64).ravel()
    yhat = np.asarray(y_pred, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.size} vs {yhat.size}")
    if y.size < 2:
        raise ValueError("need at least two samples")
    err = y - yhat
    sse = float(np.sum(err * err))
    energy = float(np.sum(y * y))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if energy == 0:
        raise ValueError("NDE undefined: target is identically zero")
    if ss_tot == 0:
        raise ValueError("R^2 undefined: target has zero variance")
    return MetricsReport(
        mae=float(np.mean(np.abs(err))),
        mse=sse / y.size,
        r2=1.0 - sse / ss_tot,
        nde=sse / energy,
        n=int(y.size),
    )


# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DivergenceReport:
    kl: float  # KL(a || b), nats
    kl_reverse: float  # KL(b || a)
    js: float
    bins: int
    smoothing_eps: float


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / q[nz])))


def js_divergence(p: np.ndarray, q: np.ndarray) -> float:
    m = 0.5 * (np.asarray(p) + np.asarray(q))
    return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m)


def histogram_pmfs(a, b, bins: int = DIVERGENCE_BINS, eps: float = DIVERGENCE_EPS):
    """Smoothed probability mass functions on shared equal-width bins."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("divergence needs two non-empty samples")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    pa = np.histogram(a, edges)[0] / a.size + eps
    pb = np.histogram(b, edges)[0] / b.size + eps
    return pa / pa.sum(), pb / pb.sum()


def histogram_divergence(a, b, bins: int = DIVERGENCE_BINS, eps: float = DIVERGENCE_EPS) -> DivergenceReport:
    p, q = histogram_pmfs(a, b, bins, eps)
    return DivergenceReport(kl_divergence(p, q), kl_divergence(q, p), js_divergence(p, q), bins, eps)


# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class RankReport:
    methods: list[str]
    avg_ranks: dict[str, float]
    friedman_statistic: float
    p_value: float
    critical_difference: float
    significant: np.ndarray  # k x k bool, |R_i - R_j| > CD
    n_blocks: int
    alpha: float

    def records(self) -> list[dict]:
        """(method, avg_rank, CD) rows for critical-difference plotting."""
        return [
            {"method": m, "avg_rank": self.avg_ranks[m], "cd": self.critical_difference}
            for m in sorted(self.methods, key=lambda m: self.avg_ranks[m])
        ]


def nemenyi_cd(k: int, n_blocks: int, alpha: float = 0.05) -> float:
    try:
        q = NEMENYI_Q[alpha][k]
    except KeyError:
        raise ValueError(f"no Nemenyi constant for alpha={alpha}, k={k}") from None
    return q * math.sqrt(k * (k + 1) / (6.0 * n_blocks))


def block_ranks(scores: np.ndarray) -> np.ndarray:
    """Fractional ranks within each column (block); lower score = rank 1."""
    return np.apply_along_axis(stats.rankdata, 0, np.asarray(scores, dtype=np.float64))


def friedman_nemenyi(scores, methods: list[str] | None = None, alpha: float = 0.05) -> RankReport:
    """Friedman test over a methods x blocks score matrix plus the Nemenyi CD."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError("scores must be a methods x blocks matrix")
    k, n = scores.shape
    if k < 3 or n < 2:
        raise ValueError(f"need k >= 3 methods and N >= 2 blocks, got k={k}, N={n}")
    methods = list(methods) if methods is not None else [f"m{i}" for i in range(k)]
    ranks = block_ranks(scores)
    avg = ranks.mean(axis=1)
    chi2 = 12.0 * n / (k * (k + 1)) * (np.sum(avg**2) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(float(chi2), 0.0)
    p_value = float(stats.chi2.sf(chi2, k - 1))
    cd = nemenyi_cd(k, n, alpha)
    sig = np.abs(avg[:, None] - avg[None, :]) > cd
    return RankReport(methods, dict(zip(methods, avg.tolist())), chi2, p_value, cd, sig, n, alpha)


# --------------------------------------------------------------------------- #

def _orthogonalize(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for u in basis:
        v = v - (v @ u) * u
    return v


def _power_iteration(cov: np.ndarray, tol: float, rng: np.random.Generator, basis: list[np.ndarray], max_iter: int = 10_000):
    """Dominant eigenpair of ``cov`` restricted to the complement of ``basis``.

    Re-orthogonalizing every step keeps a deflated, nearly zero matrix from
    drifting back onto an axis already found.
    """
    v = _orthogonalize(rng.standard_normal(cov.shape[0]), basis)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = _orthogonalize(cov @ v, basis)
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0, v
        w /= norm
        done = np.linalg.norm(w - v) < tol
        v = w
        if done:
            break
    return float(v @ cov @ v), v


def pca_project_2d(x, tol: float = 1e-9, return_axes: bool = False):
    """Project rows onto the top two principal axes (power iteration + deflation).

    Each axis is signed so its largest-magnitude loading is positive.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need a matrix with at least two rows")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / (x.shape[0] - 1)
    if not np.any(cov):
        raise ValueError("input has zero variance")
    rng = np.random.default_rng(0)
    axes, eigvals = [], []
    for _ in range(2):
        lam, v = _power_iteration(cov, tol, rng, axes)
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        axes.append(v)
        eigvals.append(lam)
        cov = cov - lam * np.outer(v, v)
    axes = np.stack(axes, axis=1)
    coords = xc @ axes
    if return_axes:
        return coords, axes, np.array(eigvals)
    return coords
