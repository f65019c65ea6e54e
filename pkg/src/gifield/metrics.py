"""Reconstruction-quality metrics (MSE, PSNR, global SSIM) and mutual coherence.

SSIM here is the single-window variant: one set of image-level moments
(population 1/mn normalization), no sliding window. Values will therefore not
match windowed SSIM implementations such as scikit-image's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMatrixError

DYNAMIC_RANGE = 255.0


def _check_same_shape(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"image shapes differ: {x.shape} vs {y.shape}")
    return x, y


def mse(x, y) -> float:
    """Mean squared pixel difference."""
    x, y = _check_same_shape(x, y)
    return float(np.mean((x - y) ** 2))


def psnr(x, y, dynamic_range: float = DYNAMIC_RANGE) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the images are identical."""
    if dynamic_range <= 0:
        raise ValueError("dynamic range must be positive")
    err = mse(x, y)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(dynamic_range**2 / err)


def ssim(x, y, dynamic_range: float = DYNAMIC_RANGE) -> float:
    """Structural similarity with a single window spanning the whole image.

    Uses population moments and the usual stabilizers c1 = (0.01*B)^2,
    c2 = (0.03*B)^2 so constant images compare cleanly (ssim(x, x) == 1).
    """
    x, y = _check_same_shape(x, y)
    c1 = (0.01 * dynamic_range) ** 2
    c2 = (0.03 * dynamic_range) ** 2
    mu_x = np.mean(x)
    mu_y = np.mean(y)
    dx = x - mu_x
    dy = y - mu_y
    var_x = np.mean(dx * dx)
    var_y = np.mean(dy * dy)
    cov = np.mean(dx * dy)
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(num / den)


def mutual_coherence(d: np.ndarray) -> float:
    """Largest normalized inner product between distinct columns of ``d``.

    Exact over all column pairs; always in [0, 1].
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[1] < 2:
        raise ValueError("need a matrix with at least 2 columns")
    norms = np.linalg.norm(d, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateMatrixError("zero column in coherence computation")
    g = np.abs((d / norms).T @ (d / norms))
    np.fill_diagonal(g, 0.0)
    return float(min(g.max(), 1.0))


@dataclass(frozen=True)
class QualityReport:
    """Aggregate metrics over a set of reconstructed images.

    PSNR statistics exclude infinite values (exact reconstructions);
    ``n_exact`` counts how many were excluded. Standard deviations are
    population (1/n) ones.
    """

    count: int
    mse_mean: float
    mse_std: float
    psnr_mean: float
    psnr_std: float
    ssim_mean: float
    ssim_std: float
    n_exact: int


def _mean_std(values: np.ndarray) -> tuple[float, float]:
    return float(np.mean(values)), float(np.std(values))


def aggregate(mse_values, psnr_values, ssim_values) -> QualityReport:
    """Summarize per-image metric triples into a :class:`QualityReport`."""
    mses = np.asarray(mse_values, dtype=np.float64)
    psnrs = np.asarray(psnr_values, dtype=np.float64)
    ssims = np.asarray(ssim_values, dtype=np.float64)
    if mses.size == 0:
        raise ValueError("cannot aggregate an empty metric set")
    if not (mses.size == psnrs.size == ssims.size):
        raise ValueError("metric arrays must have equal length")
    finite = np.isfinite(psnrs)
    n_exact = int(np.sum(~finite))
    if n_exact == mses.size:
        psnr_mean, psnr_std = math.inf, 0.0
    else:
        psnr_mean, psnr_std = _mean_std(psnrs[finite])
    mse_mean, mse_std = _mean_std(mses)
    ssim_mean, ssim_std = _mean_std(ssims)
    return QualityReport(
        count=int(mses.size),
        mse_mean=mse_mean,
        mse_std=mse_std,
        psnr_mean=psnr_mean,
        psnr_std=psnr_std,
        ssim_mean=ssim_mean,
        ssim_std=ssim_std,
        n_exact=n_exact,
    )
