"""Gaussian kernel density estimation over layer activations.

Each density model is a Gaussian mixture with one component per training
sample and a shared covariance: Scott's-rule bandwidth factor squared
times the sample covariance of the kept dimensions. Dimensions whose
training variance is at or below a threshold are dropped before fitting.
If the covariance cannot be factorized, a ridge proportional to the mean
diagonal is added and the fit retried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import DegenerateData, DimensionError


def _try_cholesky(mat: np.ndarray) -> np.ndarray | None:
    """Lower Cholesky factor, or None if the matrix is numerically singular.

    LAPACK accepts a rank-deficient matrix whenever rounding leaves a tiny
    positive pivot, so a relative floor on the factor diagonal is applied
    on top of the positive-definiteness check.
    """
    try:
        chol = np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None
    diag = np.diag(chol)
    if np.min(diag) <= math.sqrt(np.finfo(np.float64).eps) * np.max(diag):
        return None
    return chol


@dataclass(frozen=True)
class DensityModel:
    samples: np.ndarray  # (m, d_kept) training activations, kept dims only
    kept_dims: np.ndarray  # indices into the original activation vector
    original_dim: int
    bandwidth_factor: float  # Scott's rule: m ** (-1 / (d_kept + 4))
    cholesky: np.ndarray  # lower factor of the (possibly regularized) kernel covariance
    log_norm_const: float  # log of the per-kernel Gaussian normalizer
    regularized: bool  # True when the ridge fallback was needed


def fit_density(samples, var_threshold: float, alpha: float = 0.1) -> DensityModel:
    """Fit a Gaussian KDE to rows of `samples`.

    Dimensions with variance <= var_threshold are dropped. The kernel
    covariance is factor**2 * sample covariance (Scott's factor); when
    plain Cholesky factorization fails, the sample covariance is
    regularized as cov + alpha * (trace(cov) / d) * I and refit.

    Raises DegenerateData when fewer than 2 samples remain or every
    dimension is dropped; callers must mark that cell absent.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:  # a flat array is m scalar samples
        samples = samples.reshape(-1, 1)
    if samples.ndim != 2:
        raise DimensionError("samples must be a (m, d) matrix")
    m, d_full = samples.shape
    if m < 2:
        raise DegenerateData(f"need at least 2 samples, got {m}")
    variances = samples.var(axis=0)
    kept = np.flatnonzero(variances > var_threshold)
    if kept.size == 0:
        raise DegenerateData("all dimensions are below the variance threshold")
    X = samples[:, kept]
    d = kept.size
    factor = m ** (-1.0 / (d + 4))
    cov = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
    regularized = False
    chol = _try_cholesky(factor**2 * cov)
    if chol is None:
        ridge = alpha * (np.trace(cov) / d) * np.eye(d)
        chol = np.linalg.cholesky(factor**2 * (cov + ridge))
        regularized = True
    log_norm = 0.5 * d * math.log(2.0 * math.pi) + float(
        np.sum(np.log(np.diag(chol)))
    )
    X = np.array(X)
    X.flags.writeable = False
    kept = np.array(kept)
    kept.flags.writeable = False
    chol = np.array(chol)
    chol.flags.writeable = False
    return DensityModel(
        samples=X,
        kept_dims=kept,
        original_dim=d_full,
        bandwidth_factor=factor,
        cholesky=chol,
        log_norm_const=log_norm,
        regularized=regularized,
    )


def estimate_log_density(dm: DensityModel, x) -> float:
    """Log of the mixture density (1/m) * sum_i N(x; s_i, Sigma) at x.

    `x` has the original activation width; projection onto the kept
    dimensions happens here.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != dm.original_dim:
        raise DimensionError(
            f"expected vector of width {dm.original_dim}, got shape {x.shape}"
        )
    diffs = (dm.samples - x[dm.kept_dims]).T  # (d, m)
    y = solve_triangular(dm.cholesky, diffs, lower=True)
    sq = np.sum(y * y, axis=0)
    m = dm.samples.shape[0]
    return float(logsumexp(-0.5 * sq) - math.log(m) - dm.log_norm_const)
