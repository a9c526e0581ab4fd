"""Maximum-autocorrelation-factor and principal-component decompositions.

The MAF coefficients solve a whitened symmetric eigenproblem: whiten the
panel so its sample covariance is the identity, eigendecompose the
covariance of the differenced (whitened) panel in ascending order, and map
the eigenvectors back through the whitening transform. The factor with the
smallest differenced-covariance eigenvalue K has the largest lag-1
autocorrelation r = 1 - K/2 among all linear combinations of the input
series; successive factors maximize autocorrelation subject to being
uncorrelated with the earlier ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, InsufficientDataError, InvalidInputError
from .linalg import inverse_sqrt, lag1_diff_covariance, sample_covariance, sym_eig
from .panel import TimeSeriesPanel, as_panel

# Adjacent eigenvalues closer than this (relative) make factor identity ambiguous.
DEGENERATE_GAP_RTOL = 1e-8


@dataclass(frozen=True)
class MafDecomposition:
    """Result of a MAF decomposition.

    Attributes
    ----------
    coefficients : ndarray, shape (p, p)
        Column j holds the weights of factor j over the input series.
    factors : ndarray, shape (n, p)
        factors = panel values @ coefficients, ordered by decreasing
        lag-1 autocorrelation.
    diff_eigenvalues : ndarray, shape (p,)
        Ascending eigenvalues K of the whitened differenced covariance.
    autocorrelations : ndarray, shape (p,)
        Per-factor lag-1 autocorrelation, r = 1 - K/2 (factors are
        unit-variance by construction, so the identity is exact).
    degenerate_pairs : tuple of (int, int)
        Adjacent factor index pairs whose eigenvalues are numerically tied;
        factor identity within such a pair is not unique.
    """

    coefficients: np.ndarray
    factors: np.ndarray
    diff_eigenvalues: np.ndarray
    autocorrelations: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class PcaDecomposition:
    """Principal components of a (optionally standardized) panel.

    `coefficients` columns are orthonormal eigenvectors of the sample
    covariance of the processed panel; `variances` are the matching
    eigenvalues in descending order; `factors` are the centered scores.
    """

    coefficients: np.ndarray
    factors: np.ndarray
    variances: np.ndarray
    standardized: bool


def compute_maf(panel) -> MafDecomposition:
    """Compute all p MAF factors and coefficients of a panel.

    Steps: estimate the sample covariance S, whiten the panel by S^{-1/2},
    difference the whitened rows, eigendecompose the differenced covariance
    ascending, back-transform the eigenvectors, and orient every factor to
    trend upward (positive covariance with the row index).

    Raises
    ------
    InsufficientDataError
        If n <= p (the covariance pencil would be rank deficient).
    SingularMatrixError
        If the sample covariance is numerically singular.
    """
    panel = as_panel(panel)
    n, p = panel.n, panel.p
    if p < 1:
        raise InvalidInputError("panel must have at least one series")
    if n <= p:
        raise InsufficientDataError(
            f"MAF needs more time steps than series, got n={n}, p={p}"
        )
    cov = sample_covariance(panel)
    whitener = inverse_sqrt(cov)  # raises SingularMatrixError on collinear panels
    whitened = panel.values @ whitener
    diff_eig = sym_eig(lag1_diff_covariance(whitened), order="ascending")

    coefficients = whitener @ diff_eig.vectors
    factors = panel.values @ coefficients

    # Trend-sign rule: factor j trends upward. Using the covariance with the
    # centered row index instead of the raw weighted sum keeps the rule
    # insensitive to the factor mean.
    t_centered = np.arange(n) - (n - 1) / 2.0
    signs = np.sign(t_centered @ factors)
    signs[signs == 0] = 1.0
    coefficients = coefficients * signs
    factors = factors * signs

    k = diff_eig.values
    gaps = np.abs(np.diff(k))
    scale = np.maximum(np.maximum(np.abs(k[:-1]), np.abs(k[1:])), 1e-300)
    degenerate = tuple(
        (int(j), int(j + 1)) for j in np.nonzero(gaps < DEGENERATE_GAP_RTOL * scale)[0]
    )
    return MafDecomposition(
        coefficients=coefficients,
        factors=factors,
        diff_eigenvalues=k,
        autocorrelations=1.0 - k / 2.0,
        degenerate_pairs=degenerate,
    )


def compute_pca(panel, standardize: bool = True) -> PcaDecomposition:
    """Principal components of the panel; correlation PCA by default.

    With `standardize` each column is scaled to unit variance before the
    covariance is formed (zero-variance columns are left unscaled so that
    rank-deficient panels still decompose). Factors are the centered,
    optionally scaled panel projected on the eigenvectors.
    """
    panel = as_panel(panel)
    x = panel.values - panel.values.mean(axis=0)
    if panel.n < 2:
        raise InsufficientDataError(f"PCA needs at least 2 rows, got {panel.n}")
    if standardize:
        scale = x.std(axis=0, ddof=1)
        scale[scale == 0.0] = 1.0
        x = x / scale
    eig = sym_eig(sample_covariance(x), order="descending")
    return PcaDecomposition(
        coefficients=eig.vectors,
        factors=x @ eig.vectors,
        variances=np.maximum(eig.values, 0.0),
        standardized=standardize,
    )


def factor_autocorrelation(series) -> float:
    """Lag-1 autocorrelation of one series via the variance-ratio identity.

    Computed as 1 - Var(diff(y)) / (2 Var(y)) with centered sample
    variances, which is exactly the quantity the MAF eigenproblem
    maximizes over linear combinations; the result is clamped to [-1, 1].

    Raises
    ------
    DegenerateSeriesError
        If the series is constant.
    InsufficientDataError
        If the series has fewer than 3 observations.
    """
    y = np.asarray(series, dtype=float).ravel()
    if y.size < 3:
        raise InsufficientDataError(f"autocorrelation needs at least 3 points, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("series contains non-finite values")
    var = y.var(ddof=1)
    if var <= 0.0:
        raise DegenerateSeriesError("series is constant; autocorrelation undefined")
    dvar = np.diff(y).var(ddof=1)
    return float(np.clip(1.0 - dvar / (2.0 * var), -1.0, 1.0))


def combination_autocorrelation(panel, weights) -> float:
    """Lag-1 autocorrelation of the combined series (weights' panel rows).

    Same variance-ratio definition as `factor_autocorrelation`, evaluated
    through the panel's covariance matrices so many weight vectors can be
    compared against factors on an identical footing.
    """
    panel = as_panel(panel)
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape != (panel.p,):
        raise InvalidInputError(f"expected weight vector of length {panel.p}, got {w.shape}")
    if not np.any(w != 0.0):
        raise InvalidInputError("weights must be nonzero")
    total = float(w @ sample_covariance(panel) @ w)
    if total <= 0.0:
        raise DegenerateSeriesError("combined series is constant; autocorrelation undefined")
    diff = float(w @ lag1_diff_covariance(panel) @ w)
    return float(np.clip(1.0 - diff / (2.0 * total), -1.0, 1.0))


__all__ = [
    "MafDecomposition",
    "PcaDecomposition",
    "TimeSeriesPanel",
    "combination_autocorrelation",
    "compute_maf",
    "compute_pca",
    "factor_autocorrelation",
]
