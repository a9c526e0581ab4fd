"""Covariance estimation and symmetric-eigenproblem kernels.

Everything here is a pure function of its inputs. Covariances use the
centered 1/(n-1) estimator throughout; scale factors cancel in the
autocorrelation Rayleigh quotients downstream, so the choice only affects
reported magnitudes, never directions.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InsufficientDataError, InvalidInputError, SingularMatrixError
from .panel import as_panel

# Relative eigenvalue floor below which a matrix is treated as singular.
SPD_RTOL = 1e-12

_SYM_ATOL = 1e-12


class EigenPairs(NamedTuple):
    """Eigenvalues (sorted as requested) with matching orthonormal column vectors."""

    values: np.ndarray
    vectors: np.ndarray


def sample_covariance(panel) -> np.ndarray:
    """Centered sample covariance of a panel, 1/(n-1) normalization.

    Raises
    ------
    InsufficientDataError
        If the panel has fewer than 2 rows.
    """
    panel = as_panel(panel)
    x = panel.values
    n = x.shape[0]
    if n < 2:
        raise InsufficientDataError(f"covariance needs at least 2 rows, got {n}")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    return 0.5 * (cov + cov.T)


def lag1_diff_covariance(panel) -> np.ndarray:
    """Sample covariance of the row-differenced panel (n-1 rows, 1/(n-2))."""
    panel = as_panel(panel)
    if panel.n < 3:
        raise InsufficientDataError(
            f"differenced covariance needs at least 3 rows, got {panel.n}"
        )
    return sample_covariance(np.diff(panel.values, axis=0))


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix contains non-finite entries")
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > _SYM_ATOL * scale:
        raise InvalidInputError("matrix is not symmetric within 1e-12")
    return 0.5 * (m + m.T)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Deterministic orientation: largest-magnitude component of each column positive.
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(m, order: str = "descending") -> EigenPairs:
    """Full eigendecomposition of a symmetric matrix with deterministic signs.

    `order` is "ascending" or "descending". Each returned eigenvector is
    oriented so that its largest-magnitude component is positive.
    """
    if order not in ("ascending", "descending"):
        raise InvalidInputError(f"order must be 'ascending' or 'descending', got {order!r}")
    m = _check_symmetric(m)
    values, vectors = np.linalg.eigh(m)  # ascending
    if order == "descending":
        values = values[::-1]
        vectors = vectors[:, ::-1]
    return EigenPairs(values=values, vectors=_fix_signs(np.ascontiguousarray(vectors)))


def inverse_sqrt(m) -> np.ndarray:
    """Symmetric inverse square root M^{-1/2} via spectral decomposition.

    Raises
    ------
    SingularMatrixError
        If the smallest eigenvalue is below SPD_RTOL times the largest.
    """
    m = _check_symmetric(m)
    values, vectors = np.linalg.eigh(m)
    if values[0] <= SPD_RTOL * max(values[-1], 0.0) or values[-1] <= 0.0:
        raise SingularMatrixError(
            f"matrix is numerically singular: min eigenvalue {values[0]:.3e} "
            f"vs max {values[-1]:.3e}"
        )
    root = (vectors / np.sqrt(values)) @ vectors.T
    return 0.5 * (root + root.T)


def assert_spd(m, what: str = "matrix") -> np.ndarray:
    """Validate symmetric positive definiteness; returns the symmetrized matrix."""
    m = _check_symmetric(m)
    values = np.linalg.eigvalsh(m)
    if values[0] <= SPD_RTOL * max(values[-1], 0.0) or values[-1] <= 0.0:
        raise SingularMatrixError(
            f"{what} is not positive definite: min eigenvalue {values[0]:.3e} "
            f"vs max {values[-1]:.3e}"
        )
    return m
