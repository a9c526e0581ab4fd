"""Local linear regression (LOESS) with tricube weights, plus the empirical SNR.

Rows are treated as equally spaced, so the smoother is a fixed linear map
y -> L y for a given (n, config). The hat matrix L is built once and cached;
its trace is the smoother's degrees of freedom, needed for residual
inflation in the resampling test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateResidualError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidInputError,
)


@dataclass(frozen=True)
class SmootherConfig:
    """Span (fraction of points per window), local polynomial degree, kernel."""

    span_fraction: float = 0.4
    degree: int = 1
    weight: str = "tricube"

    def __post_init__(self):
        if not (0.0 < self.span_fraction <= 1.0):
            raise InvalidConfigError(
                f"span_fraction must be in (0, 1], got {self.span_fraction}"
            )
        if self.degree not in (0, 1, 2):
            raise InvalidConfigError(f"degree must be 0, 1 or 2, got {self.degree}")
        if self.weight != "tricube":
            raise InvalidConfigError(f"unsupported weight kernel {self.weight!r}")

    def window_size(self, n: int) -> int:
        return int(math.ceil(self.span_fraction * n))


@dataclass(frozen=True)
class SmoothResult:
    """Fitted smooth, residuals (defined as input - fitted), and hat-trace df."""

    fitted: np.ndarray
    residuals: np.ndarray
    df: float


@lru_cache(maxsize=64)
def _hat_matrix(n: int, span_fraction: float, degree: int) -> tuple[np.ndarray, float]:
    cfg = SmootherConfig(span_fraction=span_fraction, degree=degree)
    k = cfg.window_size(n)
    if k < degree + 2:
        raise InsufficientDataError(
            f"window of {k} points cannot support a degree-{degree} local fit; "
            f"increase span_fraction or series length"
        )
    t = np.arange(n, dtype=float)
    hat = np.zeros((n, n))
    for i in range(n):
        dist = np.abs(t - t[i])
        # k nearest neighbors; stable sort breaks distance ties toward lower index
        window = np.sort(np.argsort(dist, kind="stable")[:k])
        d = dist[window]
        h = d.max()
        w = np.clip(1.0 - (d / h) ** 3, 0.0, 1.0) ** 3
        x = np.vander(t[window] - t[i], N=degree + 1, increasing=True)
        xtw = x.T * w
        # local fit evaluated at t[i] is the intercept coefficient
        hat[i, window] = (np.linalg.pinv(xtw @ x) @ xtw)[0]
    return hat, float(np.trace(hat))


def hat_matrix(n: int, cfg: SmootherConfig) -> tuple[np.ndarray, float]:
    """Cached (L, trace L) for smoothing length-n equally spaced series."""
    return _hat_matrix(n, cfg.span_fraction, cfg.degree)


def loess_smooth(series, cfg: SmootherConfig = SmootherConfig()) -> SmoothResult:
    """Smooth one series by local weighted polynomial regression.

    Each point is fit from its `ceil(span_fraction * n)` nearest neighbors
    with tricube weights scaled by the window radius; windows become
    one-sided near the edges.
    """
    y = np.asarray(series, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("series contains non-finite values")
    hat, df = hat_matrix(y.size, cfg)
    fitted = hat @ y
    return SmoothResult(fitted=fitted, residuals=y - fitted, df=df)


def smooth_columns(values: np.ndarray, cfg: SmootherConfig) -> tuple[np.ndarray, np.ndarray, float]:
    """Smooth every column of an (n, p) array at once; returns (fitted, residuals, df)."""
    values = np.asarray(values, dtype=float)
    hat, df = hat_matrix(values.shape[0], cfg)
    fitted = hat @ values
    return fitted, values - fitted, df


def empirical_snr(series, cfg: SmootherConfig = SmootherConfig()) -> float:
    """SD(smooth) / SD(residual) for one series, both population-normalized.

    Raises
    ------
    DegenerateResidualError
        If the residual standard deviation is numerically zero (the series
        is itself smooth at this span).
    """
    result = loess_smooth(series, cfg)
    sd_resid = float(np.std(result.residuals))
    if sd_resid <= 1e-12:
        raise DegenerateResidualError(
            "residual standard deviation is numerically zero; empirical SNR undefined"
        )
    return float(np.std(result.fitted)) / sd_resid
