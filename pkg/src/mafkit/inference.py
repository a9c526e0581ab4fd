"""Resampling-based uncertainty bands, the signal-presence test, test power,
and factor-count selection.

All resampling draws come from per-replicate RNG streams spawned
deterministically from (seed, replicate index), so results are bit-identical
across runs and independent of any evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSeriesError,
    InvalidConfigError,
    SingularMatrixError,
)
from .maf import compute_maf
from .panel import as_panel
from .simulate import gen_sn_panel
from .smoothing import SmootherConfig, empirical_snr, hat_matrix, smooth_columns

__all__ = [
    "ResamplingEnvelope",
    "TestReport",
    "PowerPoint",
    "SelectionResult",
    "resample_maf",
    "signal_presence_test",
    "power_curve",
    "select_num_factors",
]


def _resample_indices(rng: np.random.Generator, n: int, block_len: int) -> np.ndarray:
    """Row indices for one bootstrap replicate.

    block_len == 1 draws n rows independently with replacement; otherwise
    circular moving blocks of block_len consecutive rows (wrapping at the
    end) are drawn until n rows are filled.
    """
    if block_len == 1:
        return rng.integers(0, n, size=n)
    n_blocks = math.ceil(n / block_len)
    starts = rng.integers(0, n, size=n_blocks)
    idx = (starts[:, None] + np.arange(block_len)[None, :]) % n
    return idx.ravel()[:n]


@dataclass(frozen=True)
class ResamplingEnvelope:
    """Replicate draws and pointwise confidence bands for the leading factors.

    Arrays are indexed (factor, replicate, ...) for the first `n_factors`
    factors. `pointwise_bands[j, t]` holds the empirical (alpha/2,
    1 - alpha/2) quantiles of the replicate factor values at time t;
    `original_smoothed[j]` is the smoothed original factor j.
    """

    replicate_factors: np.ndarray
    replicate_coefficients: np.ndarray
    pointwise_bands: np.ndarray
    original_smoothed: np.ndarray
    original_factors: np.ndarray
    alpha: float
    block_len: int
    seed: int
    retries: int = 0


def resample_maf(panel, B: int, block_len: int = 1,
                 cfg: SmootherConfig = SmootherConfig(), n_factors: int = 1,
                 seed: int = 0, alpha: float = 0.05) -> ResamplingEnvelope:
    """Residual-resampling uncertainty bands for the MAF factors.

    Each series is smoothed; residual rows are resampled jointly across
    series (in circular blocks when block_len > 1) and added back onto the
    smooths; MAF is recomputed on every rebuilt panel. Replicate factors are
    sign-aligned to the original factors and replicate coefficient columns
    are unit-normalized. A replicate whose covariance degenerates is retried
    with a fresh draw; more than 10% retried replicates is an error.
    """
    panel = as_panel(panel)
    n, p = panel.n, panel.p
    if B < 1:
        raise InvalidConfigError(f"B must be at least 1, got {B}")
    if not (1 <= block_len <= n):
        raise InvalidConfigError(f"block_len must be in [1, {n}], got {block_len}")
    if not (1 <= n_factors <= p):
        raise InvalidConfigError(f"n_factors must be in [1, {p}], got {n_factors}")
    if not (0.0 < alpha < 1.0):
        raise InvalidConfigError(f"alpha must be in (0, 1), got {alpha}")

    original = compute_maf(panel)
    fitted, residuals, _ = smooth_columns(panel.values, cfg)
    hat, _ = hat_matrix(n, cfg)

    orig_factors = original.factors[:, :n_factors]
    orig_centered = orig_factors - orig_factors.mean(axis=0)

    rep_factors = np.empty((n_factors, B, n))
    rep_coefs = np.empty((n_factors, B, p))
    children = np.random.SeedSequence(seed).spawn(B)
    retries = 0
    retry_budget = max(1, math.ceil(0.1 * B))
    for b in range(B):
        rng = np.random.default_rng(children[b])
        while True:
            idx = _resample_indices(rng, n, block_len)
            rebuilt = fitted + residuals[idx]
            try:
                rep = compute_maf(rebuilt)
                break
            except SingularMatrixError:
                retries += 1
                if retries > retry_budget:
                    raise SingularMatrixError(
                        f"more than 10% of replicates ({retries} of {B}) had a "
                        f"degenerate covariance; panel too close to singular"
                    )
        factors = rep.factors[:, :n_factors]
        coefs = rep.coefficients[:, :n_factors]
        # align each replicate factor with the original factor it estimates
        centered = factors - factors.mean(axis=0)
        flips = np.where(np.einsum("tj,tj->j", centered, orig_centered) < 0, -1.0, 1.0)
        factors = factors * flips
        coefs = coefs * flips / np.linalg.norm(coefs, axis=0)
        rep_factors[:, b, :] = factors.T
        rep_coefs[:, b, :] = coefs.T

    bands = np.stack(
        [
            np.quantile(rep_factors, alpha / 2.0, axis=1),
            np.quantile(rep_factors, 1.0 - alpha / 2.0, axis=1),
        ],
        axis=-1,
    )
    return ResamplingEnvelope(
        replicate_factors=rep_factors,
        replicate_coefficients=rep_coefs,
        pointwise_bands=bands,
        original_smoothed=(hat @ orig_factors).T,
        original_factors=orig_factors.T,
        alpha=alpha,
        block_len=block_len,
        seed=seed,
        retries=retries,
    )


@dataclass(frozen=True)
class TestReport:
    """Signal-presence test result for the leading factors.

    `p_value[j]` is the share of null replicates whose factor-(j+1)
    statistic reaches the observed one. With `conservative` the
    (1 + count) / (1 + B) form is used instead of the raw proportion.
    """

    statistic_name: str
    observed: np.ndarray
    null_draws: np.ndarray
    p_value: np.ndarray
    mode: str
    block_len: int
    seed: int
    n_replicates: int
    conservative: bool = False


def signal_presence_test(panel, B: int, cfg: SmootherConfig = SmootherConfig(),
                         mode: str | None = None, block_len: int = 1,
                         n_factors_tested: int = 1, seed: int = 0,
                         conservative: bool = False) -> TestReport:
    """Test whether the leading MAF factors carry a signal rather than noise.

    The observed statistic of factor j is its empirical SNR. Null panels are
    built by smoothing each series, inflating the residuals by
    sqrt(n / (n - df)) to undo the smoother's variance absorption, and
    resampling residual rows with no smooth added back; each null panel is
    decomposed and its factor SNRs form the null distribution.

    `mode` is "permutation" (rows shuffled without replacement; requires
    block_len == 1) or "bootstrap" (with replacement, blockwise when
    block_len > 1). The default picks permutation for block_len == 1 and
    bootstrap otherwise.
    """
    panel = as_panel(panel)
    n, p = panel.n, panel.p
    if B < 99:
        raise InvalidConfigError(f"B must be at least 99, got {B}")
    if not (1 <= n_factors_tested <= p):
        raise InvalidConfigError(
            f"n_factors_tested must be in [1, {p}], got {n_factors_tested}"
        )
    if not (1 <= block_len <= n):
        raise InvalidConfigError(f"block_len must be in [1, {n}], got {block_len}")
    if mode is None:
        mode = "permutation" if block_len == 1 else "bootstrap"
    if mode not in ("permutation", "bootstrap"):
        raise InvalidConfigError(f"mode must be 'permutation' or 'bootstrap', got {mode!r}")
    if mode == "permutation" and block_len != 1:
        raise InvalidConfigError("permutation mode requires block_len == 1")
    stds = panel.values.std(axis=0)
    if np.any(stds == 0.0):
        j = int(np.nonzero(stds == 0.0)[0][0])
        raise DegenerateSeriesError(f"series {j + 1} is constant")

    k = n_factors_tested
    original = compute_maf(panel)
    observed = np.array([empirical_snr(original.factors[:, j], cfg) for j in range(k)])

    _, residuals, df = smooth_columns(panel.values, cfg)
    inflated = residuals * np.sqrt(n / (n - df))

    null_draws = np.empty((k, B))
    children = np.random.SeedSequence(seed).spawn(B)
    for b in range(B):
        rng = np.random.default_rng(children[b])
        if mode == "permutation":
            idx = rng.permutation(n)
        else:
            idx = _resample_indices(rng, n, block_len)
        rep = compute_maf(inflated[idx])
        for j in range(k):
            null_draws[j, b] = empirical_snr(rep.factors[:, j], cfg)

    exceed = (null_draws >= observed[:, None]).sum(axis=1)
    if conservative:
        p_value = (1.0 + exceed) / (1.0 + B)
    else:
        p_value = exceed / B
    return TestReport(
        statistic_name="snr",
        observed=observed,
        null_draws=null_draws,
        p_value=p_value,
        mode=mode,
        block_len=block_len,
        seed=seed,
        n_replicates=B,
        conservative=conservative,
    )


@dataclass(frozen=True)
class PowerPoint:
    multiplier: float
    power: float


def power_curve(spec, signal, multipliers, B: int, alpha: float = 0.05,
                seed: int = 0, cfg: SmootherConfig = SmootherConfig(),
                statistic: str = "snr") -> list[PowerPoint]:
    """Monte Carlo power of the signal-presence statistic vs signal strength.

    Simulates B pure-noise panels to locate the (1 - alpha) null quantile of
    the statistic, then for each multiplier c simulates B panels with signal
    strengths c * spec.b and reports the fraction of statistics beyond the
    null quantile. `statistic` is "snr" (empirical SNR of MAF1) or
    "autocorrelation" (MAF1's maximized lag-1 autocorrelation).
    """
    f = np.asarray(signal, dtype=float).ravel()
    multipliers = [float(c) for c in multipliers]
    if any(c < 0 for c in multipliers):
        raise InvalidConfigError("multipliers must be non-negative")
    if not (0.0 < alpha < 1.0):
        raise InvalidConfigError(f"alpha must be in (0, 1), got {alpha}")
    if B < 1:
        raise InvalidConfigError(f"B must be at least 1, got {B}")
    if statistic not in ("snr", "autocorrelation"):
        raise InvalidConfigError(f"unknown statistic {statistic!r}")

    def stat_of(panel) -> float:
        decomp = compute_maf(panel)
        if statistic == "snr":
            return empirical_snr(decomp.factors[:, 0], cfg)
        return float(decomp.autocorrelations[0])

    zero_b = np.zeros(spec.p)
    n_sets = 1 + len(multipliers)
    children = np.random.SeedSequence(seed).spawn(n_sets * B)
    null_stats = np.array(
        [
            stat_of(gen_sn_panel(f, zero_b, spec.noise_cov, children[b], ar_phi=spec.k_eps))
            for b in range(B)
        ]
    )
    threshold = float(np.quantile(null_stats, 1.0 - alpha))

    points = []
    for m_idx, c in enumerate(multipliers):
        offset = (1 + m_idx) * B
        alt = np.array(
            [
                stat_of(
                    gen_sn_panel(
                        f, c * spec.b, spec.noise_cov, children[offset + b],
                        ar_phi=spec.k_eps,
                    )
                )
                for b in range(B)
            ]
        )
        points.append(PowerPoint(multiplier=c, power=float(np.mean(alt > threshold))))
    return points


@dataclass(frozen=True)
class SelectionResult:
    k: int
    method: str
    diagnostics: dict = field(default_factory=dict)


def select_num_factors(panel, method: str, cfg: SmootherConfig = SmootherConfig(),
                       seed: int = 0, alpha_frac: float = 0.95,
                       holdout_frac: float = 0.25, B: int = 199,
                       alpha: float = 0.05) -> SelectionResult:
    """Choose how many MAF factors to retain.

    method
        "scree"  : full autocorrelation spectrum; k set after the largest gap.
        "cutoff" : smallest k whose cumulative positive-part autocorrelation
                   reaches `alpha_frac` of the total.
        "cv"     : regress each series on the leading factors fitted on the
                   head of the panel; k minimizes RMSE on the tail block of
                   `holdout_frac` rows.
        "test"   : largest k with signal-presence p-values of factors 1..k
                   all below `alpha` (permutation mode, B replicates).
    """
    panel = as_panel(panel)
    n, p = panel.n, panel.p
    if method not in ("scree", "cutoff", "cv", "test"):
        raise InvalidConfigError(f"unknown selection method {method!r}")

    if method == "test":
        report = signal_presence_test(
            panel, B=B, cfg=cfg, mode="permutation", block_len=1,
            n_factors_tested=p, seed=seed,
        )
        k = 0
        while k < p and report.p_value[k] < alpha:
            k += 1
        return SelectionResult(
            k=k, method=method,
            diagnostics={"p_values": report.p_value.tolist(), "alpha": alpha},
        )

    decomp = compute_maf(panel)
    r = decomp.autocorrelations

    if method == "scree":
        if p == 1:
            k, gaps = 1, []
        else:
            gaps = (-np.diff(r)).tolist()
            k = int(np.argmax(-np.diff(r))) + 1
        return SelectionResult(
            k=k, method=method,
            diagnostics={"autocorrelations": r.tolist(), "gaps": gaps},
        )

    if method == "cutoff":
        if not (0.0 < alpha_frac <= 1.0):
            raise InvalidConfigError(f"alpha_frac must be in (0, 1], got {alpha_frac}")
        positive = np.clip(r, 0.0, None)
        total = positive.sum()
        if total == 0.0:
            return SelectionResult(
                k=0, method=method,
                diagnostics={"autocorrelations": r.tolist(), "alpha_frac": alpha_frac},
            )
        fractions = np.cumsum(positive) / total
        k = int(np.argmax(fractions >= alpha_frac - 1e-12)) + 1
        return SelectionResult(
            k=k, method=method,
            diagnostics={
                "autocorrelations": r.tolist(),
                "cumulative_fraction": fractions.tolist(),
                "alpha_frac": alpha_frac,
            },
        )

    # cross-validation on a trailing holdout block
    n_hold = int(round(holdout_frac * n))
    if n_hold < p + 2:
        raise InvalidConfigError(
            f"holdout of {n_hold} rows is too small; need at least p + 2 = {p + 2}"
        )
    n_train = n - n_hold
    if n_train <= p:
        raise InvalidConfigError(
            f"training block of {n_train} rows cannot support a {p}-series decomposition"
        )
    train, hold = panel.values[:n_train], panel.values[n_train:]
    coefs = compute_maf(train).coefficients
    y_train, y_hold = train @ coefs, hold @ coefs
    rmse = []
    for k in range(1, p + 1):
        design = np.column_stack([np.ones(n_train), y_train[:, :k]])
        beta, _, _, _ = np.linalg.lstsq(design, train, rcond=None)
        pred = np.column_stack([np.ones(n_hold), y_hold[:, :k]]) @ beta
        rmse.append(float(np.sqrt(np.mean((hold - pred) ** 2))))
    best = int(np.argmin(rmse)) + 1
    return SelectionResult(
        k=best, method=method,
        diagnostics={"rmse": rmse, "holdout_rows": n_hold},
    )
