"""mafkit: common-trend extraction from panels of concurrent time series.

Decomposes a panel into maximum-autocorrelation factors (the linear
combinations with the strongest temporal coherence), compares them against
principal components, quantifies their sampling uncertainty by residual
resampling, and tests for the presence of a signal via an empirical-SNR
permutation/bootstrap test. Closed-form population models are included as
independent correctness oracles.
"""

from .errors import (
    CsvParseError,
    DegenerateResidualError,
    DegenerateSeriesError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidInputError,
    MafkitError,
    ParameterPoleError,
    SingularMatrixError,
)
from .inference import (
    PowerPoint,
    ResamplingEnvelope,
    SelectionResult,
    TestReport,
    power_curve,
    resample_maf,
    select_num_factors,
    signal_presence_test,
)
from .linalg import (
    EigenPairs,
    inverse_sqrt,
    lag1_diff_covariance,
    sample_covariance,
    sym_eig,
)
from .maf import (
    MafDecomposition,
    PcaDecomposition,
    combination_autocorrelation,
    compute_maf,
    compute_pca,
    factor_autocorrelation,
)
from .oracles import (
    AppendixClosedForm,
    LlrSnr,
    Model1Asymptotics,
    Model1Ratios,
    MultiSignalSpec,
    SnModelSpec,
    appendix_closed_form,
    autocorrelation_from_snr,
    cca_population_weights,
    equicorrelation_noise_cov,
    expected_llr_snr,
    model1_asymptotics,
    model1_optimal_ratios,
    model1_snr,
    model2_maf_weights,
    population_maf_multi,
    population_maf_weights,
    signal_correlation_from_snr,
    snr_of_weights,
    subspace_principal_angles,
)
from .panel import TimeSeriesPanel
from .simulate import (
    ExperimentGrid,
    ExperimentRow,
    SignalSpec,
    correlation_with_signal,
    gen_signal,
    gen_sn_panel,
    multi_factor_r,
    run_comparison_experiment,
    signal_lag1_coherence,
)
from .smoothing import SmootherConfig, SmoothResult, empirical_snr, loess_smooth

__version__ = "0.1.0"

__all__ = [
    "AppendixClosedForm",
    "CsvParseError",
    "DegenerateResidualError",
    "DegenerateSeriesError",
    "EigenPairs",
    "ExperimentGrid",
    "ExperimentRow",
    "InsufficientDataError",
    "InvalidConfigError",
    "InvalidInputError",
    "LlrSnr",
    "MafDecomposition",
    "MafkitError",
    "Model1Asymptotics",
    "Model1Ratios",
    "MultiSignalSpec",
    "ParameterPoleError",
    "PcaDecomposition",
    "PowerPoint",
    "ResamplingEnvelope",
    "SelectionResult",
    "SignalSpec",
    "SingularMatrixError",
    "SmoothResult",
    "SmootherConfig",
    "SnModelSpec",
    "TestReport",
    "TimeSeriesPanel",
    "appendix_closed_form",
    "autocorrelation_from_snr",
    "cca_population_weights",
    "combination_autocorrelation",
    "compute_maf",
    "compute_pca",
    "correlation_with_signal",
    "empirical_snr",
    "equicorrelation_noise_cov",
    "expected_llr_snr",
    "factor_autocorrelation",
    "gen_signal",
    "gen_sn_panel",
    "inverse_sqrt",
    "lag1_diff_covariance",
    "loess_smooth",
    "model1_asymptotics",
    "model1_optimal_ratios",
    "model1_snr",
    "model2_maf_weights",
    "multi_factor_r",
    "population_maf_multi",
    "population_maf_weights",
    "power_curve",
    "resample_maf",
    "run_comparison_experiment",
    "sample_covariance",
    "select_num_factors",
    "signal_correlation_from_snr",
    "signal_lag1_coherence",
    "signal_presence_test",
    "snr_of_weights",
    "subspace_principal_angles",
    "sym_eig",
    "__version__",
]
