"""Relative-information measures for hypothesis testing with missing data."""

__version__ = "0.1.0"

from .binomial import (
    BinomialComplete,
    BinomialObserved,
    binomial_model,
    enumerate_expectation,
    ri1_closed_form,
    ri1_enumeration,
)
from .combine import StudySummary, combine_weighted_harmonic
from .core import (
    ExpectedLodGap,
    HypothesisPair,
    LodScore,
    Method,
    ModelContract,
    RelInfoResult,
    expected_lod_gap,
    lod,
    lod_ratio_variance,
    ri0,
    ri1,
    ri_y_samples,
)
from .cox import (
    BaselineHazard,
    RankData,
    SurvivalDataset,
    SurvivalRecord,
    breslow_baseline,
    conditioning_anomaly_study,
    extract_rank_data,
    fit_partial_likelihood,
    partial_lod,
    partial_log_likelihood,
    ri1_cox_correct,
    ri1_cox_naive,
    ri_w_wald,
    sample_times_given_ranks,
    simulate_ph_binary,
)
from .design import (
    Design,
    base_design,
    doubled_design,
    interlaced_design,
    sx,
    variance_ratio,
)
from .mc import (
    DEFAULT_SEED,
    GENERATOR_ID,
    MCConfig,
    MCEstimate,
    mc_expectation,
    mc_variance,
    stream_uniforms,
    substream,
)

__all__ = [
    "BaselineHazard",
    "BinomialComplete",
    "BinomialObserved",
    "DEFAULT_SEED",
    "Design",
    "ExpectedLodGap",
    "GENERATOR_ID",
    "HypothesisPair",
    "LodScore",
    "MCConfig",
    "MCEstimate",
    "Method",
    "ModelContract",
    "RankData",
    "RelInfoResult",
    "StudySummary",
    "SurvivalDataset",
    "SurvivalRecord",
    "binomial_model",
    "breslow_baseline",
    "combine_weighted_harmonic",
    "conditioning_anomaly_study",
    "enumerate_expectation",
    "expected_lod_gap",
    "extract_rank_data",
    "fit_partial_likelihood",
    "lod",
    "lod_ratio_variance",
    "mc_expectation",
    "mc_variance",
    "partial_lod",
    "partial_log_likelihood",
    "ri0",
    "ri1",
    "ri1_closed_form",
    "ri1_cox_correct",
    "ri1_cox_naive",
    "ri1_enumeration",
    "ri_w_wald",
    "ri_y_samples",
    "sample_times_given_ranks",
    "simulate_ph_binary",
    "stream_uniforms",
    "substream",
    "base_design",
    "doubled_design",
    "interlaced_design",
    "sx",
    "variance_ratio",
]
