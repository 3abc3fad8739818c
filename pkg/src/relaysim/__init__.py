"""Relay selection and outage analysis for multi-user AF relay networks."""

from .channel import (
    ChannelRealization,
    NetworkConfig,
    build_snr_matrix,
    db_to_linear,
    draw_channels,
    end_to_end_snr,
    linear_to_db,
)
from .montecarlo import (
    ExperimentResult,
    OutageEstimate,
    estimate_diversity_slope,
    rank_frequency,
    run_outage_sweep,
)
from .rng import derive_stream
from .selection import (
    SCHEMES,
    Assignment,
    SelectionOutcome,
    brute_force_lex_optimal,
    naive_complexity,
    select_naive,
    select_ors,
    select_random,
    select_srs,
    srs_complexity,
)

__all__ = [
    "Assignment",
    "ChannelRealization",
    "ExperimentResult",
    "NetworkConfig",
    "OutageEstimate",
    "SCHEMES",
    "SelectionOutcome",
    "brute_force_lex_optimal",
    "build_snr_matrix",
    "db_to_linear",
    "derive_stream",
    "draw_channels",
    "end_to_end_snr",
    "estimate_diversity_slope",
    "linear_to_db",
    "naive_complexity",
    "rank_frequency",
    "run_outage_sweep",
    "select_naive",
    "select_ors",
    "select_random",
    "select_srs",
    "srs_complexity",
]

__version__ = "0.1.0"
