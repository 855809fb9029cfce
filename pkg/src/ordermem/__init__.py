"""Order-sign long-memory toolkit.

Measures persistence in market-order sign series (run probabilities,
power-law autocorrelation fits, effective memory length), relates it to
fund activity ratios from quarterly ownership data, scores detection
quality with ROC/AUC, and ships a meta-order splitting simulator as a
controlled source of long-memory series.
"""

__version__ = "0.1.0"

from .errors import DataError, DegenerateSeriesError, InsufficientSupportError
from .signs import MID_EPS, SignSeries, extract_signs, mid_price, signs_from_quotes
from .memory import (
    AcfCurve,
    MemoryMetrics,
    PowerLawFit,
    autocorrelation,
    compute_metrics,
    fit_power_law,
    memory_length,
    pi_table,
    run_probability,
    sign_run_lengths,
)
from .simulator import (
    RNG_NAME,
    SimConfig,
    MetaOrderLog,
    SimOutput,
    replay,
    sample_length,
    simulate,
    theoretical_acf,
)
from .ingest import (
    OwnershipPanel,
    TradeEvent,
    TradesParse,
    filter_assets,
    filter_small_funds,
    parse_ownership,
    parse_trades,
    serialize_ownership,
    serialize_trades,
)
from .activity import (
    ActivityRatios,
    GroupAssignment,
    GroupAverage,
    absolute_ratio,
    activity_ratios,
    directional_ratio,
    group_metric_average,
    quantile_groups,
)
from .classify import (
    NEGATED_METRICS,
    CutAuc,
    RocResult,
    auc_by_cut,
    labels_from_cut,
    oriented_scores,
    roc_auc,
)
from .estimators import MemoryFeatures, QuantileGrouper
from .pipeline import (
    METRIC_NAMES,
    PanelResult,
    memory_table,
    pi10_score,
    slice_windows,
    synthetic_panel,
    windows_to_quarters,
)

__all__ = [
    "DataError",
    "DegenerateSeriesError",
    "InsufficientSupportError",
    "MID_EPS",
    "SignSeries",
    "extract_signs",
    "mid_price",
    "signs_from_quotes",
    "AcfCurve",
    "MemoryMetrics",
    "PowerLawFit",
    "autocorrelation",
    "compute_metrics",
    "fit_power_law",
    "memory_length",
    "pi_table",
    "run_probability",
    "sign_run_lengths",
    "RNG_NAME",
    "SimConfig",
    "MetaOrderLog",
    "SimOutput",
    "replay",
    "sample_length",
    "simulate",
    "theoretical_acf",
    "OwnershipPanel",
    "TradeEvent",
    "TradesParse",
    "filter_assets",
    "filter_small_funds",
    "parse_ownership",
    "parse_trades",
    "serialize_ownership",
    "serialize_trades",
    "ActivityRatios",
    "GroupAssignment",
    "GroupAverage",
    "absolute_ratio",
    "activity_ratios",
    "directional_ratio",
    "group_metric_average",
    "quantile_groups",
    "NEGATED_METRICS",
    "CutAuc",
    "RocResult",
    "auc_by_cut",
    "labels_from_cut",
    "oriented_scores",
    "roc_auc",
    "MemoryFeatures",
    "QuantileGrouper",
    "METRIC_NAMES",
    "PanelResult",
    "memory_table",
    "pi10_score",
    "slice_windows",
    "synthetic_panel",
    "windows_to_quarters",
    "__version__",
]
