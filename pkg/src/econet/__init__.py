"""Network econometrics: balance-of-payments MLR networks, portfolio-network
early warning and gate-keeping potential on trade networks."""

__version__ = "0.1.0"

from .graph import (
    FlowNetwork,
    PercolationProfile,
    build_flow_network,
    detect_percolation_point,
    edge_density,
    largest_scc,
    log_grid,
    percolation_sweep,
    threshold_filter,
)
from .stats import condition_number, ols_fit, pearson, vif
from .panel import IndicatorId, IndicatorPanel, deflate_panel, select_countries
from .mlr import (
    CoefficientNetwork,
    FitCriteria,
    fit_gbopn,
    forecast,
    path_track,
    stepwise_fit,
    tracking_centrality,
)
from .pin import (
    DensitySeries,
    DerivativeSeries,
    NlsmmFit,
    build_density_series,
    nlsmm_eval,
    nlsmm_fit,
    resample_density,
    warning_signal,
)
from .gkp import correlate_gdp, gkp, gkp_all, gkp_series

__all__ = [
    "FlowNetwork", "PercolationProfile", "build_flow_network", "detect_percolation_point",
    "edge_density", "largest_scc", "log_grid", "percolation_sweep", "threshold_filter",
    "condition_number", "ols_fit", "pearson", "vif",
    "IndicatorId", "IndicatorPanel", "deflate_panel", "select_countries",
    "CoefficientNetwork", "FitCriteria", "fit_gbopn", "forecast", "path_track",
    "stepwise_fit", "tracking_centrality",
    "DensitySeries", "DerivativeSeries", "NlsmmFit", "build_density_series", "nlsmm_eval",
    "nlsmm_fit", "resample_density", "warning_signal",
    "correlate_gdp", "gkp", "gkp_all", "gkp_series",
]
