"""Coverage, load and throughput of LOS-limited mmWave networks with multi-beam APs."""

from .coverage import CoverageCurve, CoverageQuery, coverage_probability, coverage_sweep, coverage_table
from .load import LoadPmf, load_pmf, load_pmf_full, load_pmf_simplified, mean_bandwidth, total_variation
from .mc import McConfig, McEstimate, simulate_coverage, simulate_fixed_rate_throughput, simulate_load
from .model import BeamPattern, NetworkParams, ValidationError, default_params, load_config, validate
from .series import CoefficientTable, choose_degree, coefficients, coverage_via_series, truncation_bound
from .specfun import DEFAULT_QUAD, NumericalError, QuadratureError, QuadratureSpec
from .throughput import (
    BoundaryMaximumWarning,
    RateSchedule,
    ThroughputReport,
    asymptotic_gain_bound,
    densification_gain,
    density_threshold,
    fixed_rate_throughput,
    multi_rate_throughput,
    optimal_rate_threshold,
    scaled_gain,
    throughput_upper_bound,
)

__version__ = "0.1.0"
