"""Secret-key-rate analysis for RFI-QKD and BB84 under reference-frame drift.

Core layers:
  core_math       entropy, correlators, depolarizing channel, drift averaging
  single_photon   ideal key rates for RFI-QKD and BB84
  decoy           two-decoy-state bounds and weak-coherent key rates
  mc              Monte-Carlo protocol simulator (validation oracle)
  sweep           parameter sweeps and zero-crossing solving
  service / cli   FastAPI wrapper and thin command-line client
"""

__version__ = "0.1.0"

from .core_math import (
    AXES,
    ChannelModel,
    CorrelatorSet,
    binary_entropy,
    correlator_drift_averaged,
    correlator_fixed,
    correlator_set,
    drift_factor,
)
from .decoy import (
    DecoyParams,
    EstimationBreakdown,
    ObservedStatistics,
    SinglePhotonBounds,
    analytic_statistics,
    c1_lower_bound,
    exact_single_photon_c,
    exact_single_photon_qber,
    exact_single_photon_yield,
    observed_qber,
    overall_gain,
    q1_bounds,
    rate_bb84_decoy,
    rate_rfi_decoy,
    single_photon_bounds,
    y1_lower_bound,
)
from .mc import (
    ObservableEstimates,
    SimulationConfig,
    Source,
    TallyTable,
    estimate_observables,
    simulate,
)
from .single_photon import (
    BASIS_PAIRS,
    OBSERVED_PAIRS,
    PROTOCOLS,
    RateResult,
    eve_information,
    misalignment_table,
    qber_bb84,
    quantity_c,
    rate_bb84,
    rate_rfi,
    rate_rfi_fixed_deviation,
)
from .sweep import (
    MonotonicityError,
    NoBracketError,
    SweepRecord,
    SweepSpec,
    evaluate_rate,
    find_threshold,
    run_sweep,
    threshold_rate_fn,
)

__all__ = [
    "__version__",
    "AXES",
    "BASIS_PAIRS",
    "ChannelModel",
    "CorrelatorSet",
    "DecoyParams",
    "EstimationBreakdown",
    "MonotonicityError",
    "NoBracketError",
    "OBSERVED_PAIRS",
    "ObservableEstimates",
    "ObservedStatistics",
    "PROTOCOLS",
    "RateResult",
    "SimulationConfig",
    "SinglePhotonBounds",
    "Source",
    "SweepRecord",
    "SweepSpec",
    "TallyTable",
    "analytic_statistics",
    "binary_entropy",
    "c1_lower_bound",
    "correlator_drift_averaged",
    "correlator_fixed",
    "correlator_set",
    "drift_factor",
    "estimate_observables",
    "evaluate_rate",
    "eve_information",
    "exact_single_photon_c",
    "exact_single_photon_qber",
    "exact_single_photon_yield",
    "find_threshold",
    "misalignment_table",
    "observed_qber",
    "overall_gain",
    "q1_bounds",
    "qber_bb84",
    "quantity_c",
    "rate_bb84",
    "rate_bb84_decoy",
    "rate_rfi",
    "rate_rfi_decoy",
    "rate_rfi_fixed_deviation",
    "run_sweep",
    "simulate",
    "single_photon_bounds",
    "sweep",
    "threshold_rate_fn",
    "y1_lower_bound",
]
