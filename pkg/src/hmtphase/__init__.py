"""Learning optimal far-field phase shifts of a holographic metasurface transceiver."""
from .bounds import (
    BoundParams,
    corollary_tail,
    error_probability_bound,
    noncentrality,
    sample_noncentral_chi2,
    squared_error,
    sub_exponential_tail,
)
from .channel import (
    HmtGeometry,
    LinkGeometry,
    PhasePair,
    achievable_rate,
    channel_gain,
    element_phase_shift,
    sinc,
)
from .estimator import (
    build_probe_set,
    estimate_means,
    invert_axis,
    select_initial_center,
    solve_noiseless,
    two_stage_estimate,
)
from .signal import NoiseModel, PilotConfig, PilotSampler, RngStream, dbm_to_watts

__version__ = "0.1.0"
