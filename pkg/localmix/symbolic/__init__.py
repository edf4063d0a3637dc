"""Finite Markov shifts, transfer operators and windowed path sums."""
from .operators import (
    GibbsData,
    check_aperiodic,
    covariance,
    leading_triple,
    shift_pairing,
    transfer_apply,
    transfer_pairing,
    twisted_eigenvalue,
    twisted_spectral_radius,
)
from .shift import SYSTEMS, MarkovShift, ShiftSystem, full_shift, lazy_walk, truncate
from .sums import (
    LLTSeries,
    Window,
    i_t_direct,
    i_t_unfolded,
    llt_series,
    predicted_llt_limit,
    q_sum,
)

__all__ = [
    "GibbsData",
    "LLTSeries",
    "MarkovShift",
    "SYSTEMS",
    "ShiftSystem",
    "Window",
    "check_aperiodic",
    "covariance",
    "full_shift",
    "i_t_direct",
    "i_t_unfolded",
    "lazy_walk",
    "leading_triple",
    "llt_series",
    "predicted_llt_limit",
    "q_sum",
    "shift_pairing",
    "transfer_apply",
    "transfer_pairing",
    "truncate",
    "twisted_eigenvalue",
    "twisted_spectral_radius",
]
