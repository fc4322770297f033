from ._siqkd import (
    CLASSICAL_BOUND,
    TSIRELSON_BOUND,
    ConfigError,
    chsh_value,
    chsh_with_intercept,
    correlator,
    correlator_from_state,
    correlator_three,
    estimate_chsh,
    estimate_correlator,
    optimal_settings,
    pseudo_projection_trace,
    run_session,
    run_toy,
    tb_chsh,
    tb_correlator,
)

__all__ = [
    "CLASSICAL_BOUND",
    "TSIRELSON_BOUND",
    "ConfigError",
    "chsh_value",
    "chsh_with_intercept",
    "correlator",
    "correlator_from_state",
    "correlator_three",
    "estimate_chsh",
    "estimate_correlator",
    "optimal_settings",
    "pseudo_projection_trace",
    "run_session",
    "run_toy",
    "tb_chsh",
    "tb_correlator",
]
