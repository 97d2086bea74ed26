"""Fractional-order and reset control toolkit."""

from ._core import (  # noqa: F401
    NumericalFailure,
    __version__,
    actuator_feedforward_gain,
    actuator_run,
    ci_alpha_describing_function,
    controller_tf,
    describing_function,
    design,
    freq_response,
    gl_weights,
    log_grid,
    loop_margins,
    normalize_scenario,
    run_cli,
    simulate_scenario,
    stability_check,
)
