from .gridfn import (
    DERIVATIVE_BUFFER,
    GridFunction,
    RateFit,
    fit_rate,
    log_slope,
    map_blocks,
    multi_indices,
    plateau,
    plateau_derivative,
    rng_stream,
    smooth_step,
    smooth_step_derivative,
    split_blocks,
)
