from .ibp import (
    IbpSample,
    MeasureSobolevNorm,
    check_identity,
    conditional_gaussian_weights,
    density_bound_check,
    density_norm_bound,
    gaussian_ibp_weights,
    gaussian_mixture_weights,
    k_dp,
    measure_sobolev_norm,
    moment_factor,
    mt_density,
    poisson_kernel_grad,
    sphere_area,
    theta_p_bound,
    weight_moments,
)
