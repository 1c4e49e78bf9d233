from .heat_lab import (
    Coefficient,
    CosineSeries,
    CovarianceBounds,
    HeatEnsemble,
    HeatField,
    HeatModel,
    MOMENT_COLUMNS,
    MomentTable,
    S4Decomposition,
    additive_model,
    c_log_heat_model,
    cell_centers,
    cell_index,
    chebyshev_tail_check,
    conditional_covariance,
    covariance_bounds,
    heat_semigroup,
    kernel_gram,
    lipschitz_heat_model,
    moment_statistics,
    neumann_kernel,
    s4_decomposition,
    spde_verdict,
    walsh_simulate,
)
