from .young_orlicz import (
    YoungFunction,
    beta_e,
    conjugate,
    from_label,
    growth_exponents,
    holder_defect,
    inverse,
    log_entropy,
    loglog,
    luxembourg_norm,
    make_young,
    phi_e,
    power,
    rho_norm_bound_ratio,
    sobolev_orlicz_norm,
    sup_sobolev_norm,
    u_weight_bound,
    weighted_sobolev_orlicz_norm,
)
