from .interp import (
    NormEquivalence,
    ToyPair,
    WitnessSeries,
    b_condition,
    element_with_distance_curve,
    gamma_b_norm,
    k_functional,
    la_inequality,
    lemma_balance_witness,
    prop_balance_inclusion,
    prop_norm_equivalence,
    rho_norm,
    waterfill_distance,
)
