from .balance import (
    Atom,
    BalanceReport,
    DistanceEstimate,
    FourierResult,
    HqResult,
    ParticleMeasure,
    PiResult,
    TestDictionary,
    build_dictionary,
    calibrate_dictionary,
    cross_validated_delta,
    dk_distance,
    dual_distance,
    example1_statistic,
    fourier_balance,
    gaussian_measure,
    hypothesis_Hq_statistic,
    hypothesis_Hq_tilde_statistic,
    intro_model_samples,
    json_safe,
    oo_ratios,
    pi_functional,
    reciprocity_condition,
    theorem2C_verdict,
)
