from .sde_lab import (
    ConstantDiffusion,
    DiagonalDiffusion,
    Domain,
    FrozenGaussian,
    HormanderSpec,
    Lemma10Result,
    LinearDrift,
    LinearGaussianStep,
    PathEnsemble,
    SdeModel,
    brownian_model,
    c_log_model,
    coupled_distance,
    euler_simulate,
    exit_tail_rate,
    frozen_gaussian,
    hormander_kinetic_pipeline,
    kinetic_covariance,
    kinetic_model,
    lemma10_rate,
    lie_bracket,
    lipschitz_model,
    localizer,
    log_modulus_profile,
    mixture_density,
    ou_model,
    read_columns,
    theorem9_pipeline,
    write_columns,
)
