"""Stochastic BDDC preconditioners for the lognormal diffusion problem."""

from ._core import (
    ConfigError,
    CovarianceSpec,
    DofPartition,
    KLBasis,
    Mesh,
    NumericalError,
    evaluate_coefficient,
    evaluate_field,
    global_kl,
    hermite_eval,
    local_kl,
    lognormal_pc_coeff,
    multi_index_count,
    run_experiment,
    sample_seed,
    sample_xi,
    univariate_triple_product,
)

__all__ = [
    "ConfigError",
    "CovarianceSpec",
    "DofPartition",
    "KLBasis",
    "Mesh",
    "NumericalError",
    "evaluate_coefficient",
    "evaluate_field",
    "global_kl",
    "hermite_eval",
    "local_kl",
    "lognormal_pc_coeff",
    "multi_index_count",
    "run_experiment",
    "sample_seed",
    "sample_xi",
    "univariate_triple_product",
]
