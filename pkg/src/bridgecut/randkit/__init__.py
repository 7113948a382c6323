"""Random streams, samplers and oracle densities."""

from .rng import RngStream, as_generator, replicate_streams
from .samplers import (
    BROWNIAN,
    LengthSequence,
    StableParams,
    gem_lengths,
    rank_lengths,
    sample_beta,
    sample_gamma,
    sample_positive_stable,
    sample_stable,
    size_biased_order,
    size_biased_reorder,
    uniform_stick_breaking,
)
from .densities import (
    beta_density,
    cdf_T1,
    cdf_tau_br,
    density_L1_bridge,
    density_T1,
    density_tau_br,
    gamma_density,
    intensity_T_lengths,
    joint_density_T1_split,
    joint_density_split,
    levy_density,
    rayleigh_cdf,
    split_integral,
    stable_density,
    standard_stable_density,
)

__all__ = [name for name in dir() if not name.startswith("_")]
