"""Pseudospectral simulator and verification suite for the stochastic
modified two-component Camassa-Holm system on the torus."""

__version__ = "0.1.0"

from .spectral import (
    Grid,
    SpectralField,
    State,
    bessel_potential,
    besov_norm,
    dealiased_product,
    divergence,
    field_from_modes,
    from_physical,
    gradient,
    lp_block,
    mollify,
    sobolev_norm,
    state_norm,
    to_physical,
    winf_norm,
    zero_state,
)
from .operators import (
    RegularizationParams,
    Tendency,
    convection,
    drift,
    drift_regularized,
    greens_convolve,
    greens_kernel,
    l1,
    l2,
    l3,
    rhs_1d,
    truncation,
)
from .stochastics import (
    NoiseModel,
    WienerPath,
    diffusion,
    mu,
    sample_path,
    transform_state,
    untransform_state,
)
from .dynamics import (
    SimConfig,
    Trajectory,
    characteristic_flow,
    simulate,
    step_em,
    step_rk4_random,
)
from .diagnostics import (
    BreakingAssessment,
    breaking_condition,
    h1_energy,
    log_norm_functional,
    min_slope,
    riccati_window,
    transport_residual,
)
from .experiments import (
    ApproxFamilyParams,
    EnsembleReport,
    approx_solution,
    breaking_ensemble,
    decay_fit,
    family_gap,
    global_ensemble,
    residual_error,
    simulated_gap,
    steep_slope_data,
)
