"""Correlation-coefficient estimation for bivariate exponential/Rayleigh data.

Library + CLI covering: paired-sample generation from the structured
Gaussian layer, three censored moment-based estimators of the
correlation coefficient r, the Cramer-Rao bound, the constrained
(censored-Gaussian) MSE lower bound, and a reproducible Monte Carlo
sweep harness comparing estimator error against both bounds.
"""

from .bounds import (
    BoundCurve,
    FisherMatrix,
    bound_curve,
    crb,
    fisher_info,
    gaussian_censor_prob,
    mse_bound,
    mse_bound_parts,
    score,
)
from .errors import (
    AccuracyError,
    BexcorrError,
    ConfigError,
    DegenerateModelError,
    DegenerateSampleError,
    DivergenceError,
    DomainError,
)
from .estimators import (
    Estimate,
    SampleMoments,
    cos2_stat,
    estimate_r1,
    estimate_r2,
    estimate_r3,
    eta_transform,
    pearson_stat,
    sample_moments,
    xi_transform,
)
from .harness import SweepConfig, SweepResult, emit, run_cell, run_sweep
from .model import (
    GaussCovariance,
    ModelParams,
    MomentSet,
    build_covariance,
    cos2_limit,
    logpdf_exp,
    logpdf_rayleigh,
    pearson_rayleigh_pop,
    pop_moments_exp,
    pop_moments_rayleigh,
)
from .sampling import PairedSample, SeedSpec, gaussian_quadruple, sample_pairs

__version__ = "0.1.0"
