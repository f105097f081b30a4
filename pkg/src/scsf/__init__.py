"""Numerical experiments for the stochastic curve shortening flow

    du = (arctan u_x)_x dt + Sigma dW   on (0, 1), u = 0 at both ends,

on a uniform grid with a diagonal sine-basis noise.
"""

from .errors import (
    BlowUpError,
    ConfigError,
    DimensionError,
    EvaluationError,
    ScsfError,
    SolverError,
    StabilizationError,
    ValidationError,
)
from .spectral import Grid, analyze, synthesize, project, norm_H, norm_E, inner_H, random_field
from .drift import drift, drift_A, monotonicity_gap, refined_gap_bound, subgradient_residual, energy_phi
from .noise import NoiseSpec, RngStream, hs_norm_E, sample_increment
from .integrator import SimConfig, simulate, run_synchronized, step_backward_euler, step_explicit
from .functionals import FunctionalTag, evaluate
from .ergodic import estimate_moments, initial_condition_independence
from .coupling import run_coupled, pathwise_gap_check, fit_decay_exponent
from .yosida import resolvent, yosida_map, mollified_drift
from .kolmogorov import (
    CylCos,
    CylExp,
    CylTrig,
    Constant,
    j0_apply,
    resolvent_estimate,
    resolvent_sweep,
    gradient_bound_check,
    invariance_residual,
)

__version__ = "0.1.0"
