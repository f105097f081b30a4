"""Scalar functionals of grid fields used by moment and inequality checks.

All routines accept a single field or a stack of fields (last axis = grid).
"""

from enum import Enum

import numpy as np

from .drift import drift, energy_phi
from .spectral import backward_difference, laplacian, norm_E, norm_H


class FunctionalTag(str, Enum):
    norm_H_sq = "norm_H_sq"
    norm_E = "norm_E"
    norm_E_half = "norm_E_half"
    grad_L1 = "grad_L1"
    dirichlet_ratio = "dirichlet_ratio"
    arctan_flux_sq = "arctan_flux_sq"
    bv_second_half = "bv_second_half"
    sup_norm = "sup_norm"
    energy_phi = "energy_phi"


# Three moments whose finiteness under the invariant measure is the target.
MOMENT_TAGS = (
    FunctionalTag.bv_second_half,
    FunctionalTag.norm_E_half,
    FunctionalTag.arctan_flux_sq,
)


def default_tol(m: int) -> float:
    """Discretization slack ``10 h`` for continuum inequalities."""
    return 10.0 / (m + 1)


def _h(u):
    return 1.0 / (np.shape(u)[-1] + 1)


def grad_L1(u):
    """``int |u_x|`` as the h-weighted l1 norm of edge slopes."""
    return np.sum(np.abs(backward_difference(u)), axis=-1) * _h(u)


def dirichlet_ratio(u):
    """``int u_xx^2 / (1 + u_x^2)`` with node curvature and averaged edge slopes."""
    s = backward_difference(u)
    s_node = 0.5 * (s[..., 1:] + s[..., :-1])
    return np.sum(laplacian(u) ** 2 / (1.0 + s_node**2), axis=-1) * _h(u)


def arctan_flux_sq(u):
    """``||(arctan u_x)_x||^2``, i.e. the squared H norm of the drift."""
    return norm_H(drift(u)) ** 2


def total_variation_slope(u):
    """Discrete ``[D u_x]``: total variation of the edge slope sequence."""
    return np.sum(np.abs(np.diff(backward_difference(u), axis=-1)), axis=-1)


def bv_second_half(u):
    return np.sqrt(total_variation_slope(u))


def sup_norm(u):
    return np.max(np.abs(u), axis=-1)


def norm_H_sq(u):
    return norm_H(u) ** 2


def norm_E_half(u):
    return np.sqrt(norm_E(u))


def lemma22_residual(u):
    """RHS minus LHS of the curvature-interpolation inequality

    ``(int |u_xx|)^(1/2) <= 1/2 int u_xx^2/(1+u_x^2) + 3/2 + 1/2 ||u_x||_L1``.
    """
    rhs = 0.5 * dirichlet_ratio(u) + 1.5 + 0.5 * grad_L1(u)
    return rhs - np.sqrt(total_variation_slope(u))


def embedding_residual(u):
    """``||u_x||_L1 - ||u||_inf``; nonnegative on every grid field."""
    return np.sum(np.abs(np.diff(u, prepend=0.0, append=0.0, axis=-1)), axis=-1) - sup_norm(u)


def arctan_constant_K() -> float:
    """Sharp constant ``K = max_s (|s| - s arctan s)`` in ``s arctan s >= |s| - K``.

    For ``s >= 0`` the function is ``s (1 - arctan s)``, maximized where
    ``1 - arctan s = s / (1 + s^2)``.
    """
    from scipy.optimize import brentq

    s = brentq(lambda t: 1.0 - np.arctan(t) - t / (1.0 + t * t), 0.0, 2.0)
    return float(s * (1.0 - np.arctan(s)))


EVALUATORS = {
    FunctionalTag.norm_H_sq: norm_H_sq,
    FunctionalTag.norm_E: norm_E,
    FunctionalTag.norm_E_half: norm_E_half,
    FunctionalTag.grad_L1: grad_L1,
    FunctionalTag.dirichlet_ratio: dirichlet_ratio,
    FunctionalTag.arctan_flux_sq: arctan_flux_sq,
    FunctionalTag.bv_second_half: bv_second_half,
    FunctionalTag.sup_norm: sup_norm,
    FunctionalTag.energy_phi: energy_phi,
}


def evaluate(tag, u):
    return EVALUATORS[FunctionalTag(tag)](u)


def resolve_observers(observers) -> dict:
    """Normalize observer specs into an ordered ``{name: callable}``."""
    if isinstance(observers, dict):
        return dict(observers)
    out = {}
    for tag in observers:
        t = FunctionalTag(tag)
        out[t.value] = EVALUATORS[t]
    return out
