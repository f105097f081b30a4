"""Curve-shortening drift ``A(u) = (arctan u_x)_x`` and its convex potential.

The drift is discretized as the divergence of ``arctan`` of the edge
slopes.  Together with the staggered grid this gives, exactly in exact
arithmetic and up to a few ulps in floating point,

* monotonicity ``<A_h u - A_h v, u - v>_h <= 0``;
* the subgradient inequality for ``Phi_h(u) = sum_j G((D^- u)_j) h`` with
  ``G(s) = s arctan s - log(1 + s^2) / 2``, since ``A_h = -grad Phi_h``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError
from .spectral import (
    analyze,
    backward_difference,
    check_same_grid,
    divergence,
    norm_E,
    norm_H,
    synthesize,
)


@dataclass(frozen=True)
class DriftEval:
    value: np.ndarray
    edge_slopes: np.ndarray
    edge_arctan: np.ndarray


def drift_A(u) -> DriftEval:
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise EvaluationError("drift evaluated on a non-finite field")
    s = backward_difference(u)
    g = np.arctan(s)
    return DriftEval(divergence(g), s, g)


def drift(u) -> np.ndarray:
    """Shorthand for ``drift_A(u).value``."""
    return drift_A(u).value


def galerkin_drift(a, m: int) -> np.ndarray:
    """``P_n A_h`` evaluated on the field with sine coefficients ``a``."""
    a = np.asarray(a, dtype=float)
    return analyze(drift(synthesize(a, m)), a.shape[-1])


def monotonicity_gap(u, v) -> np.ndarray:
    """``<A_h u - A_h v, u - v>_h`` evaluated edgewise (never positive).

    Each edge contributes ``-(arctan a - arctan b)(a - b) h`` which is
    nonpositive because ``arctan`` is nondecreasing in floating point too.
    """
    check_same_grid(u, v)
    su = backward_difference(u)
    sv = backward_difference(v)
    m = su.shape[-1] - 1
    return -np.sum((np.arctan(su) - np.arctan(sv)) * (su - sv), axis=-1) / (m + 1)


def refined_gap_bound(u, v):
    """Both sides of the refined monotonicity estimate.

    Returns ``(lhs, rhs)`` with ``lhs = monotonicity_gap(u, v)`` and
    ``rhs = -|u - v|_H^2 / (1 + |u|_E^2 + |v|_E^2)``; ``lhs <= rhs`` holds.
    """
    lhs = monotonicity_gap(u, v)
    d = norm_H(np.asarray(u) - np.asarray(v))
    rhs = -(d**2) / (1.0 + norm_E(u) ** 2 + norm_E(v) ** 2)
    return lhs, rhs


def refined_gap_tol(m: int) -> float:
    """Default tolerance for :func:`refined_gap_bound`, linear in ``h``."""
    return 1.0 / (m + 1)


_BIG = 1e100


def G(s) -> np.ndarray:
    """Primitive of ``arctan`` vanishing at 0 (convex, linear growth)."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        small = a * np.arctan(a) - 0.5 * np.log1p(a * a)
        # s^2 overflows long before the linear regime is inaccurate
        big = a * np.arctan(a) - np.log(a) - 0.5 * np.log1p(1.0 / (a * a))
    return np.where(a > _BIG, big, small)


def G_recession(x) -> np.ndarray:
    """``lim_{t->inf} G(t x) / t``."""
    return 0.5 * np.pi * np.abs(np.asarray(x, dtype=float))


def energy_phi(u) -> np.ndarray:
    s = backward_difference(u)
    return np.sum(G(s), axis=-1) / s.shape[-1]


def bregman_G(a, b) -> np.ndarray:
    """``G(b) - G(a) - arctan(a) (b - a)`` without catastrophic cancellation.

    Uses ``arctan b - arctan a = atan2(b - a, 1 + a b)`` and
    ``log((1 + b^2)/(1 + a^2)) = log1p((b - a)(b + a)/(1 + a^2))``; the
    remaining rounding error is bounded by a few ulps of ``|b - a|``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    dtheta = np.arctan2(d, 1.0 + a * b)
    return b * dtheta - 0.5 * np.log1p(d * (a + b) / (1.0 + a * a))


def subgradient_residual(u, z) -> np.ndarray:
    """``Phi_h(z) - Phi_h(u) - <-A_h u, z - u>_h`` (nonnegative)."""
    check_same_grid(u, z)
    su = backward_difference(u)
    sz = backward_difference(z)
    return np.sum(bregman_G(su, sz), axis=-1) / su.shape[-1]
