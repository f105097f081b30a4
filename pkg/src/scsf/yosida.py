"""Resolvent ``J_a = (I - a A_h)^-1``, Yosida drift and its Gaussian mollification."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .drift import drift
from .errors import SolverError, ValidationError
from .noise import RngStream, heat_semigroup, mollifier_covariance
from .spectral import analyze, check_same_grid, inner_H, norm_H, synthesize

RESIDUAL_CONTRACT = 1e-10


@dataclass(frozen=True)
class ResolventSolve:
    x: np.ndarray
    alpha: float
    value: np.ndarray
    iterations: int
    final_residual: float


def resolvent(x, alpha: float, tol: float = 1e-12, max_iter: int = 200, guess=None) -> ResolventSolve:
    """Solve ``w - alpha A_h(w) = x`` by damped Newton with a tridiagonal Jacobian.

    Raises :class:`SolverError` if the residual does not reach ``tol`` (or
    stalls above ``1e-10``) within ``max_iter`` iterations.
    """
    if not alpha > 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    x = np.ascontiguousarray(x, dtype=float)
    w = np.array(x if guess is None else guess, dtype=float)
    status, iters, res = kernels.resolvent_solve(x, float(alpha), w, tol, max_iter)
    if status != kernels.STATUS_OK:
        raise SolverError(f"resolvent solve failed for alpha={alpha}", residual=res, iterations=iters)
    return ResolventSolve(x, float(alpha), w, int(iters), float(res))


def yosida_map(x, alpha: float, **kw) -> np.ndarray:
    """``V_alpha(x) = A_h(J_alpha x) = (J_alpha x - x) / alpha``."""
    sol = resolvent(x, alpha, **kw)
    return (sol.value - sol.x) / alpha


def heat_grid(u, beta: float) -> np.ndarray:
    """``e^{beta Delta}`` applied to a grid field through its full sine expansion."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    if beta == 0:
        return u.copy()
    return synthesize(heat_semigroup(analyze(u, m), beta), m)


@dataclass(frozen=True)
class MollifiedEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    tail_variance: float
    samples: np.ndarray | None = None

    @property
    def stderr_norm(self) -> float:
        """H norm of the componentwise standard errors."""
        return float(norm_H(self.stderr))


def mollified_drift(
    x,
    alpha: float,
    beta: float,
    m_samples: int,
    rng,
    n_modes: int | None = None,
    antithetic: bool = False,
    keep_samples: bool = False,
) -> MollifiedEstimate:
    """Monte Carlo estimate of ``E[e^{beta Delta} V_alpha(e^{beta Delta} x + Y)]``.

    ``Y`` is centred Gaussian with covariance ``int_0^beta e^{2 s Delta} ds``
    truncated to ``n_modes`` sine modes; the neglected trace is reported as
    ``tail_variance``.  With ``antithetic`` the samples come in ``(+Y, -Y)``
    pairs and the standard error is computed from pair means.
    """
    if m_samples < 2:
        raise ValidationError("m_samples must be >= 2")
    if not (alpha > 0 and beta > 0):
        raise ValidationError("alpha and beta must be positive")
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    n = m if n_modes is None else n_modes
    var = mollifier_covariance(beta, m)
    tail = float(np.sum(var[n:]))
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    n_draw = (m_samples + 1) // 2 if antithetic else m_samples
    y = synthesize(gen.standard_normal((n_draw, n)) * np.sqrt(var[:n]), m)
    if antithetic:
        y = np.stack([y, -y], axis=1).reshape(-1, m)
    base = heat_grid(x, beta)
    vals = np.stack([yosida_map(base + yi, alpha) for yi in y])
    vals = heat_grid(vals, beta)
    if antithetic:
        units = 0.5 * (vals[0::2] + vals[1::2])
    else:
        units = vals
    mean = units.mean(axis=0)
    se = units.std(axis=0, ddof=1) / np.sqrt(units.shape[0])
    return MollifiedEstimate(mean, se, tail, vals if keep_samples else None)


def dissipativity_gap(vx, vy, x, y) -> float:
    """``<V(x) - V(y), x - y>_h`` for precomputed drift values."""
    check_same_grid(x, y)
    return float(inner_H(np.asarray(vx) - vy, np.asarray(x) - y))


def lipschitz_probe(alpha: float, pairs) -> float:
    """Largest ``||V_a x - V_a y|| / ||x - y||`` over the given pairs.

    The resolvent is nonexpansive, so the ratio never exceeds ``2 / alpha``.
    """
    best = 0.0
    for x, y in pairs:
        d = float(norm_H(np.asarray(x) - y))
        if d == 0:
            raise ValidationError("lipschitz_probe needs distinct pairs")
        r = float(norm_H(yosida_map(x, alpha) - yosida_map(y, alpha))) / d
        best = max(best, r)
    return best


def resolvent_consistency(x, alpha: float) -> float:
    """``||(J x - x)/alpha - A_h(J x)||_H``: identity form versus direct evaluation."""
    sol = resolvent(x, alpha)
    return float(norm_H((sol.value - sol.x) / alpha - drift(sol.value)))
