"""Synchronized-noise coupling of two trajectories.

Both copies see identical increments, so the additive noise cancels in the
difference and ``d(t) = ||u_t - v_t||_H`` is driven by the drift alone.
Along such pairs we evaluate the polynomial stability bound

    d(t)^(2a) <= t^-a 3^a (1 + <|u|_E^(2a)>_t + <|v|_E^(2a)>_t) d(0)^(2a),

where ``<.>_t`` denotes the running time average over ``[0, t]``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .drift import monotonicity_gap, refined_gap_bound
from .errors import ValidationError
from .integrator import SimConfig, run_synchronized
from .spectral import norm_E, norm_H

DISTANCE_FLOOR = 1e-8


def _running_average(t, y):
    """``(1/t) int_0^t y`` by the trapezoid rule on the sample times (0 at t=0)."""
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))])
    out = np.zeros_like(y)
    out[1:] = integral[1:] / t[1:]
    return out


@dataclass
class CoupledRun:
    times: np.ndarray
    distance: np.ndarray
    norm_E_u: np.ndarray
    norm_E_v: np.ndarray
    alphas: tuple
    avg_u: dict
    avg_v: dict
    bound: dict
    dt: float
    states_u: list | None = field(default=None, repr=False)
    states_v: list | None = field(default=None, repr=False)

    def distance_increases(self, tol: float = 1e-9) -> np.ndarray:
        """Indices where ``d`` grows by more than ``tol`` between records."""
        return np.nonzero(np.diff(self.distance) > tol)[0] + 1

    def bound_check(self, alpha: float, t_min: float = 0.0, t_max: float = np.inf, tol: float = 1e-3):
        """Records in ``[t_min, t_max]`` violating the stability bound by more than ``tol``.

        Returns ``(checked, violations)`` with violations as ``(t, excess)``.
        """
        t = self.times
        sel = (t >= t_min) & (t <= t_max) & (t > 0)
        lhs = self.distance[sel] ** (2 * alpha)
        excess = lhs - self.bound[alpha][sel]
        bad = excess > tol
        return int(sel.sum()), list(zip(t[sel][bad].tolist(), excess[bad].tolist()))

    def csv_rows(self, alpha: float | None = None):
        a = self.alphas[-1] if alpha is None else alpha
        header = ["t", "distance", "bound", "avg_u_E", "avg_v_E"]
        rows = zip(self.times, self.distance, self.bound[a], self.avg_u[a], self.avg_v[a])
        return header, rows


def run_coupled(
    u0,
    v0,
    cfg: SimConfig,
    alphas=(0.25, 0.5, 1.0),
    keep_states: bool = False,
    stream_id: int = 0,
) -> CoupledRun:
    """Run the synchronized pair and evaluate the bound for each exponent."""
    alphas = tuple(float(a) for a in alphas)
    for a in alphas:
        if not 0 < a <= 1:
            raise ValidationError(f"Hoelder exponent must lie in (0, 1], got {a}")
    t, d, eu, ev = [], [], [], []
    su = [] if keep_states else None
    sv = [] if keep_states else None

    def record(k, tk, states):
        u, v = states
        t.append(tk)
        d.append(float(norm_H(u - v)))
        eu.append(float(norm_E(u)))
        ev.append(float(norm_E(v)))
        if keep_states:
            su.append(u.copy())
            sv.append(v.copy())

    run_synchronized([u0, v0], cfg, record, stream_id)
    t, d, eu, ev = map(np.asarray, (t, d, eu, ev))
    avg_u, avg_v, bound = {}, {}, {}
    with np.errstate(divide="ignore"):
        for a in alphas:
            avg_u[a] = _running_average(t, eu ** (2 * a))
            avg_v[a] = _running_average(t, ev ** (2 * a))
            b = np.full_like(t, np.inf)
            b[1:] = t[1:] ** -a * 3**a * (1 + avg_u[a][1:] + avg_v[a][1:]) * d[0] ** (2 * a)
            bound[a] = b
    return CoupledRun(t, d, eu, ev, alphas, avg_u, avg_v, bound, cfg.dt, su, sv)


@dataclass
class GapCheck:
    checked: int
    gap_violations: list
    derivative_violations: list
    max_gap_excess: float

    @property
    def violations(self) -> int:
        return len(self.gap_violations) + len(self.derivative_violations)


def pathwise_gap_check(run: CoupledRun, tol: float = 1e-3, rel_tol: float = 1e-3) -> GapCheck:
    """Check the refined monotonicity estimate along a recorded pair.

    At every record ``refined_gap_bound(u_t, v_t)`` must hold within ``tol``.
    Between consecutive records the discrete derivative of ``d^2 / 2`` must
    not exceed ``-d^2 / (1 + |u|_E^2 + |v|_E^2)`` (evaluated at the later
    record) by more than ``rel_tol * d^2``.  Records with ``d`` below
    ``1e-8`` are skipped: there the difference is at solver-rounding level.
    """
    if run.states_u is None:
        raise ValidationError("pathwise_gap_check needs a run recorded with keep_states=True")
    U = np.asarray(run.states_u)
    V = np.asarray(run.states_v)
    lhs, rhs = refined_gap_bound(U, V)
    excess = lhs - rhs
    gap_bad = [(float(run.times[i]), float(excess[i])) for i in np.nonzero(excess > tol)[0]]
    d2 = run.distance**2
    dtr = np.diff(run.times)
    deriv = 0.5 * np.diff(d2) / dtr
    bound = -d2[1:] / (1 + run.norm_E_u[1:] ** 2 + run.norm_E_v[1:] ** 2)
    live = run.distance[:-1] > DISTANCE_FLOOR
    der_excess = deriv - bound
    der_bad = [
        (float(run.times[i + 1]), float(der_excess[i]))
        for i in np.nonzero(live & (der_excess > rel_tol * d2[:-1]))[0]
    ]
    return GapCheck(len(run.times), gap_bad, der_bad, float(np.max(excess)) if excess.size else 0.0)


def derivative_vs_gap(run: CoupledRun) -> np.ndarray:
    """``(d^2_{j+1} - d^2_j) / (2 dt_rec) - gap(u_{j+1}, v_{j+1})`` per record interval."""
    U = np.asarray(run.states_u)
    V = np.asarray(run.states_v)
    deriv = 0.5 * np.diff(run.distance**2) / np.diff(run.times)
    return deriv - monotonicity_gap(U[1:], V[1:])


@dataclass
class DecayFit:
    slope: float
    ci_low: float
    ci_high: float
    n_points: int
    flag: str


def fit_decay_exponent(times, distance, t_min: float, t_max: float = np.inf, reference: float = -0.25):
    """Least-squares slope of ``log d^(1/2)`` against ``log t`` on ``[t_min, t_max]``.

    ``flag`` is ``"saturated"`` when the 95% interval contains ``reference``,
    ``"faster"`` when the decay is faster, and ``"bound_slack"`` when slower.
    Refuses windows in which ``d`` has reached the solver floor.
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(distance, dtype=float)
    sel = (t >= t_min) & (t <= t_max) & (t > 0)
    if sel.sum() < 3:
        raise ValidationError("fit window holds fewer than 3 records")
    if np.any(d[sel] <= DISTANCE_FLOOR):
        raise ValidationError("distance reached the solver floor inside the fit window")
    x = np.log(t[sel])
    y = 0.5 * np.log(d[sel])
    if np.ptp(y) == 0.0:
        return DecayFit(0.0, 0.0, 0.0, int(sel.sum()), "bound_slack")
    res = stats.linregress(x, y)
    half = stats.t.ppf(0.975, sel.sum() - 2) * res.stderr + 1e-12
    lo, hi = res.slope - half, res.slope + half
    if lo <= reference <= hi:
        flag = "saturated"
    elif hi < reference:
        flag = "faster"
    else:
        flag = "bound_slack"
    return DecayFit(float(res.slope), float(lo), float(hi), int(sel.sum()), flag)
