"""Cylindrical test functions, the Kolmogorov operator and resolvent estimates.

Test functions depend on finitely many sine coordinates ``a_k = <u, e_k>_h``.
For them the trace term of the Kolmogorov operator is a finite sum and all
sup norms are available in closed form:

    J0 phi(u) = 1/2 sum_k sigma_k^2 d_kk phi + sum_k d_k phi <A_h u, e_k>_h.

The pseudo-resolvent ``R(lam) f (x) = int_0^inf e^{-lam t} E f(u(t, x)) dt``
is estimated by Monte Carlo over independent noise streams, with the time
integral truncated at ``T`` and evaluated exactly for the piecewise-linear
interpolant of the recorded values.
"""

import re
from dataclasses import asdict, dataclass

import numpy as np

from .drift import drift
from .ergodic import batch_means, dyadic_windows, windows_agree
from .errors import StabilizationError, ValidationError
from .integrator import SimConfig, run_synchronized, simulate
from .noise import NoiseSpec
from .parallel import pmap
from .spectral import analyze, norm_H


class TestFunction:
    """Bounded function of the coordinates ``a_k``, ``k in modes``.

    Subclasses provide value, gradient and Hessian in those coordinates
    plus closed-form ``sup_norm`` and ``grad_sup_norm`` (upper bounds that
    are attained for the single-term families).
    """

    __test__ = False  # not a pytest class
    modes: tuple = ()

    def coords(self, u):
        u = np.asarray(u, dtype=float)
        a = analyze(u, max(self.modes)) if self.modes else np.zeros(u.shape[:-1] + (0,))
        return a[..., [k - 1 for k in self.modes]]

    def __call__(self, u):
        return self.value(self.coords(u))

    def value(self, a):
        raise NotImplementedError

    def grad(self, a):
        raise NotImplementedError

    def hess(self, a):
        raise NotImplementedError

    def square(self) -> "TestFunction":
        """Closed form of ``phi^2`` as another test function."""
        raise NotImplementedError


class CylTrig(TestFunction):
    """``sum_j c_j cos(w_j . a + theta_j)`` over at most three coordinates."""

    def __init__(self, modes, terms, name=None):
        self.modes = tuple(int(k) for k in modes)
        if len(self.modes) > 3 or len(set(self.modes)) != len(self.modes) or min(self.modes, default=1) < 1:
            raise ValidationError("cylindrical functions use at most 3 distinct modes >= 1")
        c, w, th = [], [], []
        for coef, freq, phase in terms:
            freq = np.broadcast_to(np.asarray(freq, dtype=float), (len(self.modes),))
            c.append(float(coef))
            w.append(freq)
            th.append(float(phase))
        self.c = np.asarray(c)
        self.w = np.asarray(w).reshape(len(c), len(self.modes))
        self.theta = np.asarray(th)
        self.name = name or f"cyl_trig({list(self.modes)})"

    def _phase(self, a):
        return np.asarray(a) @ self.w.T + self.theta

    def value(self, a):
        return np.cos(self._phase(a)) @ self.c

    def grad(self, a):
        return -(np.sin(self._phase(a)) * self.c) @ self.w

    def hess(self, a):
        cw = np.cos(self._phase(a)) * self.c
        return -np.einsum("...j,ji,jl->...il", cw, self.w, self.w)

    @property
    def sup_norm(self) -> float:
        return float(np.sum(np.abs(self.c)))

    @property
    def grad_sup_norm(self) -> float:
        return float(np.sum(np.abs(self.c) * np.linalg.norm(self.w, axis=1)))

    def square(self):
        # cos x cos y = (cos(x - y) + cos(x + y)) / 2
        terms = []
        for i in range(self.c.size):
            for j in range(self.c.size):
                cc = 0.5 * self.c[i] * self.c[j]
                terms.append((cc, self.w[i] - self.w[j], self.theta[i] - self.theta[j]))
                terms.append((cc, self.w[i] + self.w[j], self.theta[i] + self.theta[j]))
        return CylTrig(self.modes, terms, f"({self.name})^2")


class CylCos(CylTrig):
    """``cos(s a_k)``; ``|phi| <= 1`` and ``|D phi| <= s``."""

    def __init__(self, k: int, s: float):
        super().__init__((k,), [(1.0, float(s), 0.0)], f"cyl_cos({k},{s:g})")
        self.k, self.s = int(k), float(s)


class Constant(CylTrig):
    def __init__(self, value: float = 1.0):
        super().__init__((), [(value, np.zeros(0), 0.0)], f"const({value:g})")
        self.constant = float(value)

    def coords(self, u):
        return np.zeros(np.shape(u)[:-1] + (0,))

    def value(self, a):
        return np.full(np.shape(a)[:-1], self.constant)


class CylExp(TestFunction):
    """``exp(-s a_k^2)``; ``|phi| <= 1`` and ``|D phi| <= sqrt(2 s / e)``."""

    def __init__(self, k: int, s: float):
        if s <= 0:
            raise ValidationError("cyl_exp needs s > 0")
        self.k, self.s = int(k), float(s)
        self.modes = (self.k,)
        self.name = f"cyl_exp({k},{s:g})"

    def value(self, a):
        return np.exp(-self.s * a[..., 0] ** 2)

    def grad(self, a):
        x = a[..., 0]
        return (-2 * self.s * x * np.exp(-self.s * x * x))[..., None]

    def hess(self, a):
        x = a[..., 0]
        return ((4 * self.s**2 * x * x - 2 * self.s) * np.exp(-self.s * x * x))[..., None, None]

    @property
    def sup_norm(self) -> float:
        return 1.0

    @property
    def grad_sup_norm(self) -> float:
        return float(np.sqrt(2 * self.s / np.e))

    def square(self):
        return CylExp(self.k, 2 * self.s)


_SPEC = re.compile(r"^\s*(cyl_cos|cyl_exp|const)\s*\(([^)]*)\)\s*$")


def parse_test_function(spec) -> TestFunction:
    """Build a test function from ``'cyl_cos(1,1)'``-style strings or dicts."""
    if isinstance(spec, TestFunction):
        return spec
    if isinstance(spec, dict):
        fam = spec.get("family")
        if fam == "cyl_cos":
            return CylCos(int(spec["k"]), float(spec["s"]))
        if fam == "cyl_exp":
            return CylExp(int(spec["k"]), float(spec["s"]))
        if fam == "const":
            return Constant(float(spec.get("value", 1.0)))
        if fam == "cyl_trig":
            terms = [(t["c"], t["w"], t.get("theta", 0.0)) for t in spec["terms"]]
            return CylTrig(spec["modes"], terms)
        raise ValidationError(f"unknown test function family {fam!r}")
    m = _SPEC.match(str(spec))
    if not m:
        raise ValidationError(f"cannot parse test function {spec!r}")
    fam, args = m.group(1), [float(x) for x in m.group(2).split(",") if x.strip()]
    if fam == "cyl_cos":
        return CylCos(int(args[0]), args[1])
    if fam == "cyl_exp":
        return CylExp(int(args[0]), args[1])
    return Constant(args[0] if args else 1.0)


def _noise_var(noise: NoiseSpec, modes):
    q = noise.covariance()
    return np.array([q[k - 1] if k <= q.size else 0.0 for k in modes])


def j0_apply(phi: TestFunction, u, noise: NoiseSpec):
    """Closed-form Kolmogorov operator at ``u`` (single field or stack)."""
    if not phi.modes:
        return np.zeros(np.shape(u)[:-1]) if np.ndim(u) > 1 else 0.0
    a = phi.coords(u)
    b = analyze(drift(u), max(phi.modes))[..., [k - 1 for k in phi.modes]]
    q = _noise_var(noise, phi.modes)
    hd = np.diagonal(phi.hess(a), axis1=-2, axis2=-1)
    return 0.5 * hd @ q + np.sum(phi.grad(a) * b, axis=-1)


def carre_du_champ(phi: TestFunction, u, noise: NoiseSpec):
    """``<Q D phi, D phi>`` at ``u``."""
    if not phi.modes:
        return np.zeros(np.shape(u)[:-1]) if np.ndim(u) > 1 else 0.0
    g = phi.grad(phi.coords(u))
    return (g * g) @ _noise_var(noise, phi.modes)


def square_field_defect(phi: TestFunction, u, noise: NoiseSpec):
    """``J0(phi^2) - 2 phi J0 phi - <Q D phi, D phi>`` with ``phi^2`` in closed form.

    Vanishes identically (to rounding).
    """
    lhs = j0_apply(phi.square(), u, noise)
    return lhs - 2 * phi(u) * j0_apply(phi, u, noise) - carre_du_champ(phi, u, noise)


# ---------------------------------------------------------------- resolvent


def exp_trapezoid_weights(n_records: int, dt_rec: float, lam: float) -> np.ndarray:
    """Weights ``w_j`` with ``sum_j w_j g_j = int_0^T e^{-lam t} g(t) dt`` exactly for
    the piecewise-linear interpolant ``g`` of samples at ``t_j = j dt_rec``.

    All weights are positive and sum to ``(1 - e^{-lam T}) / lam``.
    """
    q = lam * dt_rec
    i0 = -np.expm1(-q) / lam
    i1 = (-np.expm1(-q) - q * np.exp(-q)) / (lam * q)
    decay = np.exp(-lam * dt_rec * np.arange(n_records))
    w = np.zeros(n_records)
    w[:-1] += decay[:-1] * (i0 - i1)
    w[1:] += decay[:-1] * i1
    return w


@dataclass
class ResolventEstimate:
    function: str
    lam: float
    estimate: float
    stderr: float
    truncation_bias: float
    t_trunc: float
    n_paths: int
    bound_lhs: float
    bound_rhs: float
    passed: bool
    point: int = 0

    def to_dict(self):
        return asdict(self)


def _record_paths(args):
    cfg, points, funcs, stream_id = args
    vals = [[[] for _ in funcs] for _ in points]

    def record(k, t, states):
        for p, u in enumerate(states):
            for i, f in enumerate(funcs):
                vals[p][i].append(float(f(u)))

    run_synchronized(points, cfg, record, stream_id)
    return np.asarray(vals)  # (points, funcs, records)


def _path_values(cfg, points, funcs, n_paths, stream_base, synchronized_points=True):
    """Recorded ``f(u_t)`` for every path; shape ``(paths, points, funcs, records)``.

    With ``synchronized_points`` all points share a path's stream; otherwise
    point ``p`` uses stream ``stream_base + p * n_paths + j``.
    """
    if synchronized_points:
        jobs = [(cfg, points, funcs, stream_base + j) for j in range(n_paths)]
        return np.stack(pmap(_record_paths, jobs))
    per_point = []
    for p, x in enumerate(points):
        jobs = [(cfg, [x], funcs, stream_base + p * n_paths + j) for j in range(n_paths)]
        per_point.append(np.stack(pmap(_record_paths, jobs))[:, 0])
    return np.stack(per_point, axis=1)


def _horizon_cfg(cfg: SimConfig, t_max: float) -> SimConfig:
    steps = int(np.ceil(t_max / cfg.record_dt - 1e-9)) * cfg.observable_stride
    return cfg.with_(t_end=steps * cfg.dt).validate()


def _resolvent_from_values(vals, dt_rec, lam, t_trunc):
    """Per-path resolvent integrals for truncation ``t_trunc`` (vals: paths x records)."""
    n_rec = int(round(t_trunc / dt_rec)) + 1
    w = exp_trapezoid_weights(n_rec, dt_rec, lam)
    return vals[..., :n_rec] @ w, (n_rec - 1) * dt_rec


def resolvent_sweep(
    functions,
    lambdas,
    points,
    cfg: SimConfig,
    n_paths: int = 32,
    t_trunc: float | None = None,
    stream_base: int = 0,
    n_se: float = 3.0,
):
    """Resolvent estimates for every (point, function, lambda) from shared paths.

    Truncation defaults to ``T = 8 / lam`` (bias ``<= e^-8 |f|_inf / lam``).
    The bound check is ``|lam R f| <= |f|_inf + lam (n_se stderr + bias)``.
    """
    funcs = [parse_test_function(f) for f in functions]
    lambdas = [float(l) for l in lambdas]
    if any(l <= 0 for l in lambdas):
        raise ValidationError("lambda must be positive")
    horizons = {l: (8.0 / l if t_trunc is None else float(t_trunc)) for l in lambdas}
    run_cfg = _horizon_cfg(cfg, max(horizons.values()))
    vals = _path_values(run_cfg, [np.asarray(x, dtype=float) for x in points], funcs, n_paths, stream_base)
    out = []
    for p in range(len(points)):
        for i, f in enumerate(funcs):
            for lam in lambdas:
                per_path, T = _resolvent_from_values(vals[:, p, i], run_cfg.record_dt, lam, horizons[lam])
                est = float(per_path.mean())
                se = float(per_path.std(ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else float("nan")
                bias = float(np.exp(-lam * T) * f.sup_norm / lam)
                lhs = abs(lam * est)
                rhs = f.sup_norm + lam * (n_se * (se if np.isfinite(se) else 0.0) + bias)
                out.append(
                    ResolventEstimate(f.name, lam, est, se, bias, T, n_paths, lhs, rhs, bool(lhs <= rhs), p)
                )
    return out


def resolvent_estimate(f, lam, x, cfg, t_trunc=None, n_paths=32, stream_base=0):
    """Single ``R(lam) f (x)`` estimate; see :func:`resolvent_sweep`."""
    return resolvent_sweep([f], [lam], [x], cfg, n_paths, t_trunc, stream_base)[0]


@dataclass
class GradientCheck:
    function: str
    lam: float
    delta: float
    lhs: float
    stderr: float
    rhs: float
    crn: bool
    passed: bool

    def to_dict(self):
        return asdict(self)


def gradient_bound_check(
    f,
    lam: float,
    x,
    direction,
    cfg: SimConfig,
    n_paths: int = 32,
    delta: float = 1e-3,
    crn: bool = True,
    t_trunc: float | None = None,
    stream_base: int = 0,
    n_se: float = 3.0,
) -> GradientCheck:
    """Central difference of ``R(lam) f`` along a unit direction versus ``|Df|_inf / lam``.

    With ``crn`` both evaluation points are driven by the same noise path
    (common random numbers); otherwise by independent streams.
    """
    if not 1e-4 <= delta <= 1e-2:
        raise ValidationError("finite-difference step must lie in [1e-4, 1e-2]")
    f = parse_test_function(f)
    h = np.asarray(direction, dtype=float)
    nh = float(norm_H(h))
    if not abs(nh - 1.0) < 1e-9:
        raise ValidationError(f"direction must have unit H norm, got {nh}")
    x = np.asarray(x, dtype=float)
    T = 8.0 / lam if t_trunc is None else float(t_trunc)
    run_cfg = _horizon_cfg(cfg, T)
    pts = [x + delta * h, x - delta * h]
    vals = _path_values(run_cfg, pts, [f], n_paths, stream_base, synchronized_points=crn)
    plus, _ = _resolvent_from_values(vals[:, 0, 0], run_cfg.record_dt, lam, T)
    minus, _ = _resolvent_from_values(vals[:, 1, 0], run_cfg.record_dt, lam, T)
    if crn:
        diffs = (plus - minus) / (2 * delta)
        est = float(diffs.mean())
        se = float(diffs.std(ddof=1) / np.sqrt(n_paths))
    else:
        est = float((plus.mean() - minus.mean()) / (2 * delta))
        se = float(np.hypot(plus.std(ddof=1), minus.std(ddof=1)) / np.sqrt(n_paths) / (2 * delta))
    lhs = abs(est)
    rhs = f.grad_sup_norm / lam
    passed = lhs <= rhs + n_se * se + delta**2
    return GradientCheck(f.name, float(lam), float(delta), lhs, se, rhs, crn, bool(passed))


# --------------------------------------------------------------- invariance


@dataclass
class InvarianceResult:
    function: str
    residual: float
    stderr: float
    n_samples: int
    passed: bool

    def to_dict(self):
        return asdict(self)


def invariance_from_series(name, values, n_se: float = 3.0, n_batches: int = 16) -> InvarianceResult:
    mean, se = batch_means(values, n_batches)
    return InvarianceResult(name, mean, se, int(np.size(values)), bool(abs(mean) <= n_se * se or mean == 0.0))


def invariance_residual(
    phis,
    cfg: SimConfig,
    t_avg: float,
    t_burn: float | None = None,
    u0=None,
    stream_id: int = 0,
    n_se: float = 3.0,
    require_stable: bool = True,
    with_series: bool = False,
):
    """Time averages of ``J0 phi`` along one stationary trajectory.

    With ``with_series`` the recorded trajectory is returned as well.
    The run is refused (:class:`StabilizationError`) when the dyadic windows
    of ``|u|_H^2`` along it disagree by more than 10%.
    """
    phis = [parse_test_function(p) for p in phis]
    if t_burn is None:
        t_burn = t_avg / 10.0
    run_cfg = cfg.with_(t_end=t_burn + t_avg).validate()
    observers = {p.name: (lambda u, p=p: j0_apply(p, u, cfg.noise)) for p in phis}
    observers["norm_H_sq"] = lambda u: norm_H(u) ** 2
    u0 = np.zeros(cfg.m) if u0 is None else u0
    traj = simulate(u0, run_cfg, observers, stream_id=stream_id)
    sel = traj.times > t_burn
    wins = dyadic_windows(traj.times[sel], traj.series["norm_H_sq"][sel], t_burn, t_avg)
    if require_stable and not cfg.noise.is_zero and not windows_agree(wins):
        raise StabilizationError(f"|u|_H^2 windows did not stabilize: {wins[:2]}")
    out = [invariance_from_series(p.name, traj.series[p.name][sel], n_se) for p in phis]
    return (out, traj) if with_series else out
