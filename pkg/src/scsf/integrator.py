"""Time stepping for the spectrally forced curve-shortening SDE.

Two schemes share one noise path per stream:

* ``backward_euler``: ``u' = J_dt(u + dW)``, the resolvent of the discrete
  drift applied to the noisy predictor.  Unconditionally stable, and two
  trajectories driven by the same increments never move apart.
* ``explicit``: ``u' = u + dt P_n A_h(u) + dW`` under a CFL restriction.

Noise increments are drawn in sine coefficient space in fixed-size chunks
from the trajectory's own counter-based stream, so the path depends only on
``(seed, stream_id)``, never on recording stride or worker count.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import BlowUpError, ConfigError, DimensionError, SolverError
from .noise import NoiseSpec, RngStream
from .spectral import Grid, basis_matrix

SCHEMES = ("backward_euler", "explicit")
NOISE_CHUNK = 2048


@dataclass(frozen=True)
class SimConfig:
    m: int
    n_modes: int
    dt: float
    noise: NoiseSpec
    scheme: str = "backward_euler"
    t_end: float = 1.0
    seed: int = 0
    observable_stride: int = 1
    cfl_fraction: float = 0.5
    newton_tol: float = 1e-12
    newton_max_iter: int = 100

    @property
    def grid(self) -> Grid:
        return Grid(self.m)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def record_dt(self) -> float:
        return self.dt * self.observable_stride

    def explicit_dt_limit(self) -> float:
        """Largest stable explicit step, ``cfl_fraction * 4 / rho``.

        ``rho = (4/h^2) sin^2(n pi h / 2)`` is the top eigenvalue of the
        projected discrete Laplacian; since ``arctan' <= 1`` it also bounds
        the drift Jacobian.  For ``n = m`` this is about ``cfl_fraction h^2``.
        """
        h = 1.0 / (self.m + 1)
        return self.cfl_fraction * h * h / np.sin(0.5 * np.pi * self.n_modes * h) ** 2

    def problems(self) -> list:
        """Every invariant violation as ``(field, message)``, without raising."""
        out = []
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 2):
            out.append(("m", f"need an integer m >= 2, got {self.m!r}"))
        if not (isinstance(self.n_modes, (int, np.integer)) and self.n_modes >= 1):
            out.append(("n_modes", f"need an integer n_modes >= 1, got {self.n_modes!r}"))
        elif isinstance(self.m, (int, np.integer)) and self.n_modes > self.m:
            out.append(("n_modes", f"n_modes={self.n_modes} exceeds grid size m={self.m}"))
        if not (np.isfinite(self.dt) and self.dt > 0):
            out.append(("dt", f"time step must be positive, got {self.dt}"))
        if self.scheme not in SCHEMES:
            out.append(("scheme", f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}"))
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            out.append(("t_end", f"horizon must be >= 0, got {self.t_end}"))
        if self.observable_stride < 1:
            out.append(("observable_stride", "must be >= 1"))
        if not 0 < self.cfl_fraction <= 0.5:
            out.append(("cfl_fraction", f"must lie in (0, 1/2], got {self.cfl_fraction}"))
        if self.noise.n != self.n_modes:
            out.append(("noise", f"noise has {self.noise.n} modes, expected n_modes={self.n_modes}"))
        if not out and self.scheme == "explicit" and self.dt > self.explicit_dt_limit() * (1 + 1e-12):
            out.append(
                ("dt", f"explicit scheme violates CFL: dt={self.dt:.3e} > {self.explicit_dt_limit():.3e}")
            )
        return out

    def validate(self) -> "SimConfig":
        probs = self.problems()
        if probs:
            name, msg = probs[0]
            raise ConfigError(msg, field=name)
        return self

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


class NoiseDriver:
    """Sequential source of coefficient increments for one stream."""

    def __init__(self, cfg: SimConfig, stream: RngStream):
        self.scale = cfg.noise.sigma * np.sqrt(cfg.dt)
        self.zero = cfg.noise.is_zero
        self.n = cfg.noise.n
        self.gen = None if self.zero else stream.generator()
        self._buf = np.empty((0, self.n))
        self._pos = 0

    def take(self, k: int) -> np.ndarray:
        if self.zero:
            return np.zeros((k, self.n))
        parts = []
        while k > 0:
            if self._pos == self._buf.shape[0]:
                self._buf = self.gen.standard_normal((NOISE_CHUNK, self.n)) * self.scale
                self._pos = 0
            j = min(k, self._buf.shape[0] - self._pos)
            parts.append(self._buf[self._pos : self._pos + j])
            self._pos += j
            k -= j
        return parts[0] if len(parts) == 1 else np.concatenate(parts)


def _advance(states, xi, cfg, basis, step0, stream):
    xi = np.ascontiguousarray(xi)
    for u in states:
        if cfg.scheme == "backward_euler":
            status, failed, _, res = kernels.advance_backward_euler(
                u, xi, basis, cfg.dt, cfg.newton_tol, cfg.newton_max_iter
            )
        else:
            status, failed, _, res = kernels.advance_explicit(u, xi, basis, cfg.dt, cfg.n_modes < cfg.m)
        if status != kernels.STATUS_OK:
            step = step0 + failed
            kind = "non-finite state" if status == kernels.STATUS_NONFINITE else "Newton solve failed"
            raise BlowUpError(
                f"{kind} (residual={res:.3e})",
                step=step,
                time=(step + 1) * cfg.dt,
                seed=stream.seed,
                stream_id=stream.stream_id,
            )


def _as_state(u0, cfg):
    u = np.array(u0, dtype=float)
    if u.shape != (cfg.m,):
        raise DimensionError(f"initial condition has shape {u.shape}, grid needs ({cfg.m},)")
    return u


def run_synchronized(initials, cfg: SimConfig, on_record=None, stream_id: int = 0):
    """Advance several states with one shared noise path.

    ``on_record(k, t, states)`` is called at ``t = 0`` and every
    ``observable_stride`` steps.  Returns the final states.
    """
    cfg.validate()
    stream = RngStream(cfg.seed, stream_id)
    states = [_as_state(u, cfg) for u in initials]
    basis = np.ascontiguousarray(basis_matrix(cfg.m, cfg.n_modes))
    driver = NoiseDriver(cfg, stream)
    total = cfg.n_steps
    stride = cfg.observable_stride
    if on_record is not None:
        on_record(0, 0.0, states)
    done, k = 0, 0
    while done < total:
        j = min(stride, total - done)
        _advance(states, driver.take(j), cfg, basis, done, stream)
        done += j
        if j == stride:
            k += 1
            if on_record is not None:
                on_record(k, k * cfg.record_dt, states)
    return states


@dataclass
class Trajectory:
    times: np.ndarray
    final_state: np.ndarray
    series: dict = field(default_factory=dict)
    states: list | None = None


def simulate(u0, cfg: SimConfig, observers=(), keep_states: bool = False, stream_id: int = 0):
    """Integrate from ``u0`` to ``cfg.t_end`` and stream observables.

    ``observers`` is a sequence of functional tags or a mapping from column
    name to a callable of the state.
    """
    from .functionals import resolve_observers

    funcs = resolve_observers(observers)
    times = []
    values = {name: [] for name in funcs}
    snaps = [] if keep_states else None

    def record(k, t, states):
        u = states[0]
        times.append(t)
        for name, f in funcs.items():
            values[name].append(float(f(u)))
        if snaps is not None:
            snaps.append(u.copy())

    (final,) = run_synchronized([u0], cfg, record, stream_id)
    return Trajectory(
        times=np.asarray(times),
        final_state=final,
        series={k: np.asarray(v) for k, v in values.items()},
        states=snaps,
    )


def _single_step(u, cfg, rng, scheme):
    cfg = cfg.with_(scheme=scheme).validate()
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if cfg.noise.is_zero:
        xi = np.zeros((1, cfg.n_modes))
    else:
        xi = gen.standard_normal((1, cfg.n_modes)) * (cfg.noise.sigma * np.sqrt(cfg.dt))
    out = _as_state(u, cfg)
    basis = np.ascontiguousarray(basis_matrix(cfg.m, cfg.n_modes))
    try:
        _advance([out], xi, cfg, basis, 0, rng if isinstance(rng, RngStream) else RngStream(-1))
    except BlowUpError as exc:
        if scheme == "backward_euler" and "Newton" in str(exc):
            raise SolverError("backward Euler step did not converge") from exc
        raise
    return out


def step_explicit(u, cfg: SimConfig, rng) -> np.ndarray:
    """One Euler-Maruyama step; ``rng`` is a RngStream or numpy Generator."""
    return _single_step(u, cfg, rng, "explicit")


def step_backward_euler(u, cfg: SimConfig, rng) -> np.ndarray:
    """One implicit step ``J_dt(u + dW)``."""
    return _single_step(u, cfg, rng, "backward_euler")
