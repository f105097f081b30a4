"""Additive noise: a diagonal Hilbert-Schmidt operator in the sine basis.

``Sigma e_k = sigma_k e_k`` for ``k <= n`` and zero beyond the cutoff, so
the covariance ``Q = Sigma Sigma^*`` has eigenvalues ``sigma_k^2``.  Random
draws come from counter-based Philox substreams keyed by
``(seed, stream_id)``; a trajectory owns its stream, so results never
depend on how trajectories are scheduled across workers.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .spectral import eigenvalue

FAMILIES = ("power_law", "finite_band", "custom")


@dataclass(frozen=True)
class NoiseSpec:
    """Diagonal noise amplitudes ``sigma_k``, ``k = 1..n``.

    Use the :meth:`power_law`, :meth:`finite_band` and :meth:`custom`
    constructors; ``params`` records the family parameters for
    serialization.
    """

    sigma: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=float).reshape(-1)
        if sigma.size < 1:
            raise ValidationError("noise needs at least one mode")
        if not np.all(np.isfinite(sigma)) or np.any(sigma < 0):
            raise ValidationError("noise amplitudes must be finite and >= 0")
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown noise family {self.family!r}")
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def power_law(cls, c: float, gamma: float, n: int) -> "NoiseSpec":
        """``sigma_k = c k^-gamma``; requires ``gamma > 3/2``.

        The E-valued Hilbert-Schmidt norm ``sum sigma_k^2 (k pi)^2`` is
        finite in the limit ``n -> inf`` only for ``gamma > 3/2``.
        """
        if not gamma > 1.5:
            raise ValidationError(
                f"power_law decay gamma={gamma} violates the Hilbert-Schmidt "
                "condition into H^1_0 (requires gamma > 3/2)"
            )
        if c < 0:
            raise ValidationError(f"power_law amplitude c={c} must be >= 0")
        k = np.arange(1, n + 1, dtype=float)
        return cls(c * k**-gamma, "power_law", {"c": float(c), "gamma": float(gamma)})

    @classmethod
    def finite_band(cls, c: float, K: int, n: int) -> "NoiseSpec":
        if c < 0 or K < 0:
            raise ValidationError("finite_band needs c >= 0 and K >= 0")
        k = np.arange(1, n + 1)
        return cls(np.where(k <= K, float(c), 0.0), "finite_band", {"c": float(c), "K": int(K)})

    @classmethod
    def custom(cls, sigma) -> "NoiseSpec":
        return cls(np.asarray(sigma, dtype=float), "custom", {})

    @classmethod
    def zero(cls, n: int) -> "NoiseSpec":
        return cls.custom(np.zeros(n))

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "NoiseSpec":
        family = d.get("family", "power_law")
        if family == "power_law":
            return cls.power_law(float(d["c"]), float(d["gamma"]), n)
        if family == "finite_band":
            return cls.finite_band(float(d["c"]), int(d["K"]), n)
        if family == "custom":
            sigma = np.asarray(d["sigma"], dtype=float)
            if sigma.size != n:
                raise ValidationError(f"custom sigma has {sigma.size} entries, expected n={n}")
            return cls.custom(sigma)
        raise ValidationError(f"unknown noise family {family!r}")

    def to_dict(self) -> dict:
        if self.family == "custom":
            return {"family": "custom", "sigma": [float(s) for s in self.sigma]}
        return {"family": self.family, **self.params}

    @property
    def n(self) -> int:
        return self.sigma.size

    @property
    def is_zero(self) -> bool:
        return not np.any(self.sigma)

    def covariance(self) -> np.ndarray:
        """Eigenvalues of ``Q = Sigma Sigma^*``."""
        return self.sigma**2

    def tail_bound(self) -> float:
        """Upper bound on ``sum_{k>n} sigma_k^2 (k pi)^2`` for the untruncated family."""
        if self.family == "power_law":
            c, g, n = self.params["c"], self.params["gamma"], self.n
            return c * c * np.pi**2 * n ** (3.0 - 2.0 * g) / (2.0 * g - 3.0)
        return 0.0

    def __eq__(self, other):
        return (
            isinstance(other, NoiseSpec)
            and self.family == other.family
            and np.array_equal(self.sigma, other.sigma)
        )

    def __hash__(self):
        return hash((self.family, self.sigma.tobytes()))


def hs_norm_E(spec: NoiseSpec) -> float:
    """Squared Hilbert-Schmidt norm ``sum_k sigma_k^2 (k pi)^2`` into ``H^1_0``."""
    k = np.arange(1, spec.n + 1)
    return float(np.sum(spec.sigma**2 * eigenvalue(k)))


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def sample_increment(spec: NoiseSpec, dt: float, rng, size=None) -> np.ndarray:
    """Sine coefficients of ``Sigma (W_{t+dt} - W_t)``: ``N(0, sigma_k^2 dt)``.

    ``rng`` is a :class:`RngStream` (a fresh generator is created) or an
    existing ``numpy.random.Generator`` whose state advances.
    """
    if not dt > 0:
        raise ValidationError(f"time step must be positive, got {dt}")
    if isinstance(rng, RngStream):
        rng = rng.generator()
    shape = (spec.n,) if size is None else tuple(np.atleast_1d(size)) + (spec.n,)
    return rng.standard_normal(shape) * (spec.sigma * np.sqrt(dt))


def mollifier_covariance(beta: float, n: int) -> np.ndarray:
    """Eigenvalues ``(1 - exp(-2 beta (k pi)^2)) / (2 (k pi)^2)`` of ``int_0^beta e^{2 s Delta} ds``."""
    if not beta > 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    lam = eigenvalue(np.arange(1, n + 1))
    return -np.expm1(-2.0 * beta * lam) / (2.0 * lam)


def heat_semigroup(a, beta: float) -> np.ndarray:
    """``e^{beta Delta}`` on sine coefficients: ``a_k -> exp(-beta (k pi)^2) a_k``."""
    if beta < 0:
        raise ValidationError(f"beta must be >= 0, got {beta}")
    a = np.asarray(a, dtype=float)
    return a * np.exp(-beta * eigenvalue(np.arange(1, a.shape[-1] + 1)))
