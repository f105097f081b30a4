"""Fields on (0, 1) with homogeneous Dirichlet conditions.

A grid field is stored as the vector of its ``m`` interior values; the
boundary values ``u_0 = u_{m+1} = 0`` are implicit.  All operators act on
the last axis, so stacks of fields (shape ``(..., m)``) are handled in one
call.

Slopes live on the ``m + 1`` cell edges (backward differences including
both boundary edges); divergences map edge vectors back to the nodes.
With this staggering the summation-by-parts identity

    sum_j (D^- u)_j (D^- v)_j h = -<Delta_h u, v>_h

holds exactly, which is what makes the discrete drift exactly monotone.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import DimensionError


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``m`` interior nodes ``x_i = i h``, ``h = 1/(m+1)``."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise DimensionError(f"grid needs m >= 2 interior points, got {self.m}")

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.m + 1) * self.h

    @property
    def edges(self) -> np.ndarray:
        """Midpoints of the ``m + 1`` cells, where slopes are located."""
        return (np.arange(self.m + 1) + 0.5) * self.h

    @classmethod
    def of(cls, u) -> "Grid":
        return cls(np.shape(u)[-1])

    def basis(self, k: int) -> np.ndarray:
        """Samples of ``e_k(x) = sqrt(2) sin(k pi x)``."""
        return np.sqrt(2.0) * np.sin(k * np.pi * self.nodes)

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func`` at the interior nodes."""
        return np.asarray(func(self.nodes), dtype=float)


def eigenvalue(k):
    """Eigenvalue ``(k pi)^2`` of ``-Delta`` for the mode ``e_k``."""
    return (np.asarray(k, dtype=float) * np.pi) ** 2


@lru_cache(maxsize=32)
def _basis_matrix(m: int, n: int) -> np.ndarray:
    k = np.arange(1, n + 1)[:, None]
    i = np.arange(1, m + 1)[None, :]
    out = np.sqrt(2.0) * np.sin(np.pi * k * i / (m + 1))
    out.setflags(write=False)
    return out


def basis_matrix(m: int, n: int) -> np.ndarray:
    """Read-only ``(n, m)`` matrix with rows ``e_k`` sampled on the grid."""
    if n > m:
        raise DimensionError(f"mode cutoff n={n} exceeds grid size m={m}")
    return _basis_matrix(int(m), int(n))


def _is_fast_size(m: int) -> bool:
    p = m + 1
    return p & (p - 1) == 0


def analyze(u, n: int, fast: bool | None = None) -> np.ndarray:
    """Coefficients ``a_k = <u, e_k>_h`` for ``k = 1..n``.

    Uses a type-I discrete sine transform when ``m + 1`` is a power of two
    (or when ``fast`` is forced), direct summation otherwise.  On the grid
    the sampled ``e_k`` are exactly orthonormal for the weight ``h``, so this
    is the discrete orthogonal projection onto ``span{e_1..e_n}``.
    """
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    if n > m:
        raise DimensionError(f"mode cutoff n={n} exceeds grid size m={m}")
    h = 1.0 / (m + 1)
    if fast is None:
        fast = _is_fast_size(m)
    if fast:
        full = scipy.fft.dst(u, type=1, axis=-1)
        return (h / np.sqrt(2.0)) * full[..., :n]
    return h * (u @ basis_matrix(m, n).T)


def synthesize(a, m: int) -> np.ndarray:
    """Grid values ``sum_k a_k e_k(x_i)`` of a coefficient vector."""
    a = np.asarray(a, dtype=float)
    if isinstance(m, Grid):
        m = m.m
    n = a.shape[-1]
    if n > m:
        raise DimensionError(f"mode cutoff n={n} exceeds grid size m={m}")
    return a @ basis_matrix(m, n)


def project(u, n: int) -> np.ndarray:
    """Discrete ``P_n``: keep only the first ``n`` sine modes."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    if n == m:
        return u.copy()
    return synthesize(analyze(u, n), m)


def _pad(u):
    u = np.asarray(u, dtype=float)
    zeros = np.zeros(u.shape[:-1] + (1,))
    return np.concatenate([zeros, u, zeros], axis=-1)


def backward_difference(u) -> np.ndarray:
    """Edge slopes ``(u_i - u_{i-1}) / h`` for ``i = 1..m+1`` (length ``m + 1``)."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    return np.diff(_pad(u), axis=-1) * (m + 1)


def divergence(edge) -> np.ndarray:
    """Map an edge vector (length ``m + 1``) to nodes: ``(g_{i+1} - g_i) / h``."""
    edge = np.asarray(edge, dtype=float)
    m = edge.shape[-1] - 1
    return np.diff(edge, axis=-1) * (m + 1)


def laplacian(u) -> np.ndarray:
    """Standard second difference with zero Dirichlet values."""
    return divergence(backward_difference(u))


def inner_H(u, v) -> np.ndarray:
    """Discrete L2 inner product ``sum u_i v_i h``."""
    u = np.asarray(u, dtype=float)
    return np.sum(u * v, axis=-1) / (u.shape[-1] + 1)


def norm_H(u) -> np.ndarray:
    return np.sqrt(inner_H(u, u))


def norm_E(u) -> np.ndarray:
    """Discrete H^1_0 norm ``(sum_j (D^- u)_j^2 h)^(1/2)``."""
    u = np.asarray(u, dtype=float)
    s = backward_difference(u)
    return np.sqrt(np.sum(s * s, axis=-1) / (u.shape[-1] + 1))


def check_same_grid(u, v):
    if np.shape(u)[-1] != np.shape(v)[-1]:
        raise DimensionError(
            f"fields live on different grids (m={np.shape(u)[-1]} vs m={np.shape(v)[-1]})"
        )


def random_field(m: int, rng, n_modes: int = 16, decay: float = 2.0, scale: float = 1.0, size=None):
    """Band-limited random field ``scale * sum_k g_k k^-decay e_k`` with Gaussian ``g_k``.

    ``rng`` is a numpy Generator; ``size`` adds leading batch dimensions.
    """
    n = min(n_modes, m)
    shape = (n,) if size is None else tuple(np.atleast_1d(size)) + (n,)
    k = np.arange(1, n + 1, dtype=float)
    return synthesize(scale * rng.standard_normal(shape) * k**-decay, m)
