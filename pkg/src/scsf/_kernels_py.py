"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same algorithms, same signatures, same in-place conventions; used when the
extension is not built or ``SCSF_PURE_PYTHON=1`` is set.  Roughly an order
of magnitude slower per time step (see ``benchmarks/bench_kernels.py``).
"""

import numpy as np
from scipy.linalg import solve_banded

ARMIJO = 1e-4
MIN_STEP = 1e-12
STALL_ACCEPT = 1e-10

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_NONFINITE = 2


def _residual(w, rhs, alpha, inv_h):
    s = np.diff(w, prepend=0.0, append=0.0) * inv_h
    F = w - alpha * (np.diff(np.arctan(s)) * inv_h) - rhs
    return s, F, np.sqrt(np.dot(F, F) / (w.size + 1))


def _direction(s, F, alpha, inv_h):
    c = alpha * inv_h * inv_h / (1.0 + s * s)
    m = F.size
    ab = np.empty((3, m))
    ab[0, 1:] = -c[1:m]
    ab[1] = 1.0 + c[:-1] + c[1:]
    ab[2, :-1] = -c[1:m]
    return solve_banded((1, 1), ab, -F, check_finite=False)


def _newton(rhs, w, alpha, tol, max_iter):
    inv_h = float(w.size + 1)
    s, F, res = _residual(w, rhs, alpha, inv_h)
    it = 0
    while True:
        if not np.isfinite(res):
            return STATUS_NONFINITE, it, res
        if res <= tol:
            return STATUS_OK, it, res
        if it >= max_iter:
            return STATUS_NO_CONVERGENCE, it, res
        it += 1
        d = _direction(s, F, alpha, inv_h)
        lam = 1.0
        while True:
            wt = w + lam * d
            s_t, F_t, res_t = _residual(wt, rhs, alpha, inv_h)
            if res_t <= (1.0 - ARMIJO * lam) * res:
                break
            lam *= 0.5
            if lam < MIN_STEP:
                return (STATUS_OK if res <= STALL_ACCEPT else STATUS_NO_CONVERGENCE), it, res
        w[:] = wt
        s, F, res = s_t, F_t, res_t


def resolvent_solve(rhs, alpha, w, tol=1e-12, max_iter=100):
    if w.shape[0] != rhs.shape[0]:
        raise ValueError("shape mismatch")
    return _newton(np.asarray(rhs, dtype=float), w, float(alpha), tol, max_iter)


def advance_backward_euler(u, xi, basis, dt, tol=1e-12, max_iter=100):
    n = xi.shape[1]
    if basis.shape[0] < n or basis.shape[1] != u.shape[0]:
        raise ValueError("basis shape mismatch")
    incs = xi @ basis[:n]
    total, max_res = 0, 0.0
    for j in range(xi.shape[0]):
        rhs = u + incs[j]
        u[:] = rhs
        status, it, res = _newton(rhs, u, dt, tol, max_iter)
        total += it
        max_res = max(max_res, res)
        if status != STATUS_OK:
            return status, j, total, max_res
    return STATUS_OK, -1, total, max_res


def advance_explicit(u, xi, basis, dt, project):
    m = u.shape[0]
    n = xi.shape[1]
    if basis.shape[1] != m or basis.shape[0] < n:
        raise ValueError("basis shape mismatch")
    inv_h = float(m + 1)
    incs = xi @ basis[:n]
    for j in range(xi.shape[0]):
        drift = np.diff(np.arctan(np.diff(u, prepend=0.0, append=0.0) * inv_h)) * inv_h
        if project:
            drift = ((basis @ drift) / inv_h) @ basis
        u += dt * drift + incs[j]
        if not np.isfinite(u.sum()):
            return STATUS_NONFINITE, j, 0, 0.0
    return STATUS_OK, -1, 0, 0.0
