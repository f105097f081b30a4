# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: damped Newton resolvent solve and time stepping.

Signatures and semantics mirror ``_kernels_py``; both modules are
interchangeable behind ``scsf.kernels``.  Every loop runs without the GIL.
"""

from libc.math cimport atan, sqrt, isfinite
from libc.stdlib cimport malloc, free

import numpy as np

cdef double ARMIJO = 1e-4
cdef double MIN_STEP = 1e-12
# residual accepted when the line search stalls at rounding level
cdef double STALL_ACCEPT = 1e-10

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_NONFINITE = 2


cdef double _residual(const double* w, const double* rhs, Py_ssize_t m, double alpha,
                      double inv_h, double* s, double* F) noexcept nogil:
    """Fill edge slopes ``s`` and ``F = w - alpha A_h(w) - rhs``; return ``|F|_H``."""
    cdef Py_ssize_t i
    cdef double g, g_prev, wn, acc = 0.0
    s[0] = w[0] * inv_h
    g_prev = atan(s[0])
    for i in range(m):
        wn = w[i + 1] if i + 1 < m else 0.0
        s[i + 1] = (wn - w[i]) * inv_h
        g = atan(s[i + 1])
        F[i] = w[i] - alpha * ((g - g_prev) * inv_h) - rhs[i]
        acc += F[i] * F[i]
        g_prev = g
    return sqrt(acc / (m + 1))


cdef void _newton_direction(const double* s, const double* F, Py_ssize_t m, double alpha,
                            double inv_h, double* c, double* cp, double* d) noexcept nogil:
    """Solve ``J d = -F`` with the SPD tridiagonal Jacobian ``I - alpha D+ diag(1/(1+s^2)) D-``."""
    cdef Py_ssize_t i
    cdef double scale = alpha * inv_h * inv_h
    cdef double diag, denom
    for i in range(m + 1):
        c[i] = scale / (1.0 + s[i] * s[i])
    diag = 1.0 + c[0] + c[1]
    cp[0] = -c[1] / diag
    d[0] = -F[0] / diag
    for i in range(1, m):
        denom = 1.0 + c[i] + c[i + 1] + c[i] * cp[i - 1]
        cp[i] = -c[i + 1] / denom
        d[i] = (-F[i] + c[i] * d[i - 1]) / denom
    for i in range(m - 2, -1, -1):
        d[i] = d[i] - cp[i] * d[i + 1]


cdef int _newton(const double* rhs, double* w, Py_ssize_t m, double alpha, double tol,
                 int max_iter, double* work, int* iters_out, double* res_out) noexcept nogil:
    """Damped Newton for ``w - alpha A_h(w) = rhs``; ``w`` holds the initial guess."""
    cdef double inv_h = <double>(m + 1)
    cdef double* s = work
    cdef double* F = work + (m + 1)
    cdef double* s2 = F + m
    cdef double* F2 = s2 + (m + 1)
    cdef double* c = F2 + m
    cdef double* cp = c + (m + 1)
    cdef double* d = cp + m
    cdef double* wt = d + m
    cdef double* tmp
    cdef double res, res_t, lam
    cdef Py_ssize_t i
    cdef int it = 0

    res = _residual(w, rhs, m, alpha, inv_h, s, F)
    while True:
        if not isfinite(res):
            iters_out[0] = it
            res_out[0] = res
            return 2
        if res <= tol:
            break
        if it >= max_iter:
            iters_out[0] = it
            res_out[0] = res
            return 1
        it += 1
        _newton_direction(s, F, m, alpha, inv_h, c, cp, d)
        lam = 1.0
        while True:
            for i in range(m):
                wt[i] = w[i] + lam * d[i]
            res_t = _residual(wt, rhs, m, alpha, inv_h, s2, F2)
            if res_t <= (1.0 - ARMIJO * lam) * res:
                break
            lam *= 0.5
            if lam < MIN_STEP:
                break
        if lam < MIN_STEP:
            iters_out[0] = it
            res_out[0] = res
            return 0 if res <= STALL_ACCEPT else 1
        for i in range(m):
            w[i] = wt[i]
        tmp = s; s = s2; s2 = tmp
        tmp = F; F = F2; F2 = tmp
        res = res_t
    iters_out[0] = it
    res_out[0] = res
    return 0


cdef inline Py_ssize_t _work_size(Py_ssize_t m):
    return 8 * (m + 1)


def resolvent_solve(const double[::1] rhs, double alpha, double[::1] w, double tol=1e-12,
                    int max_iter=100):
    """Solve ``w - alpha A_h(w) = rhs`` in place; return ``(status, iterations, residual)``."""
    cdef Py_ssize_t m = rhs.shape[0]
    cdef int status, iters = 0
    cdef double res = 0.0
    cdef double* work
    if w.shape[0] != m:
        raise ValueError("shape mismatch")
    work = <double*>malloc(_work_size(m) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    try:
        with nogil:
            status = _newton(&rhs[0], &w[0], m, alpha, tol, max_iter, work, &iters, &res)
    finally:
        free(work)
    return status, iters, res


cdef inline void _synthesize_row(const double[:, ::1] xi, Py_ssize_t j, const double[:, ::1] basis,
                                 Py_ssize_t n, Py_ssize_t m, double* out) noexcept nogil:
    cdef Py_ssize_t k, i
    cdef double a
    for i in range(m):
        out[i] = 0.0
    for k in range(n):
        a = xi[j, k]
        if a != 0.0:
            for i in range(m):
                out[i] += a * basis[k, i]


def advance_backward_euler(double[::1] u, const double[:, ::1] xi, const double[:, ::1] basis,
                           double dt, double tol=1e-12, int max_iter=100):
    """Advance ``u`` in place by ``xi.shape[0]`` implicit steps ``u <- J_dt(u + noise)``.

    ``xi[j]`` holds the sine coefficients of step ``j``'s noise increment.
    Returns ``(status, failed_step, total_newton_iterations, max_residual)``;
    ``failed_step`` is -1 on success.
    """
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = xi.shape[1]
    cdef Py_ssize_t steps = xi.shape[0]
    cdef Py_ssize_t j, i
    cdef int status = 0, iters = 0
    cdef long total = 0
    cdef double res = 0.0, max_res = 0.0
    cdef Py_ssize_t failed = -1
    cdef double* work
    cdef double* rhs
    if basis.shape[0] < n or basis.shape[1] != m:
        raise ValueError("basis shape mismatch")
    work = <double*>malloc((_work_size(m) + m) * sizeof(double))
    if work == NULL:
        raise MemoryError()
    rhs = work + _work_size(m)
    try:
        with nogil:
            for j in range(steps):
                _synthesize_row(xi, j, basis, n, m, rhs)
                for i in range(m):
                    rhs[i] += u[i]
                    u[i] = rhs[i]
                status = _newton(rhs, &u[0], m, dt, tol, max_iter, work, &iters, &res)
                total += iters
                if res > max_res:
                    max_res = res
                if status != 0:
                    failed = j
                    break
    finally:
        free(work)
    return status, failed, total, max_res


def advance_explicit(double[::1] u, const double[:, ::1] xi, const double[:, ::1] basis,
                     double dt, bint project):
    """Advance ``u`` in place by explicit Euler-Maruyama steps.

    The drift is projected onto the first ``basis.shape[0]`` modes when
    ``project`` is set.  Returns ``(status, failed_step, 0, 0.0)``.
    """
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = xi.shape[1]
    cdef Py_ssize_t nb = basis.shape[0]
    cdef Py_ssize_t steps = xi.shape[0]
    cdef Py_ssize_t j, i, k
    cdef double inv_h = <double>(m + 1)
    cdef double h = 1.0 / (m + 1)
    cdef double g, g_prev, s, un, acc, check
    cdef Py_ssize_t failed = -1
    cdef int status = 0
    cdef double* buf
    cdef double* drift
    cdef double* inc
    cdef double* coef
    if basis.shape[1] != m or nb < n:
        raise ValueError("basis shape mismatch")
    buf = <double*>malloc((2 * m + nb) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    drift = buf
    inc = buf + m
    coef = inc + m
    try:
        with nogil:
            for j in range(steps):
                g_prev = atan(u[0] * inv_h)
                for i in range(m):
                    un = u[i + 1] if i + 1 < m else 0.0
                    g = atan((un - u[i]) * inv_h)
                    drift[i] = (g - g_prev) * inv_h
                    g_prev = g
                if project:
                    for k in range(nb):
                        acc = 0.0
                        for i in range(m):
                            acc += basis[k, i] * drift[i]
                        coef[k] = acc * h
                    for i in range(m):
                        drift[i] = 0.0
                    for k in range(nb):
                        for i in range(m):
                            drift[i] += coef[k] * basis[k, i]
                _synthesize_row(xi, j, basis, n, m, inc)
                check = 0.0
                for i in range(m):
                    u[i] = u[i] + dt * drift[i] + inc[i]
                    check += u[i]
                if not isfinite(check):
                    status = 2
                    failed = j
                    break
    finally:
        free(buf)
    return status, failed, 0, 0.0
