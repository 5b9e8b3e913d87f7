# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: block-tridiagonal LU and the fused IMEX stepper."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite, NAN

cnp.import_array()

DEF MAXD = 4

BACKEND = "compiled"


cdef int _small_lu(double[:, ::1] a, int d, int[::1] piv) noexcept nogil:
    """In-place partial-pivot LU of a d x d block; returns nonzero if singular."""
    cdef int i, j, k, p
    cdef double m, t
    for k in range(d):
        p = k
        m = fabs(a[k, k])
        for i in range(k + 1, d):
            if fabs(a[i, k]) > m:
                m = fabs(a[i, k])
                p = i
        piv[k] = p
        if m == 0.0:
            return 1
        if p != k:
            for j in range(d):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
        for i in range(k + 1, d):
            a[i, k] /= a[k, k]
            for j in range(k + 1, d):
                a[i, j] -= a[i, k] * a[k, j]
    return 0


cdef void _small_solve(const double* lu, const int* piv, int d, double* b) noexcept nogil:
    """Solve with a row-major d x d LU block produced by :func:`_small_lu`."""
    cdef int i, j, p
    cdef double t
    for i in range(d):
        p = piv[i]
        if p != i:
            t = b[i]
            b[i] = b[p]
            b[p] = t
    for i in range(d):
        for j in range(i):
            b[i] -= lu[i * d + j] * b[j]
    for i in range(d - 1, -1, -1):
        for j in range(i + 1, d):
            b[i] -= lu[i * d + j] * b[j]
        b[i] /= lu[i * d + i]


def block_tridiag_factor(diag, lower, upper):
    """Factor the block-tridiagonal matrix with diagonal blocks ``diag[i]``,
    sub-diagonal ``lower[i]`` (row i+1, col i) and super-diagonal
    ``upper[i]`` (row i, col i+1).

    Returns an opaque tuple for :func:`block_tridiag_solve`.
    """
    cdef double[:, :, ::1] dg = np.array(diag, dtype=np.float64, order="C")
    cdef double[:, :, ::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[:, :, ::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef Py_ssize_t n = dg.shape[0]
    cdef int d = dg.shape[1]
    if d > MAXD:
        raise ValueError("block size above compiled limit")
    piv_arr = np.zeros((n, d), dtype=np.intc)
    cdef int[:, ::1] piv = piv_arr
    # inverse of each eliminated diagonal block; the solve then needs only
    # multiply-adds along its sequential dependency chain
    inv_arr = np.zeros((n, d, d))
    cdef double[:, :, ::1] inv = inv_arr
    # w[i] = inv[i] @ upper[i]
    w_arr = np.zeros((max(n - 1, 0), d, d))
    cdef double[:, :, ::1] w = w_arr
    cdef double col[MAXD]
    cdef Py_ssize_t i
    cdef int a, b, k
    for i in range(n):
        if i > 0:
            for a in range(d):
                for b in range(d):
                    for k in range(d):
                        dg[i, a, b] -= lo[i - 1, a, k] * w[i - 1, k, b]
        if _small_lu(dg[i], d, piv[i]):
            raise np.linalg.LinAlgError("singular diagonal block")
        for b in range(d):
            for a in range(d):
                col[a] = 1.0 if a == b else 0.0
            _small_solve(&dg[i, 0, 0], &piv[i, 0], d, col)
            for a in range(d):
                inv[i, a, b] = col[a]
        if i < n - 1:
            for a in range(d):
                for b in range(d):
                    w[i, a, b] = 0.0
                    for k in range(d):
                        w[i, a, b] += inv[i, a, k] * up[i, k, b]
    return (inv_arr, w_arr, np.asarray(lo))


cdef void _solve_inplace(double[:, :, ::1] inv, double[:, :, ::1] w,
                         double[:, :, ::1] lo, double[:, ::1] x) noexcept nogil:
    cdef Py_ssize_t n = inv.shape[0], i
    cdef int d = inv.shape[1], a, k
    cdef double* xp = &x[0, 0]
    cdef const double* ip = &inv[0, 0, 0]
    cdef const double* lop = &lo[0, 0, 0] if n > 1 else NULL
    cdef const double* wp = &w[0, 0, 0] if n > 1 else NULL
    cdef int dd = d * d
    cdef double t[MAXD]
    cdef double x0, x1, t0, t1
    if d == 2:
        # unrolled path for the common two-species case
        x0 = 0.0
        x1 = 0.0
        for i in range(n):
            t0 = xp[2 * i]
            t1 = xp[2 * i + 1]
            if i > 0:
                t0 -= lop[4 * i - 4] * x0 + lop[4 * i - 3] * x1
                t1 -= lop[4 * i - 2] * x0 + lop[4 * i - 1] * x1
            x0 = ip[4 * i] * t0 + ip[4 * i + 1] * t1
            x1 = ip[4 * i + 2] * t0 + ip[4 * i + 3] * t1
            xp[2 * i] = x0
            xp[2 * i + 1] = x1
        for i in range(n - 2, -1, -1):
            xp[2 * i] -= wp[4 * i] * x0 + wp[4 * i + 1] * x1
            xp[2 * i + 1] -= wp[4 * i + 2] * x0 + wp[4 * i + 3] * x1
            x0 = xp[2 * i]
            x1 = xp[2 * i + 1]
        return
    if d == 1:
        x0 = 0.0
        for i in range(n):
            t0 = xp[i]
            if i > 0:
                t0 -= lop[i - 1] * x0
            x0 = ip[i] * t0
            xp[i] = x0
        for i in range(n - 2, -1, -1):
            xp[i] -= wp[i] * x0
            x0 = xp[i]
        return
    for i in range(n):
        for a in range(d):
            t[a] = xp[i * d + a]
            if i > 0:
                for k in range(d):
                    t[a] -= lop[(i - 1) * dd + a * d + k] * xp[(i - 1) * d + k]
        for a in range(d):
            xp[i * d + a] = 0.0
            for k in range(d):
                xp[i * d + a] += ip[i * dd + a * d + k] * t[k]
    for i in range(n - 2, -1, -1):
        for a in range(d):
            for k in range(d):
                xp[i * d + a] -= wp[i * dd + a * d + k] * xp[(i + 1) * d + k]


def block_tridiag_solve(factor, rhs):
    """Solve with a factor from :func:`block_tridiag_factor`; ``rhs`` is
    ``(n, d)`` and is not modified."""
    inv, w, lo = factor
    x_arr = np.array(rhs, dtype=np.float64, order="C")
    _solve_inplace(inv, w, lo, x_arr)
    return x_arr


cdef inline void _reaction(int code, double* p, double* u, double* f) noexcept nogil:
    cdef double u1, u2, s, b, r2
    if code == 1:
        u1 = u[0]
        f[0] = u1 * (1.0 - u1) * (u1 - p[0])
    elif code == 2:
        u1 = u[0]
        u2 = u[1]
        s = 1.0 - u1 - u2
        f[0] = u1 * (s - p[0] * u2 * (u2 - u1))
        f[1] = u2 * (s - p[0] * u1 * (u1 - u2))
    elif code == 3:
        u1 = u[0]
        u2 = u[1]
        b = 1.0 + p[0]
        f[0] = u1 * (1.0 - u1 - b * u2)
        f[1] = u2 * (1.0 - u2 - b * u1)
    elif code == 4:
        u1 = u[0]
        u2 = u[1]
        r2 = u1 * u1 + u2 * u2
        f[0] = u1 - r2 * u1 + p[0] * (u1 - p[1] * u2)
        f[1] = u2 - r2 * u2 + p[0] * (p[1] * u1 - u2)


cdef double _crossing(double[:, ::1] u, double[::1] wt, double off, double[::1] x) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0], i
    cdef int d = u.shape[1], a
    cdef double g0 = off, g1
    for a in range(d):
        g0 += wt[a] * u[0, a]
    for i in range(n - 1):
        g1 = off
        for a in range(d):
            g1 += wt[a] * u[i + 1, a]
        if g0 == 0.0:
            return x[i]
        if (g0 < 0.0) != (g1 < 0.0):
            return x[i] + (x[i + 1] - x[i]) * g0 / (g0 - g1)
        g0 = g1
    return NAN


def level_crossing(u, weights, offset, x):
    """First zero of ``u @ weights + offset`` by linear interpolation."""
    cdef double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    return _crossing(uu, np.ascontiguousarray(weights, dtype=np.float64), offset,
                     np.ascontiguousarray(x, dtype=np.float64))


def imex_advance(u0, Py_ssize_t steps, double dt, double h, Deff, int code, kparams,
                 Py_ssize_t record_every, weights, double offset, reaction=None,
                 double bound=10.0):
    """Advance ``u_t = F(u) + Deff u_xx`` by ``steps`` IMEX Euler steps.

    Diffusion is implicit with the three-point Laplacian, reaction explicit;
    both end rows stay fixed.  Every ``record_every`` steps the zero of
    ``u @ weights + offset`` is recorded.

    Returns ``(u, record_steps, positions, status, failed_step)`` with
    ``status`` 0 on success and 1 on blow-up; the bound is checked at each
    record step and at the end.
    """
    if code == 0:
        from . import _kernels_py
        return _kernels_py.imex_advance(u0, steps, dt, h, Deff, code, kparams, record_every,
                                        weights, offset, reaction=reaction, bound=bound)
    u_arr = np.array(u0, dtype=np.float64, order="C")
    cdef double[:, ::1] u = u_arr
    cdef Py_ssize_t n = u.shape[0]
    cdef int d = u.shape[1]
    cdef Py_ssize_t m = n - 2, i, step
    cdef int a, k
    De = np.ascontiguousarray(Deff, dtype=np.float64).reshape(d, d)
    cdef double[:, ::1] Dm = De
    cdef double r = dt / (h * h)
    eye = np.eye(d)
    factor = block_tridiag_factor(
        np.broadcast_to(eye + 2.0 * r * De, (m, d, d)),
        np.broadcast_to(-r * De, (m - 1, d, d)),
        np.broadcast_to(-r * De, (m - 1, d, d)),
    )
    cdef double[:, :, ::1] inv = factor[0]
    cdef double[:, :, ::1] w = factor[1]
    cdef double[:, :, ::1] lo = factor[2]
    cdef double[::1] p = np.ascontiguousarray(kparams, dtype=np.float64)
    cdef double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    xs = h * (np.arange(n) - (n - 1) // 2)
    cdef double[::1] xv = xs
    rhs_arr = np.zeros((m, d))
    cdef double[:, ::1] rhs = rhs_arr
    cdef double bleft[MAXD]
    cdef double bright[MAXD]
    cdef double f[MAXD]
    for a in range(d):
        bleft[a] = 0.0
        bright[a] = 0.0
        for k in range(d):
            bleft[a] += r * Dm[a, k] * u[0, k]
            bright[a] += r * Dm[a, k] * u[n - 1, k]
    nrec = steps // record_every if record_every > 0 else 0
    rec_steps = np.zeros(nrec, dtype=np.int64)
    rec_pos = np.full(nrec, np.nan)
    cdef long long[::1] rs = rec_steps
    cdef double[::1] rp = rec_pos
    cdef Py_ssize_t irec = 0
    cdef int status = 0
    cdef Py_ssize_t failed = -1
    cdef double v
    with nogil:
        for step in range(1, steps + 1):
            for i in range(m):
                _reaction(code, &p[0], &u[i + 1, 0], f)
                for a in range(d):
                    rhs[i, a] = u[i + 1, a] + dt * f[a]
            for a in range(d):
                rhs[0, a] += bleft[a]
                rhs[m - 1, a] += bright[a]
            _solve_inplace(inv, w, lo, rhs)
            for i in range(m):
                for a in range(d):
                    u[i + 1, a] = rhs[i, a]
            if record_every > 0 and step % record_every == 0:
                for i in range(n):
                    for a in range(d):
                        v = u[i, a]
                        if not isfinite(v) or fabs(v) > bound:
                            status = 1
                if status:
                    failed = step
                    break
                if irec < nrec:
                    rs[irec] = step
                    rp[irec] = _crossing(u, wt, offset, xv)
                    irec += 1
    # runs without recording are still checked once at the end
    if not status and not (np.all(np.isfinite(u_arr)) and np.max(np.abs(u_arr)) <= bound):
        status = 1
        failed = steps
    return u_arr, rec_steps[:irec], rec_pos[:irec], status, failed
