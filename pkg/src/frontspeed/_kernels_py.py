"""Pure-Python implementations of the compiled kernels (same signatures).

Block-tridiagonal systems are stored in LAPACK band form and factored once
with ``dgbtrf``; the stepper evaluates the reaction with numpy.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

BACKEND = "python"


def _band(diag, lower, upper):
    diag = np.asarray(diag, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n, d, _ = diag.shape
    size = n * d
    bw = 2 * d - 1
    # dgbtrf layout: kl extra rows on top for fill-in
    ab = np.zeros((3 * bw + 1, size))
    row0 = 2 * bw

    def put(blocks, ri, ci):
        for a in range(d):
            for b in range(d):
                r = ri * d + a
                c = ci * d + b
                ab[row0 + r - c, c] = blocks[a, b]

    for i in range(n):
        put(diag[i], i, i)
        if i + 1 < n:
            put(lower[i], i + 1, i)
            put(upper[i], i, i + 1)
    return ab, bw


def block_tridiag_factor(diag, lower, upper):
    ab, bw = _band(diag, lower, upper)
    lub, piv, info = lapack.dgbtrf(ab, bw, bw)
    if info > 0:
        raise np.linalg.LinAlgError("singular diagonal block")
    return lub, piv, bw, np.asarray(diag).shape[1]


def block_tridiag_solve(factor, rhs):
    lub, piv, bw, d = factor
    rhs = np.asarray(rhs, dtype=float)
    x, info = lapack.dgbtrs(lub, bw, bw, rhs.reshape(-1), piv)
    if info:
        raise np.linalg.LinAlgError(f"dgbtrs failed with info={info}")
    return x.reshape(rhs.shape)


def level_crossing(u, weights, offset, x):
    g = np.asarray(u, dtype=float) @ np.asarray(weights, dtype=float) + offset
    zero = np.flatnonzero(g[:-1] == 0.0)
    change = np.flatnonzero((g[:-1] < 0.0) != (g[1:] < 0.0))
    hits = np.concatenate([zero, change])
    if hits.size == 0:
        return np.nan
    i = int(hits.min())
    if g[i] == 0.0:
        return float(x[i])
    return float(x[i] + (x[i + 1] - x[i]) * g[i] / (g[i] - g[i + 1]))


def _reaction_for(code, kparams):
    p = np.asarray(kparams, dtype=float)

    if code == 1:
        return lambda u: u * (1.0 - u) * (u - p[0])
    if code == 2:
        def toy(u):
            u1, u2 = u[:, 0], u[:, 1]
            s = 1.0 - u1 - u2
            return np.stack([u1 * (s - p[0] * u2 * (u2 - u1)), u2 * (s - p[0] * u1 * (u1 - u2))], axis=-1)
        return toy
    if code == 3:
        def lv(u):
            u1, u2 = u[:, 0], u[:, 1]
            b = 1.0 + p[0]
            return np.stack([u1 * (1.0 - u1 - b * u2), u2 * (1.0 - u2 - b * u1)], axis=-1)
        return lv
    if code == 4:
        def gl(u):
            a, b = u[:, 0], u[:, 1]
            r2 = a * a + b * b
            return np.stack([a - r2 * a + p[0] * (a - p[1] * b), b - r2 * b + p[0] * (p[1] * a - b)], axis=-1)
        return gl
    raise ValueError(f"unknown kernel code {code}")


# overflow is reported through the status flag
@np.errstate(over="ignore", invalid="ignore")
def imex_advance(u0, steps, dt, h, Deff, code, kparams, record_every, weights, offset, reaction=None, bound=10.0):
    u = np.array(u0, dtype=float)
    n, d = u.shape
    m = n - 2
    De = np.asarray(Deff, dtype=float).reshape(d, d)
    r = dt / h**2
    factor = block_tridiag_factor(
        np.broadcast_to(np.eye(d) + 2.0 * r * De, (m, d, d)),
        np.broadcast_to(-r * De, (m - 1, d, d)),
        np.broadcast_to(-r * De, (m - 1, d, d)),
    )
    if code == 0:
        if reaction is None:
            raise ValueError("kernel code 0 needs a reaction callable")
        fn = reaction
    else:
        fn = _reaction_for(code, kparams)
    bleft = r * De @ u[0]
    bright = r * De @ u[-1]
    x = h * (np.arange(n) - (n - 1) // 2)
    nrec = steps // record_every if record_every > 0 else 0
    rec_steps = np.zeros(nrec, dtype=np.int64)
    rec_pos = np.full(nrec, np.nan)
    irec = 0
    lub, piv, bw, _ = factor
    inner = u[1:-1]
    for step in range(1, steps + 1):
        rhs = inner + dt * np.asarray(fn(inner)).reshape(m, d)
        rhs[0] += bleft
        rhs[-1] += bright
        sol, info = lapack.dgbtrs(lub, bw, bw, rhs.reshape(-1), piv)
        inner[:] = sol.reshape(m, d)
        if record_every > 0 and step % record_every == 0:
            if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > bound:
                return u, rec_steps[:irec], rec_pos[:irec], 1, step
            if irec < nrec:
                rec_steps[irec] = step
                rec_pos[irec] = level_crossing(u, weights, offset, x)
                irec += 1
    if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > bound:
        return u, rec_steps[:irec], rec_pos[:irec], 1, steps
    return u, rec_steps[:irec], rec_pos[:irec], 0, -1
