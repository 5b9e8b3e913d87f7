"""Linearised operator about a front, its adjoint kernel and spectral checks.

Operators act on node-interleaved vectors over the interior nodes (zero
Dirichlet data at both ends).  With the centred stencils used here the
discrete adjoint for the trapezoid product is exactly the matrix transpose.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import grid as gridmod
from .errors import HypothesisViolation, NonTransversalityError

log = logging.getLogger(__name__)

GAP_TOL = 1e-4


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: sp.csr_matrix
    role: str  # "L" | "L_adjoint"
    front: object
    speed: float

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, profile):
        """Apply to a full nodal profile ``(N, d)``; returns the same shape
        with zero end rows."""
        return from_interior(self.matrix @ to_interior(profile), self.front.grid.node_count)


def to_interior(profile):
    return np.asarray(profile, dtype=float)[1:-1].reshape(-1)


def from_interior(vec, node_count):
    vec = np.asarray(vec)
    d = vec.size // (node_count - 2)
    out = np.zeros((node_count, d), dtype=vec.dtype)
    out[1:-1] = vec.reshape(-1, d)
    return out


def _resolve(front, model, D):
    return (model if model is not None else front.model), np.atleast_2d(front.D if D is None else D)


def assemble_linearized(front, model=None, D=None):
    """``c d/dx + DF(phi) + D d2/dx2`` about ``front``."""
    model, D = _resolve(front, model, D)
    g = front.grid
    blocks = model.jacobian(front.values[1:-1])
    mat = gridmod.block_operator(g.node_count - 2, g.h, front.order, D, front.speed, blocks)
    return OperatorMatrix(mat, "L", front, front.speed)


def assemble_adjoint(front, model=None, D=None):
    """``-c d/dx + DF(phi)^T + D d2/dx2`` about ``front``."""
    model, D = _resolve(front, model, D)
    g = front.grid
    blocks = np.swapaxes(model.jacobian(front.values[1:-1]), -1, -2)
    mat = gridmod.block_operator(g.node_count - 2, g.h, front.order, D, -front.speed, blocks)
    return OperatorMatrix(mat, "L_adjoint", front, front.speed)


def essential_spectrum_check(model, D, k_max=None, k_samples=400, states=None, slack=1e-12):
    """Worst real part of ``eig(DF(E) - k^2 D)`` over ``k in [0, k_max]`` and
    both end states.  Returns ``(passes, bound)``."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    states = model.endpoints() if states is None else states
    jacs = [model.jacobian(np.asarray(e, dtype=float)) for e in states]
    if k_max is None:
        radius = max(float(np.max(np.sum(np.abs(j), axis=1))) for j in jacs)
        k_max = math.sqrt(2.0 * radius / float(np.min(np.linalg.eigvalsh(D)))) + 1.0
    ks = np.concatenate([[0.0], np.linspace(0.0, k_max, k_samples)])
    bound = -np.inf
    for j in jacs:
        mats = j[None, :, :] - (ks**2)[:, None, None] * D[None, :, :]
        bound = max(bound, float(np.max(np.linalg.eigvals(mats).real)))
        # exact value at k = 0
        bound = max(bound, float(np.max(np.linalg.eigvals(j).real)))
    return bound < slack, bound


def _bordered_solve(matrix, column, row, rhs, corner=0.0):
    n = matrix.shape[0]
    bordered = sp.bmat(
        [[matrix, sp.csr_matrix(np.asarray(column).reshape(n, 1))], [sp.csr_matrix(np.asarray(row).reshape(1, n)), sp.csr_matrix([[corner]])]],
        format="csc",
    )
    sol = spla.splu(bordered).solve(np.asarray(rhs, dtype=float))
    return sol[:n], sol[n]


def _weights_interior(front):
    d = front.values.shape[1]
    w = gridmod.trapezoid_weights(front.grid)[1:-1]
    return np.repeat(w, d)


def kernel_vector(op, front, normalize_to=None):
    """Near-null vector of ``op`` by one bordered inverse-iteration step at
    shift 0, refined until the bordering multiplier stagnates.

    Returns ``(profile, multiplier)`` with ``<profile, phi'> = 1`` (or
    ``= normalize_to``).
    """
    dphi = to_interior(front.derivative())
    w = _weights_interior(front)
    row = w * dphi
    column = dphi.copy()
    target = 1.0 if normalize_to is None else normalize_to
    rhs = np.zeros(op.shape[0] + 1)
    rhs[-1] = target
    prev = None
    for _ in range(3):
        v, s = _bordered_solve(op.matrix, column, row, rhs)
        # next step uses the current iterate as the bordering column
        if prev is not None and np.max(np.abs(v - prev)) <= 1e-13 * np.max(np.abs(v)):
            break
        prev = v
        column = v / np.max(np.abs(v))
    return from_interior(v, front.grid.node_count), float(s)


def kernel_adjoint(adjoint_op, front):
    """Adjoint kernel function normalised by ``<psi, phi'> = 1``."""
    dphi = front.derivative()
    psi, s = kernel_vector(adjoint_op, front)
    w = gridmod.trapezoid_weights(front.grid)
    norm_psi = math.sqrt(gridmod.inner(psi, psi, w))
    norm_dphi = math.sqrt(gridmod.inner(dphi, dphi, w))
    cosine = 1.0 / (norm_psi * norm_dphi)
    if not np.isfinite(cosine) or cosine < 1e-8:
        raise NonTransversalityError(
            f"adjoint kernel is (numerically) orthogonal to phi' (cos = {cosine:.3e})"
        )
    residual = float(np.max(np.abs(adjoint_op.matrix @ to_interior(psi))))
    if residual > 1e-6 * np.max(np.abs(psi)) * max(1.0, float(abs(adjoint_op.matrix).max())):
        warnings.warn(
            f"adjoint kernel residual {residual:.3e} is large; zero may not be a simple eigenvalue",
            RuntimeWarning,
            stacklevel=2,
        )
    return psi


def translation_mode(op, front):
    """Discrete null vector of ``L`` scaled to be comparable with ``phi'``
    (``<t, phi'> = ||phi'||^2``)."""
    dphi = front.derivative()
    w = gridmod.trapezoid_weights(front.grid)
    t, _ = kernel_vector(op, front, normalize_to=gridmod.inner(dphi, dphi, w))
    return t


@dataclass
class SpectralReport:
    essential_bound: float
    zero_eig_estimate: float
    spectral_gap: float
    kernel_angle: float
    rightmost_nonzero_real_part: float
    eigenvalues: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    gap_tol: float = GAP_TOL

    @property
    def h1(self):
        return self.essential_bound < 0

    @property
    def h2(self):
        return abs(self.zero_eig_estimate) < self.gap_tol * self.spectral_gap

    @property
    def stable(self):
        return self.rightmost_nonzero_real_part < 0

    @property
    def passes(self):
        return self.h1 and self.h2 and self.stable

    def to_text(self):
        items = {
            "essential_bound": self.essential_bound,
            "zero_eig_estimate": self.zero_eig_estimate,
            "spectral_gap": self.spectral_gap,
            "kernel_angle": self.kernel_angle,
            "rightmost_nonzero_real_part": self.rightmost_nonzero_real_part,
            "iterations": self.iterations,
            "converged": self.converged,
            "h1": self.h1,
            "h2": self.h2,
            "stable": self.stable,
            "passes": self.passes,
        }
        lines = [f"{k}={_fmt(v)}" for k, v in items.items()]
        for i, lam in enumerate(self.eigenvalues):
            lines.append(f"eigenvalue_{i}={_fmt(lam.real)}{lam.imag:+.17g}j")
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def subspace_inverse_iteration(matrix, count=8, shift=0.0, max_iter=500, tol=1e-9, gap_rtol=1e-6, seed=0):
    """Eigenvalues of ``matrix`` closest to ``shift`` by orthogonal
    iteration on ``(matrix - shift)^-1`` with Rayleigh-Ritz extraction.

    Convergence is declared when the nearest Ritz value moves by less than
    ``tol`` (relative to max(1, |value|)) and the next one by less than
    ``gap_rtol`` relative; the remaining values are by-products.

    Returns ``(ritz values sorted by distance to shift, ritz vectors,
    iterations, converged)``.
    """
    n = matrix.shape[0]
    a = (matrix - shift * sp.identity(n, format="csr")).tocsc()
    lu = spla.splu(a)
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, count)))
    prev = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = lu.solve(q)
        q, _ = np.linalg.qr(z)
        h = q.T @ (matrix @ q)
        vals, vecs = np.linalg.eig(h)
        order = np.argsort(np.abs(vals - shift))
        vals, vecs = vals[order], vecs[:, order]
        if prev is not None:
            # matched to the nearest previous value: near-degenerate pairs
            # (e.g. discretised essential spectrum) swap order between sweeps
            moves = [float(np.min(np.abs(prev - v))) for v in vals[:2]]
            ok = moves[0] <= tol * max(1.0, abs(vals[0]))
            if count > 1:
                ok = ok and moves[1] <= gap_rtol * abs(vals[1] - shift)
            if ok:
                converged = True
                break
        prev = vals
    return vals, q @ vecs, it, converged


def zero_multiplicity_and_gap(op, front, count=8, essential=None, seed=0):
    """Near-zero eigenvalue, gap to the next one and rightmost nonzero real
    part of the discrete operator."""
    vals, vecs, iterations, converged = subspace_inverse_iteration(op.matrix, count=count, seed=seed)
    if not converged:
        log.warning("eigen-iteration did not converge after %d iterations", iterations)
    lam0 = vals[0]
    rest = vals[1:]
    gap = float(np.min(np.abs(rest))) if rest.size else math.inf
    rightmost = float(np.max(rest.real)) if rest.size else -math.inf
    kvec = np.real_if_close(vecs[:, 0])
    dphi = to_interior(front.derivative())
    cos = abs(np.vdot(kvec, dphi)) / (np.linalg.norm(kvec) * np.linalg.norm(dphi))
    if essential is None:
        _, essential = essential_spectrum_check(front.model, front.D)
    return SpectralReport(
        essential_bound=essential,
        zero_eig_estimate=float(abs(lam0)),
        spectral_gap=gap,
        kernel_angle=float(1.0 - cos),
        rightmost_nonzero_real_part=rightmost,
        eigenvalues=list(vals),
        iterations=iterations,
        converged=converged,
    )


def require_hypotheses(report):
    if not report.h1:
        raise HypothesisViolation(f"H1 fails: essential spectrum bound {report.essential_bound:.3e} >= 0")
    if not report.h2:
        raise HypothesisViolation(
            f"H2 fails: |lambda0| = {report.zero_eig_estimate:.3e} vs gap {report.spectral_gap:.3e}"
        )
