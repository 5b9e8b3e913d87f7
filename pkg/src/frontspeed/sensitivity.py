"""First-order variation of the front speed under ``D -> D + eps * Dbar``.

Three independent evaluations are provided: the solvency condition
``cbar = -<psi, Dbar phi''>``, the rotation/wedge expression built from the
first-order profile, and half-line versions of both that rely on the
u1 <-> u2 symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import grid as gridmod
from . import spectral
from .errors import (
    FrontSpeedError,
    HypothesisViolation,
    NormalizationError,
    StageError,
)
from .front_solver import DEFAULT_ORDER, solve_standing_front, solve_travelling_front
from .models import check_h3_symmetry, check_h4, commutes_with_swap, rot_f, swap

SYMMETRY_TOL = 1e-6
# |cbar| below this is reported with sign 0
SIGN_TOL = 1e-8


@dataclass
class FirstOrderProfile:
    values: np.ndarray
    orthogonality_defect: float
    multiplier: float
    residual: float


@dataclass
class SensitivityReport:
    cbar_solvency: float
    cbar_alternative: float
    cbar_halfline_solvency: float
    cbar_halfline_rot: float
    psi: np.ndarray
    phibar: np.ndarray
    orthogonality_defect: float
    symmetry_defects: dict = field(default_factory=dict)
    front: object = None
    spectrum: object = None
    normalization_simpson: float = math.nan

    @property
    def expression_gap(self):
        return abs(self.cbar_solvency - self.cbar_alternative)

    def row(self, parameter):
        """Flat row for the sweep CSV."""
        return {
            "mu_or_eps": parameter,
            "cbar_solvency": self.cbar_solvency,
            "cbar_alt": self.cbar_alternative,
            "cbar_half_s": self.cbar_halfline_solvency,
            "cbar_half_rot": self.cbar_halfline_rot,
            "orth_defect": self.orthogonality_defect,
            "sym_defect_psi": self.symmetry_defects.get("psi", math.nan),
            "sym_defect_phibar": self.symmetry_defects.get("phibar", math.nan),
            "sign_cbar": cbar_sign(self.cbar_solvency),
        }


def cbar_sign(value, tol=SIGN_TOL):
    return 0 if abs(value) <= tol else int(np.sign(value))


def _weights(front):
    return gridmod.trapezoid_weights(front.grid)


def normalization(front, psi, weights=None):
    w = _weights(front) if weights is None else weights
    return gridmod.inner(psi, front.derivative(), w)


def cbar_solvency(front, psi, Dbar, tol=1e-6):
    """``-<psi, Dbar phi''>``; ``psi`` must be normalised by ``<psi, phi'> = 1``."""
    norm = normalization(front, psi)
    if abs(norm - 1.0) > tol:
        raise NormalizationError(f"<psi, phi'> = {norm!r}, expected 1")
    Dbar = np.atleast_2d(Dbar)
    return -gridmod.inner(psi, front.second_derivative() @ Dbar.T, _weights(front))


def solve_first_order_profile(front, model, D, Dbar, cbar, operator=None, compat_tol=1e-6):
    """Solve ``L phibar = -Dbar phi'' - cbar phi'`` with ``<phi', phibar> = 0``.

    The constraint row is bordered with a ``phi'`` column whose multiplier
    measures the incompatibility of the right-hand side.
    """
    op = operator if operator is not None else spectral.assemble_linearized(front, model, D)
    Dbar = np.atleast_2d(Dbar)
    dphi = front.derivative()
    rhs = -(front.second_derivative() @ Dbar.T) - cbar * dphi
    w = _weights(front)
    col = spectral.to_interior(dphi)
    row = col * np.repeat(w[1:-1], dphi.shape[1])
    full_rhs = np.concatenate([spectral.to_interior(rhs), [0.0]])
    try:
        vec, multiplier = spectral._bordered_solve(op.matrix, col, row, full_rhs)
    except RuntimeError as exc:
        raise HypothesisViolation(f"bordered first-order system is singular: {exc}") from exc
    phibar = spectral.from_interior(vec, front.grid.node_count)
    if abs(multiplier) > compat_tol * max(1.0, abs(cbar)):
        raise HypothesisViolation(
            f"right-hand side not in the range of L (multiplier {multiplier:.3e}); cbar inconsistent"
        )
    residual = float(np.max(np.abs(op.matrix @ vec - spectral.to_interior(rhs))))
    return FirstOrderProfile(
        values=phibar,
        orthogonality_defect=abs(gridmod.inner(dphi, phibar, w)),
        multiplier=float(multiplier),
        residual=residual,
    )


def wedge(a, b):
    """``a1 b2 - a2 b1`` in canonical coordinates."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def cbar_alternative(front, model, phibar):
    """``<(L - L*) phi', phibar> / ||phi'||^2``.

    For two components this is ``<rot F(phi), phi' ^ phibar> / ||phi'||^2``
    plus the advection term ``2c <phi'', phibar> / ||phi'||^2``.
    """
    phibar = getattr(phibar, "values", phibar)
    w = _weights(front)
    dphi = front.derivative()
    d2phi = front.second_derivative()
    norm2 = gridmod.inner(dphi, dphi, w)
    advection = 2.0 * front.speed * gridmod.inner(d2phi, phibar, w)
    if model.dimension == 2:
        integrand = rot_f(model, front.values) * wedge(dphi, phibar)
        return (float(w @ integrand) + advection) / norm2
    jac = model.jacobian(front.values)
    anti = jac - np.swapaxes(jac, -1, -2)
    skew = np.einsum("nij,nj->ni", anti, dphi)
    return (gridmod.inner(skew, phibar, w) + advection) / norm2


def symmetry_defects(front, model, psi, phibar, Dbar):
    """Antisymmetry of psi and phibar under ``x -> -x`` combined with S, and
    relative evenness of the three integrands."""
    phibar = getattr(phibar, "values", phibar)
    dphi = front.derivative()
    Dbar = np.atleast_2d(Dbar)
    out = {
        "front": front.symmetry_defect(),
        "psi": float(np.max(np.abs(psi[::-1] + swap(psi)))),
        "phibar": float(np.max(np.abs(phibar[::-1] + swap(phibar)))),
    }
    dbar_d2 = front.second_derivative() @ Dbar.T
    jac_scale = float(np.max(np.abs(model.jacobian(front.values))))
    peak = lambda a: float(np.max(np.abs(a)))
    # (integrand, scale of its factors); the factor scale keeps the measure
    # meaningful when the integrand itself cancels, e.g. toy mu = 1
    integrands = {
        "solvency_integrand": (np.sum(psi * dbar_d2, axis=1), peak(psi) * peak(dbar_d2)),
        "dphi_squared": (np.sum(dphi * dphi, axis=1), peak(dphi) ** 2),
        "rot_integrand": (
            rot_f(model, front.values) * wedge(dphi, phibar),
            jac_scale * peak(dphi) * peak(phibar),
        ),
    }
    for name, (g, floor) in integrands.items():
        scale = max(peak(g), floor)
        out[name] = float(np.max(np.abs(g - g[::-1]))) / scale if scale > 0 else 0.0
    return out


def symmetric_setup(model, D, Dbar):
    """Whether H3 (model and D) and H4 (Dbar) hold; returns (ok, reason)."""
    if model.dimension != 2:
        return False, "model is not two-dimensional"
    ok, defect = check_h3_symmetry(model)
    if not ok:
        return False, f"F(Su) != SF(u) (defect {defect:.3e})"
    if not commutes_with_swap(D):
        return False, "D does not commute with S"
    if not check_h4(Dbar):
        return False, "Dbar is not of the form diag(d, -d) with d != 0"
    return True, ""


def cbar_halfline(front, psi, phibar, model, Dbar, D=None, tol=SYMMETRY_TOL):
    """Half-line solvency and rotation expressions ``(-2<psi, Dbar phi''>_+,
    <rot F, phi' ^ phibar>_+ / ||phi'||_+^2)``; refuses unless the
    symmetry hypotheses hold and are observed numerically."""
    phibar = getattr(phibar, "values", phibar)
    D = front.D if D is None else D
    ok, reason = symmetric_setup(model, D, Dbar)
    if not ok:
        raise HypothesisViolation(f"half-line formulas invalid: {reason}")
    defects = symmetry_defects(front, model, psi, phibar, Dbar)
    bad = {k: v for k, v in defects.items() if v > tol}
    if bad:
        raise HypothesisViolation(f"half-line formulas invalid: symmetry defects {bad}")
    w = gridmod.halfline_weights(front.grid)
    Dbar = np.atleast_2d(Dbar)
    dphi = front.derivative()
    s_half = -2.0 * gridmod.inner(psi, front.second_derivative() @ Dbar.T, w)
    rot_half = float(w @ (rot_f(model, front.values) * wedge(dphi, phibar))) / gridmod.inner(dphi, dphi, w)
    return s_half, rot_half


def full_report(
    model, D, Dbar, grid, order=DEFAULT_ORDER, init=None, check_spectrum=True, front=None, options=None, gap_tol=None
):
    """Front -> spectral checks -> psi -> cbar (all expressions) -> phibar ->
    symmetry diagnostics.  Stage failures are re-raised as
    :class:`StageError` carrying the stage name."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    Dbar = np.atleast_2d(np.asarray(Dbar, dtype=float))
    symmetric = model.dimension == 2 and model.has_u1u2_symmetry and commutes_with_swap(D)

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FrontSpeedError as exc:
            raise StageError(name, exc) from exc

    if front is None:
        if symmetric:
            front = stage("front", solve_standing_front, model, D, grid, init=init, order=order, options=options)
        else:
            front = stage("front", solve_travelling_front, model, D, grid, init=init, order=order, options=options)
    op = spectral.assemble_linearized(front, model, D)
    report = None
    if check_spectrum:
        report = stage("spectrum", spectral.zero_multiplicity_and_gap, op, front)
        if gap_tol is not None:
            report.gap_tol = gap_tol
        stage("spectrum", spectral.require_hypotheses, report)
    adj = spectral.assemble_adjoint(front, model, D)
    psi = stage("adjoint", spectral.kernel_adjoint, adj, front)
    cs = stage("solvency", cbar_solvency, front, psi, Dbar)
    first = stage("first_order", solve_first_order_profile, front, model, D, Dbar, cs, operator=op)
    ca = stage("alternative", cbar_alternative, front, model, first.values)
    half_s = half_r = math.nan
    defects = {}
    if model.dimension == 2:
        defects = symmetry_defects(front, model, psi, first.values, Dbar)
        if symmetric and check_h4(Dbar):
            half_s, half_r = stage("halfline", cbar_halfline, front, psi, first.values, model, Dbar, D)
    return SensitivityReport(
        cbar_solvency=cs,
        cbar_alternative=ca,
        cbar_halfline_solvency=half_s,
        cbar_halfline_rot=half_r,
        psi=psi,
        phibar=first.values,
        orthogonality_defect=first.orthogonality_defect,
        symmetry_defects=defects,
        front=front,
        spectrum=report,
        normalization_simpson=normalization(front, psi, gridmod.simpson_weights(front.grid)),
    )


def finite_difference_cbar(model, D, Dbar, grid, eps_values=(-0.02, -0.01, 0.01, 0.02), front=None, order=DEFAULT_ORDER):
    """Slope of ``c(eps)`` from perturbed travelling fronts, least-squares
    fitted with a quadratic term; independent of the adjoint machinery."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    Dbar = np.atleast_2d(np.asarray(Dbar, dtype=float))
    if front is None:
        front = solve_travelling_front(model, D, grid, order=order)
    speeds = []
    for eps in eps_values:
        sol = solve_travelling_front(model, D + eps * Dbar, grid, init=front.values, c_init=front.speed, order=order)
        speeds.append(sol.speed - front.speed)
    eps = np.asarray(eps_values, dtype=float)
    design = np.column_stack([eps, eps**2])
    coef, *_ = np.linalg.lstsq(design, np.asarray(speeds), rcond=None)
    return float(coef[0]), np.asarray(speeds)
