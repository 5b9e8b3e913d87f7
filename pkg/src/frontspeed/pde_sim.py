"""Direct simulation of ``u_t = F(u) + (D + eps*Dbar) u_xx`` with front tracking.

Time stepping is IMEX Euler: the three-point Laplacian is treated implicitly
(one block-tridiagonal factorisation per run), the reaction explicitly.  The
hot loop lives in :mod:`frontspeed.kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import SimulationBlowUp, TrackingError
from .front_solver import DEFAULT_ORDER, solve_standing_front, solve_travelling_front
from .models import commutes_with_swap

BOUND = 10.0


@dataclass
class SimState:
    grid: object
    field: np.ndarray
    time: float
    D_effective: np.ndarray
    dt: float
    model: object = None


@dataclass
class FrontTrack:
    times: np.ndarray
    positions: np.ndarray
    speed: float
    intercept: float
    fit_residual: float
    resolution: float
    horizon: float
    backend: str = ""

    @property
    def below_resolution(self):
        return abs(self.speed) < self.resolution

    @property
    def accepted(self):
        if self.below_resolution:
            return True
        return self.fit_residual < 0.01 * abs(self.speed) * self.horizon

    def to_csv_rows(self):
        return [(float(t), float(x)) for t, x in zip(self.times, self.positions)]


@dataclass
class ValidationTable:
    rows: list = field(default_factory=list)  # (eps, measured, predicted, rel_err)
    cbar: float = math.nan
    advancing: dict = field(default_factory=dict)  # eps -> equilibrium name
    tracks: dict = field(default_factory=dict)

    def max_relative_error(self):
        return max((r[3] for r in self.rows), default=math.nan)


def level_weights(model):
    """Weights and offset of the scalar ``g(u)`` whose zero marks the front:
    ``(u - (E- + E+)/2) . (E+ - E-)``.  For two symmetric species this is
    ``u2 - u1 = v_L``; for the scalar case the ``u = 1/2`` level set."""
    left, right = (np.asarray(e, dtype=float) for e in model.endpoints())
    w = right - left
    return w, -float(0.5 * (left + right) @ w)


def stable_dt(model, grid, values=None, reaction_budget=0.2, diffusion_factor=5.0):
    """``min(reaction_budget / max|eig DF|, diffusion_factor * h^2)`` with the
    eigenvalues sampled over ``values`` (the end states by default)."""
    pts = np.asarray(model.endpoints() if values is None else values, dtype=float)
    pts = pts.reshape(-1, model.dimension)
    lam = float(np.max(np.abs(np.linalg.eigvals(model.jacobian(pts)))))
    cand = diffusion_factor * grid.h**2
    if lam > 0:
        cand = min(cand, reaction_budget / lam)
    return cand


def base_front(model, D, grid, order=DEFAULT_ORDER, options=None):
    """Unperturbed front used as initial data: standing for symmetric
    setups, travelling otherwise."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if model.dimension == 2 and model.has_u1u2_symmetry and commutes_with_swap(D):
        return solve_standing_front(model, D, grid, order=order, options=options)
    return solve_travelling_front(model, D, grid, order=order, options=options)


def initial_state(model, D, Dbar, eps, grid, front=None, dt=None):
    D = np.atleast_2d(np.asarray(D, dtype=float))
    Deff = D + eps * np.atleast_2d(np.asarray(Dbar, dtype=float))
    if front is None:
        front = base_front(model, D, grid)
    values = np.array(front.values, dtype=float)
    if dt is None:
        dt = stable_dt(model, grid, values)
    return SimState(grid=grid, field=values, time=0.0, D_effective=Deff, dt=dt, model=model)


def _run(state, steps, record_every, backend=None):
    k = kernels.get_backend(backend)
    model = state.model
    w, off = level_weights(model)
    u, rec_steps, rec_pos, status, failed = k.imex_advance(
        state.field,
        int(steps),
        state.dt,
        state.grid.h,
        state.D_effective,
        int(model.kernel_code),
        model.kernel_params() if model.kernel_code else np.zeros(4),
        int(record_every),
        w,
        off,
        reaction=model.reaction,
        bound=BOUND,
    )
    if status:
        t = state.time + failed * state.dt
        raise SimulationBlowUp(f"field left |u| < {BOUND} or became non-finite at t = {t:.6g}", time=t)
    new = replace(state, field=u, time=state.time + steps * state.dt)
    return new, state.time + rec_steps * state.dt, rec_pos


def step(state, backend=None):
    """One IMEX step; raises :class:`SimulationBlowUp` on overflow."""
    new, _, _ = _run(state, 1, 1, backend)
    return new


def advance(state, steps, record_every=0, backend=None):
    """``steps`` steps; returns ``(state, record_times, front_positions)``."""
    return _run(state, steps, record_every, backend)


def fit_speed(times, positions, horizon, h):
    """Least-squares line through the second half of the samples."""
    times = np.asarray(times, dtype=float)
    positions = np.asarray(positions, dtype=float)
    keep = times >= 0.5 * horizon
    t, x = times[keep], positions[keep]
    if t.size < 3:
        raise TrackingError("too few front samples in the second half of the run")
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - x) ** 2)))
    return float(coef[0]), float(coef[1]), rms, h / (0.5 * horizon)


def measure_speed(model, D, Dbar, eps, grid, T, front=None, samples=400, dt=None, backend=None, exit_margin=0.75):
    """Run from the unperturbed front for time ``T`` and fit the speed of the
    front position ``x*(t)`` over ``[T/2, T]``.

    The position is the zero of :func:`level_weights`; a positive speed
    means the left state ``E-`` invades.
    """
    state = initial_state(model, D, Dbar, eps, grid, front=front, dt=dt)
    steps = int(math.ceil(T / state.dt))
    record_every = max(1, steps // samples)
    state, times, pos = advance(state, steps, record_every, backend)
    horizon = steps * state.dt
    if pos.size == 0 or np.any(np.isnan(pos)):
        raise TrackingError("front level set not found in the field")
    if np.max(np.abs(pos)) > exit_margin * grid.half_length:
        raise TrackingError(
            f"front reached x = {pos[np.argmax(np.abs(pos))]:.3g}; domain too small (L = {grid.half_length})"
        )
    speed, icpt, rms, res = fit_speed(times, pos, horizon, grid.h)
    return FrontTrack(
        times=times,
        positions=pos,
        speed=speed,
        intercept=icpt,
        fit_residual=rms,
        resolution=res,
        horizon=horizon,
        backend=kernels.get_backend(backend).BACKEND,
    )


def _state_name(model, point):
    for eq in model.equilibria():
        if np.allclose(eq.point, point, atol=1e-12):
            return eq.name
    return str(tuple(point))


def advancing_state(model, speed, resolution=0.0):
    """Name of the end state whose domain grows, or ``"none"`` below
    resolution."""
    if abs(speed) <= resolution:
        return "none"
    left, right = model.endpoints()
    return _state_name(model, left if speed > 0 else right)


def validate_sensitivity(model, D, Dbar, grid, eps_list, T, cbar=None, front=None, backend=None, samples=400):
    """Measured speeds against the first-order prediction ``eps * cbar``."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if front is None:
        front = base_front(model, D, grid)
    if cbar is None:
        from .sensitivity import full_report

        cbar = full_report(model, D, Dbar, grid, front=front, check_spectrum=False).cbar_solvency
    table = ValidationTable(cbar=cbar)
    for eps in eps_list:
        track = measure_speed(model, D, Dbar, eps, grid, T, front=front, backend=backend, samples=samples)
        measured = track.speed - front.speed
        predicted = eps * cbar
        rel = abs(measured - predicted) / abs(predicted) if predicted != 0 else math.inf
        table.rows.append((float(eps), float(measured), float(predicted), float(rel)))
        table.advancing[float(eps)] = advancing_state(model, measured, track.resolution)
        table.tracks[float(eps)] = track
    return table
