"""Standing and travelling front profiles on a truncated domain.

The profile equation ``F(phi) + D phi'' + c phi' = 0`` is discretised with
centred finite differences of even order and clamped to the end states at
``x = -L`` and ``x = L`` (stencil points beyond the ends take the end values).
The speed ``c`` is always an unknown; one extra scalar equation fixes the
translation, either a pin of the longitudinal component at ``x = 0`` or an
integral phase condition.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import grid as gridmod
from .errors import ConfigurationError, DegenerateProfileError, NonConvergenceError
from .grid import Grid, build_grid, grid_with_spacing  # noqa: F401  (re-exported)
from .models import make_model, swap, to_tl

log = logging.getLogger(__name__)

DEFAULT_ORDER = 6


@dataclass
class NewtonOptions:
    tol: float = 1e-12
    accept: float = 1e-10
    max_iter: int = 50
    min_damping: float = 2.0**-12


@dataclass
class FrontSolution:
    grid: Grid
    values: np.ndarray
    speed: float
    residual_norm: float
    boundary_defect: float
    model: object = None
    D: np.ndarray = None
    order: int = DEFAULT_ORDER
    iterations: int = 0
    condition: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.grid.x

    @property
    def tl(self):
        return to_tl(self.values)

    def derivative(self):
        return gridmod.derivative(self.values, self.grid.h, self.order, pad="edge")

    def second_derivative(self):
        return gridmod.second_derivative(self.values, self.grid.h, self.order, pad="edge")

    def symmetry_defect(self):
        """``max_i |phi(-x_i) - S phi(x_i)|`` for two-component fronts."""
        return float(np.max(np.abs(self.values[::-1] - swap(self.values))))

    def with_values(self, values, speed=None):
        return replace(self, values=np.asarray(values, dtype=float), speed=self.speed if speed is None else speed)


def profile_residual(model, D, grid, values, c, order=DEFAULT_ORDER):
    """``F(phi) + D phi'' + c phi'`` at every node (ends included)."""
    values = np.asarray(values, dtype=float)
    D = np.atleast_2d(D)
    d2 = gridmod.second_derivative(values, grid.h, order, pad="edge")
    d1 = gridmod.derivative(values, grid.h, order, pad="edge")
    return model.reaction(values) + d2 @ D.T + c * d1


def interior_residual_norm(model, D, grid, values, c, order=DEFAULT_ORDER):
    r = profile_residual(model, D, grid, values, c, order)
    return float(np.max(np.abs(r[1:-1])))


def decay_rates(model, D, states):
    """Slowest spatial decay rate ``sqrt(min |eig(D^-1 DF(E))|)`` at each state."""
    D = np.atleast_2d(D)
    rates = []
    for e in states:
        ev = np.linalg.eigvals(np.linalg.solve(D, model.jacobian(np.asarray(e, dtype=float))))
        rates.append(math.sqrt(float(np.min(np.abs(ev)))))
    return rates


def auto_half_length(model, D, states=None, target=24.0):
    """Half-length L with ``nu * L >= target`` for the slowest decay rate nu."""
    if states is None:
        states = model.endpoints()
    nu = min(decay_rates(model, D, states))
    if nu <= 0:
        raise ConfigurationError("end state is not hyperbolic; cannot size the domain")
    return target / nu


def default_initializer(model, D, grid, states=None, width=None):
    """Straight line between the end states, modulated by ``tanh(nu x / 2)``.

    ``nu`` is the slowest spatial decay rate at the ends unless ``width``
    (= 1/nu) is given.
    """
    e_minus, e_plus = model.endpoints() if states is None else states
    e_minus = np.asarray(e_minus, dtype=float)
    e_plus = np.asarray(e_plus, dtype=float)
    if width is None:
        width = 1.0 / min(decay_rates(model, D, (e_minus, e_plus)))
    s = 0.5 * (1.0 + np.tanh(grid.x / (2.0 * width)))
    return e_minus + s[:, None] * (e_plus - e_minus)


def _interleave(values):
    return np.asarray(values, dtype=float).reshape(-1)


def _jacobian_interior(model, D, grid, values, c, order):
    n = grid.node_count - 2
    blocks = model.jacobian(values[1:-1])
    return gridmod.block_operator(n, grid.h, order, D, c, blocks)


def _newton(model, D, grid, values, c, constraint, order, options):
    """Damped Newton on the bordered system (interior unknowns, speed).

    ``constraint`` is ``(g(values), grad_g)`` with ``grad_g`` the interior
    interleaved gradient (constant for the linear constraints used here).
    """
    g_fun, g_grad = constraint
    values = np.array(values, dtype=float)
    dim = values.shape[1]
    n_unknown = (grid.node_count - 2) * dim

    def full_residual(vals, speed):
        r = profile_residual(model, D, grid, vals, speed, order)[1:-1]
        return np.concatenate([_interleave(r), [g_fun(vals)]])

    res = full_residual(values, c)
    norm = float(np.max(np.abs(res)))
    history = [norm]
    step_norm = np.inf
    it = 0
    for it in range(1, options.max_iter + 1):
        if norm <= options.tol or (norm <= options.accept and step_norm <= 1e-13):
            it -= 1
            break
        jac = _jacobian_interior(model, D, grid, values, c, order)
        col = _interleave(gridmod.derivative(values, grid.h, order, pad="edge")[1:-1])
        bordered = sp.bmat(
            [[jac, sp.csr_matrix(col[:, None])], [sp.csr_matrix(g_grad[None, :]), None]],
            format="csc",
        )
        try:
            lu = spla.splu(bordered)
        except RuntimeError as exc:
            raise NonConvergenceError(
                f"singular bordered Jacobian at iteration {it} (condition estimate: inf): {exc}",
                residual=norm,
                iterations=it,
            ) from exc
        delta = lu.solve(-res)
        if not np.all(np.isfinite(delta)):
            raise NonConvergenceError(
                f"bordered Jacobian numerically singular at iteration {it}", residual=norm, iterations=it
            )
        lam = 1.0
        while True:
            trial = values.copy()
            trial[1:-1] += delta[:n_unknown].reshape(-1, dim)
            c_trial = c + delta[-1]
            res_trial = full_residual(trial, c_trial)
            norm_trial = float(np.max(np.abs(res_trial)))
            if np.isfinite(norm_trial) and (norm_trial < norm or norm_trial <= options.tol):
                break
            lam *= 0.5
            delta = 0.5 * delta
            if lam < options.min_damping:
                # accept a full step when already at the round-off floor
                if norm <= options.accept:
                    norm_trial = norm
                    trial, c_trial, res_trial = values, c, res
                    break
                raise NonConvergenceError(
                    f"line search failed at iteration {it}, residual {norm:.3e}",
                    residual=norm,
                    iterations=it,
                )
        step_norm = float(np.max(np.abs(delta)))
        values, c, res, norm = trial, c_trial, res_trial, norm_trial
        history.append(norm)
        log.debug("newton it=%d residual=%.3e damping=%.3g", it, norm, lam)
    else:
        if norm > options.accept:
            raise NonConvergenceError(
                f"Newton did not converge in {options.max_iter} iterations, residual {norm:.3e}",
                residual=norm,
                iterations=options.max_iter,
            )
    if norm > options.accept:
        raise NonConvergenceError(f"Newton stopped with residual {norm:.3e}", residual=norm, iterations=it)
    return values, c, it, history


def _finish(model, D, grid, values, c, order, iterations, history, states, **diag):
    e_minus, e_plus = states
    bdef = max(
        float(np.max(np.abs(values[0] - e_minus))),
        float(np.max(np.abs(values[-1] - e_plus))),
        _tail_defect(model, D, grid, values, c, order),
    )
    sol = FrontSolution(
        grid=grid,
        values=values,
        speed=float(c),
        residual_norm=interior_residual_norm(model, D, grid, values, c, order),
        boundary_defect=bdef,
        model=model,
        D=np.atleast_2d(np.asarray(D, dtype=float)),
        order=order,
        iterations=iterations,
        diagnostics={"residual_history": history, **diag},
    )
    _check_saddle_capture(sol)
    return sol


def _tail_defect(model, D, grid, values, c, order):
    """Distance of the first/last interior nodes from the clamped end states;
    measures how much the truncation at +-L is felt by the profile."""
    return max(float(np.max(np.abs(values[1] - values[0]))), float(np.max(np.abs(values[-2] - values[-1]))))


def _check_saddle_capture(sol, fraction=0.25, tol=1e-3):
    model = sol.model
    try:
        saddles = [e.point for e in model.equilibria() if e.label == "saddle"]
    except NotImplementedError:
        return
    for s in saddles:
        near = np.max(np.abs(sol.values - s), axis=1) < tol
        if near.mean() > fraction:
            sol.diagnostics["saddle_capture"] = True
            raise NonConvergenceError(
                f"solution captured by the saddle {s.tolist()} on {near.mean():.0%} of the domain",
                residual=sol.residual_norm,
                iterations=sol.iterations,
            )


def solve_standing_front(model, D, grid, init=None, order=DEFAULT_ORDER, options=None, states=None):
    """Standing front with the longitudinal component pinned to 0 at x = 0.

    The speed stays an unknown of the bordered system; for u1 <-> u2
    symmetric problems it converges to zero, which is checked by callers.
    """
    if model.dimension != 2:
        raise ConfigurationError("the longitudinal pin needs a two-component model")
    options = options or NewtonOptions()
    states = model.endpoints() if states is None else states
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if init is None:
        init = default_initializer(model, D, grid, states)
    values = _clamped(init, states)
    n = grid.node_count - 2
    grad = np.zeros(2 * n)
    k = grid.center - 1
    grad[2 * k] = -1.0
    grad[2 * k + 1] = 1.0

    def pin(vals):
        return float(vals[grid.center, 1] - vals[grid.center, 0])

    values, c, it, hist = _newton(model, D, grid, values, 0.0, (pin, grad), order, options)
    return _finish(model, D, grid, values, c, order, it, hist, states, constraint="pin")


def solve_travelling_front(
    model, D, grid, init=None, c_init=0.0, order=DEFAULT_ORDER, options=None, states=None, reference=None
):
    """Front and speed with the phase condition ``<ref', phi - ref> = 0``.

    ``reference`` defaults to the initial guess.
    """
    options = options or NewtonOptions()
    states = model.endpoints() if states is None else states
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if init is None:
        init = default_initializer(model, D, grid, states)
    values = _clamped(init, states)
    ref = values.copy() if reference is None else _clamped(reference, states)
    dref = gridmod.derivative(ref, grid.h, order, pad="edge")
    w = gridmod.trapezoid_weights(grid)
    grad = _interleave((w[:, None] * dref)[1:-1])

    def phase(vals):
        return gridmod.inner(dref, vals - ref, w)

    values, c, it, hist = _newton(model, D, grid, values, float(c_init), (phase, grad), order, options)
    return _finish(model, D, grid, values, c, order, it, hist, states, constraint="phase")


def _clamped(init, states):
    values = np.array(init, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    values[0] = states[0]
    values[-1] = states[1]
    return values


def front_speed_quadrature(model, front):
    """``-<F(phi), phi'> / ||phi'||^2`` by the trapezoid rule."""
    dphi = front.derivative()
    w = gridmod.trapezoid_weights(front.grid)
    norm2 = gridmod.inner(dphi, dphi, w)
    if norm2 < 1e-14:
        raise DegenerateProfileError("profile is (numerically) constant")
    return -gridmod.inner(model.reaction(front.values), dphi, w) / norm2


def _model_with(model, param_name, value):
    params = dict(model.params)
    if model.name == "lotka_volterra" and param_name == "eps":
        params["mu"] = float(value) ** 2
    elif param_name in params:
        params[param_name] = float(value)
    else:
        raise ConfigurationError(f"model {model.name!r} has no parameter {param_name!r}")
    return make_model(model.name, **params)


def continue_in_parameter(model, D, grid, param_name, values, kind="standing", order=DEFAULT_ORDER, options=None):
    """Natural continuation: each converged front seeds the next solve.

    ``grid`` may be a :class:`Grid` or a callable ``value -> Grid``; when the
    grid changes the previous profile is interpolated onto the new nodes.
    A failing value raises after the preceding fronts were computed; they
    are attached to the exception as ``partial``.
    """
    out = []
    prev = None
    for value in values:
        m = _model_with(model, param_name, value)
        g = grid(value) if callable(grid) else grid
        init = None
        if prev is not None:
            init = np.column_stack(
                [np.interp(g.x, prev.x, prev.values[:, k]) for k in range(prev.values.shape[1])]
            )
        try:
            if kind == "standing":
                sol = solve_standing_front(m, D, g, init=init, order=order, options=options)
            else:
                sol = solve_travelling_front(
                    m, D, g, init=init, c_init=prev.speed if prev else 0.0, order=order, options=options
                )
        except NonConvergenceError as exc:
            exc.partial = out
            exc.failed_value = value
            raise
        out.append(sol)
        prev = sol
    return out


def rotating_fronts(model, D, grid, order=DEFAULT_ORDER, options=None):
    """The two travelling fronts of the Ginzburg-Landau model joining
    ``A_s`` to ``-A_s``: one with the phase increasing by pi (through the
    first saddle), one with it decreasing by pi (through the second).

    Returns ``(increasing, decreasing)``.
    """
    if model.name != "ginzburg_landau_polar":
        raise ConfigurationError("rotating fronts are defined for the Ginzburg-Landau model only")
    D = np.atleast_2d(np.asarray(D, dtype=float))
    start = model.angles()["stable"][0]
    states = model.endpoints()
    width = 1.0 / min(decay_rates(model, D, states))
    s = 0.5 * (1.0 + np.tanh(grid.x / (2.0 * width)))
    out = []
    for direction in (1.0, -1.0):
        phase = start + direction * math.pi * s
        init = np.stack([model.point_at(t) for t in phase])
        out.append(solve_travelling_front(model, D, grid, init=init, order=order, options=options, states=states))
    return tuple(out)
