"""Closed-form and small-parameter reference objects.

Covers the ``tanh`` profile ``theta``, the explicit toy front, leading-order
Lotka-Volterra front and adjoint, the leading-order speed sensitivity and the
bounded solution of ``u'' = u + f`` on the half-line with ``u(0) = 0``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConfigurationError
from .front_solver import DEFAULT_ORDER, FrontSolution, interior_residual_norm
from .models import covector_from_tl, from_tl, make_model

# integrals of theta = tanh(y/2); checked against adaptive quadrature in the tests
THETA_PRIME_SQ_LINE = 2.0 / 3.0
THETA_PRIME_SQ_HALF = 1.0 / 3.0
THETA_TRIPLE_HALF = -1.0 / 15.0
ALPHA = 1.0 / THETA_PRIME_SQ_LINE

TAIL_LENGTH = 33.0


class ThetaProfile:
    """``theta(y) = tanh(y/2)`` and its first two derivatives."""

    @staticmethod
    def value(y):
        return np.tanh(0.5 * np.asarray(y, dtype=float))

    @staticmethod
    def d1(y):
        t = ThetaProfile.value(y)
        return 0.5 * (1.0 - t * t)

    @staticmethod
    def d2(y):
        t = ThetaProfile.value(y)
        return -0.5 * t * (1.0 - t * t)

    def __call__(self, y):
        return self.value(y), self.d1(y), self.d2(y)


theta = ThetaProfile()


def _front(model, grid, values, order=DEFAULT_ORDER, condition="closed form"):
    D = np.eye(model.dimension)
    res = interior_residual_norm(model, D, grid, values, 0.0, order)
    return FrontSolution(
        grid=grid,
        values=values,
        speed=0.0,
        residual_norm=res,
        boundary_defect=float(max(np.max(np.abs(values[0] - model.endpoints()[0])), np.max(np.abs(values[-1] - model.endpoints()[1])))),
        model=model,
        D=D,
        order=order,
        condition=condition,
    )


def toy_explicit_front(mu, grid, order=DEFAULT_ORDER):
    """Exact standing front ``v_T = 1``, ``v_L = tanh(sqrt(mu) x / 2)``."""
    if not mu > 0:
        raise ConfigurationError(f"toy model is monostable for mu <= 0 (mu={mu})")
    x = grid.x
    v = np.column_stack([np.ones_like(x), np.tanh(0.5 * math.sqrt(mu) * x)])
    return _front(make_model("toy", mu=mu), grid, from_tl(v), order)


def lv_asymptotic_front(eps, grid, order=DEFAULT_ORDER):
    """Leading-order standing front of the competition model with
    ``mu = eps**2``:  ``v_T = 1 - eps^2 (1 - theta^2) / 2``, ``v_L = theta``
    evaluated at ``eps x``."""
    if not 0 < eps <= 0.5:
        raise ConfigurationError(f"eps must lie in (0, 0.5], got {eps}")
    t = theta.value(eps * grid.x)
    v = np.column_stack([1.0 - 0.5 * eps**2 * (1.0 - t * t), t])
    return _front(make_model("lotka_volterra", mu=eps**2), grid, from_tl(v), order, "leading order")


def lv_asymptotic_adjoint(eps, grid, alpha=ALPHA):
    """Leading-order adjoint kernel, returned in canonical components
    together with ``alpha``.  Its T-L components are
    ``(-alpha theta theta', alpha theta')`` at ``eps x``."""
    y = eps * grid.x
    t, t1 = theta.value(y), theta.d1(y)
    w = np.column_stack([-alpha * t * t1, alpha * t1])
    return covector_from_tl(w), alpha


def lv_cbar_leading(eps):
    """``-eps * int_0^inf theta theta' theta'' / ||theta'||^2_+ = eps / 5``."""
    return -eps * THETA_TRIPLE_HALF / THETA_PRIME_SQ_HALF


def homoclinic_solution(f, t, tail=TAIL_LENGTH, sign_check=True):
    """Bounded solution on ``[0, inf)`` of ``u'' = u + f`` with ``u(0) = 0``,

        u(t) = (e^-t int_0^t f (e^-s - e^s) ds + (e^-t - e^t) int_t^inf f e^-s ds) / 2.

    Parameters
    ----------
    f : callable
        Forcing, vectorised over nonnegative times.
    t : array_like
        Uniform nodes starting at 0.
    tail : float
        The upper limit is truncated at ``max(t) + tail``.

    Returns
    -------
    ndarray
        ``u`` at the nodes ``t``.
    """
    t = np.asarray(t, dtype=float)
    if t[0] != 0.0:
        raise ConfigurationError("nodes must start at t = 0")
    h = t[1] - t[0]
    extra = int(math.ceil(tail / h))
    n = t.size
    # half-step mesh: every returned node is a composite Simpson value, so
    # the quadrature error is smooth instead of alternating between nodes
    s = 0.5 * h * np.arange(2 * (n + extra) - 1)
    fs = np.asarray(f(s), dtype=float) * np.ones_like(s)
    if sign_check:
        inner = fs[1:]
        if np.any(inner > 0) and np.any(inner < 0):
            warnings.warn("forcing changes sign; the sign conclusion does not apply", RuntimeWarning, stacklevel=2)
    m = 2 * n - 1
    # every cumulative sum runs from the end where its integrand is small,
    # so no exponentially large term is formed by cancellation
    a = cumulative_simpson(fs[:m] * np.exp(-s[:m]), dx=0.5 * h, initial=0.0)[::2]
    b = cumulative_simpson(fs[:m] * np.exp(s[:m]), dx=0.5 * h, initial=0.0)[::2]
    r = cumulative_simpson((fs * np.exp(-s))[::-1], dx=0.5 * h, initial=0.0)[::-1][:m:2]
    e = np.exp(-t)
    u = 0.5 * (e * a - e * b + e * r - r / e)
    u[0] = 0.0
    return u


def toy_adjoint_transversal(mu, grid):
    """``psi_T`` of the toy adjoint kernel (T-L covector components).

    Solves ``psi_T'' = psi_T + N (1 - mu) phi_L phi_L'`` with
    ``N = 3 / (2 sqrt(mu))`` on the half-line and extends it oddly.
    """
    if not mu > 0:
        raise ConfigurationError(f"toy model is monostable for mu <= 0 (mu={mu})")
    norm = 1.5 / math.sqrt(mu)
    r = math.sqrt(mu)

    def forcing(s):
        p = np.tanh(0.5 * r * s)
        return norm * (1.0 - mu) * p * 0.5 * r * (1.0 - p * p)

    c = grid.center
    half = grid.x[c:]
    u = homoclinic_solution(forcing, half, sign_check=False)
    out = np.empty(grid.node_count)
    out[c:] = u
    out[:c] = -u[1:][::-1]
    return out
