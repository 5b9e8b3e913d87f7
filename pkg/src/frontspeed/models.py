"""Reaction systems, their Jacobians, equilibria and the u1 <-> u2 symmetry.

All vector fields act on arrays of shape ``(..., dimension)`` so that a whole
nodal profile can be evaluated at once.  Canonical coordinates are the only
state representation; the transversal-longitudinal frame is a view obtained
with :func:`to_tl` / :func:`from_tl`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .errors import ConfigurationError, UnsupportedError

# Exchange of the two species.
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
# v = TL_MATRIX @ u  with  v_T = u1 + u2,  v_L = -u1 + u2.
TL_MATRIX = np.array([[1.0, 1.0], [-1.0, 1.0]])
TL_INVERSE = 0.5 * np.array([[1.0, -1.0], [1.0, 1.0]])


def to_tl(u):
    """Map canonical coordinates to (v_T, v_L)."""
    u = np.asarray(u, dtype=float)
    return np.stack([u[..., 0] + u[..., 1], u[..., 1] - u[..., 0]], axis=-1)


def from_tl(v):
    """Inverse of :func:`to_tl`."""
    v = np.asarray(v, dtype=float)
    return np.stack([0.5 * (v[..., 0] - v[..., 1]), 0.5 * (v[..., 0] + v[..., 1])], axis=-1)


def covector_to_tl(w):
    """Transversal-longitudinal components of a covector (e.g. an adjoint
    eigenfunction).

    Pairing is preserved: ``w . u == covector_to_tl(w) . to_tl(u)``, so the
    canonical normalisation of an adjoint function carries over unchanged.
    """
    return 0.5 * to_tl(w)


def covector_from_tl(w_tl):
    w_tl = np.asarray(w_tl, dtype=float)
    return np.stack([w_tl[..., 0] - w_tl[..., 1], w_tl[..., 0] + w_tl[..., 1]], axis=-1)


def swap(u):
    """Apply the exchange symmetry S to the last axis."""
    return np.asarray(u, dtype=float)[..., ::-1]


@dataclass(frozen=True)
class Equilibrium:
    name: str
    point: np.ndarray
    label: str  # "stable" | "saddle" | "unstable" | "degenerate"
    eigenvalues: np.ndarray


def classify(eigenvalues, tol=1e-12):
    re = np.real(eigenvalues)
    if np.all(re < -tol):
        return "stable"
    if np.all(re > tol):
        return "unstable"
    if np.any(np.abs(re) <= tol):
        return "degenerate"
    return "saddle"


class ReactionModel:
    """Base class for a reaction vector field F with parameters.

    Subclasses implement :meth:`reaction`, :meth:`jacobian` and
    :meth:`_equilibrium_points`.  Instances are immutable.
    """

    name = "abstract"
    dimension = 2
    has_u1u2_symmetry = False
    kernel_code = 0
    param_names: tuple = ()

    def __init__(self, **params):
        unknown = set(params) - set(self.param_names)
        if unknown:
            raise ConfigurationError(
                f"model {self.name!r} got unknown parameter(s) {sorted(unknown)}"
            )
        missing = set(self.param_names) - set(params)
        if missing:
            raise ConfigurationError(f"model {self.name!r} missing parameter(s) {sorted(missing)}")
        object.__setattr__(self, "_params", MappingProxyType({k: float(v) for k, v in params.items()}))

    def __setattr__(self, key, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def params(self):
        return self._params

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self._params.items())
        return f"{type(self).__name__}({args})"

    def reaction(self, u):
        raise NotImplementedError

    def jacobian(self, u):
        raise NotImplementedError

    def _equilibrium_points(self):
        raise NotImplementedError

    def endpoints(self):
        """Default (E_minus, E_plus) for the bistable front of this model."""
        raise NotImplementedError

    def kernel_params(self):
        """Parameter vector consumed by the compiled time-stepping kernel."""
        return np.zeros(4)

    def equilibria(self):
        out = []
        for name, point in self._equilibrium_points():
            point = np.asarray(point, dtype=float)
            eig = np.linalg.eigvals(self.jacobian(point))
            out.append(Equilibrium(name, point, classify(eig), eig))
        return out

    def equilibrium(self, name):
        for eq in self.equilibria():
            if eq.name == name:
                return eq
        raise KeyError(name)


class ToyModel(ReactionModel):
    """Symmetric two-species competition toy model with an explicit front."""

    name = "toy"
    has_u1u2_symmetry = True
    kernel_code = 2
    param_names = ("mu",)

    def reaction(self, u):
        u = np.asarray(u, dtype=float)
        mu = self.params["mu"]
        u1, u2 = u[..., 0], u[..., 1]
        s = 1.0 - (u1 + u2)
        return np.stack([u1 * (s - mu * u2 * (u2 - u1)), u2 * (s - mu * u1 * (u1 - u2))], axis=-1)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        mu = self.params["mu"]
        u1, u2 = u[..., 0], u[..., 1]
        j = np.empty(u.shape[:-1] + (2, 2))
        j[..., 0, 0] = 1 - 2 * u1 - u2 - mu * u2**2 + 2 * mu * u1 * u2
        j[..., 0, 1] = -u1 - 2 * mu * u1 * u2 + mu * u1**2
        j[..., 1, 0] = -u2 - 2 * mu * u1 * u2 + mu * u2**2
        j[..., 1, 1] = 1 - u1 - 2 * u2 - mu * u1**2 + 2 * mu * u1 * u2
        return j

    def _equilibrium_points(self):
        return [("O", (0.0, 0.0)), ("E1", (1.0, 0.0)), ("E2", (0.0, 1.0)), ("E0", (0.5, 0.5))]

    def endpoints(self):
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])

    def kernel_params(self):
        return np.array([self.params["mu"], 0.0, 0.0, 0.0])


class LotkaVolterra(ReactionModel):
    """Lotka-Volterra competition with interspecific rate 1 + mu."""

    name = "lotka_volterra"
    has_u1u2_symmetry = True
    kernel_code = 3
    param_names = ("mu",)

    def reaction(self, u):
        u = np.asarray(u, dtype=float)
        b = 1.0 + self.params["mu"]
        u1, u2 = u[..., 0], u[..., 1]
        return np.stack([u1 * (1 - u1 - b * u2), u2 * (1 - u2 - b * u1)], axis=-1)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        b = 1.0 + self.params["mu"]
        u1, u2 = u[..., 0], u[..., 1]
        j = np.empty(u.shape[:-1] + (2, 2))
        j[..., 0, 0] = 1 - 2 * u1 - b * u2
        j[..., 0, 1] = -b * u1
        j[..., 1, 0] = -b * u2
        j[..., 1, 1] = 1 - 2 * u2 - b * u1
        return j

    def _equilibrium_points(self):
        pts = [("O", (0.0, 0.0)), ("E1", (1.0, 0.0)), ("E2", (0.0, 1.0))]
        mu = self.params["mu"]
        if mu != -2.0:
            e = 1.0 / (2.0 + mu)
            pts.append(("E0", (e, e)))
        return pts

    def endpoints(self):
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])

    def kernel_params(self):
        return np.array([self.params["mu"], 0.0, 0.0, 0.0])


class GinzburgLandau(ReactionModel):
    """Perturbed real Ginzburg-Landau equation
    ``A_t = A - |A|^2 A + eps^2 (conj(A) + i*omega*A) + A_xx``
    with state ``(Re A, Im A)``.

    The polar view ``(r, theta)`` with ``rho = 1 + eps^2 r`` is available
    through :meth:`to_polar`; the evolution itself is integrated in Cartesian
    form where diffusion is the identity.
    """

    name = "ginzburg_landau_polar"
    kernel_code = 4
    param_names = ("eps", "omega")

    def __init__(self, **params):
        super().__init__(**params)
        if not -1.0 < self.params["omega"] < 1.0:
            raise ConfigurationError("ginzburg_landau_polar requires -1 < omega < 1")

    def reaction(self, u):
        u = np.asarray(u, dtype=float)
        e2, om = self.params["eps"] ** 2, self.params["omega"]
        a, b = u[..., 0], u[..., 1]
        r2 = a * a + b * b
        return np.stack([a - r2 * a + e2 * (a - om * b), b - r2 * b + e2 * (om * a - b)], axis=-1)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        e2, om = self.params["eps"] ** 2, self.params["omega"]
        a, b = u[..., 0], u[..., 1]
        j = np.empty(u.shape[:-1] + (2, 2))
        j[..., 0, 0] = 1 - 3 * a * a - b * b + e2
        j[..., 0, 1] = -2 * a * b - e2 * om
        j[..., 1, 0] = -2 * a * b + e2 * om
        j[..., 1, 1] = 1 - a * a - 3 * b * b - e2
        return j

    def angles(self):
        """Angles of the two stable states and of the two saddles."""
        s = 0.5 * math.asin(self.params["omega"])
        return {"stable": (s, s + math.pi), "saddle": (0.5 * math.pi - s, 1.5 * math.pi - s)}

    def point_at(self, theta):
        rho = math.sqrt(1.0 + self.params["eps"] ** 2 * math.cos(2 * theta))
        return np.array([rho * math.cos(theta), rho * math.sin(theta)])

    def _equilibrium_points(self):
        ang = self.angles()
        return [
            ("O", (0.0, 0.0)),
            ("A_plus", self.point_at(ang["stable"][0])),
            ("A_minus", self.point_at(ang["stable"][1])),
            ("S1", self.point_at(ang["saddle"][0])),
            ("S2", self.point_at(ang["saddle"][1])),
        ]

    def endpoints(self):
        ang = self.angles()["stable"]
        return self.point_at(ang[0]), self.point_at(ang[1])

    def to_polar(self, u, unwrap=True):
        """Return ``(r, theta)`` with ``rho = 1 + eps^2 r``."""
        u = np.asarray(u, dtype=float)
        rho = np.hypot(u[..., 0], u[..., 1])
        theta = np.arctan2(u[..., 1], u[..., 0])
        if unwrap and theta.ndim:
            theta = np.unwrap(theta)
        return (rho - 1.0) / self.params["eps"] ** 2, theta

    def from_polar(self, r, theta):
        rho = 1.0 + self.params["eps"] ** 2 * np.asarray(r, dtype=float)
        return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)

    def kernel_params(self):
        return np.array([self.params["eps"] ** 2, self.params["omega"], 0.0, 0.0])


class Nagumo(ReactionModel):
    """Scalar bistable Nagumo equation ``u_t = u(1-u)(u-a) + u_xx``."""

    name = "nagumo"
    dimension = 1
    kernel_code = 1
    param_names = ("a",)

    def reaction(self, u):
        u = np.asarray(u, dtype=float)
        a = self.params["a"]
        return u * (1 - u) * (u - a)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        a = self.params["a"]
        w = u[..., 0]
        return (-3 * w * w + 2 * (1 + a) * w - a)[..., None, None]

    def potential(self, u):
        u = np.asarray(u, dtype=float)[..., 0]
        a = self.params["a"]
        return u**4 / 4 - (1 + a) * u**3 / 3 + a * u**2 / 2

    def _equilibrium_points(self):
        return [("zero", (0.0,)), ("a", (self.params["a"],)), ("one", (1.0,))]

    def endpoints(self):
        # state 1 on the left so that a < 1/2 gives a positive speed
        return np.array([1.0]), np.array([0.0])

    def kernel_params(self):
        return np.array([self.params["a"], 0.0, 0.0, 0.0])


class GradientDoubleWell(ReactionModel):
    """Two-component gradient system ``F = -grad V`` with a curved valley.

    ``V = (u1^2-1)^2/4 + tilt*(u1^3/3 - u1) + stiffness/2 * (u2 - bend*(1-u1^2))^2``
    has minima at (-1, 0) and (1, 0); ``V(1,0) - V(-1,0) = -4*tilt/3``.
    """

    name = "gradient_double_well"
    param_names = ("tilt", "bend", "stiffness")

    def potential(self, u):
        u = np.asarray(u, dtype=float)
        t, b, k = (self.params[n] for n in self.param_names)
        u1, u2 = u[..., 0], u[..., 1]
        w = u2 - b * (1 - u1**2)
        return (u1**2 - 1) ** 2 / 4 + t * (u1**3 / 3 - u1) + 0.5 * k * w * w

    def reaction(self, u):
        u = np.asarray(u, dtype=float)
        t, b, k = (self.params[n] for n in self.param_names)
        u1, u2 = u[..., 0], u[..., 1]
        w = u2 - b * (1 - u1**2)
        g1 = u1**3 - u1 + t * (u1**2 - 1) + k * w * 2 * b * u1
        g2 = k * w
        return -np.stack([g1, g2], axis=-1)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        t, b, k = (self.params[n] for n in self.param_names)
        u1, u2 = u[..., 0], u[..., 1]
        w = u2 - b * (1 - u1**2)
        j = np.empty(u.shape[:-1] + (2, 2))
        j[..., 0, 0] = -(3 * u1**2 - 1 + 2 * t * u1 + k * (2 * b * u1) ** 2 + 2 * b * k * w)
        j[..., 0, 1] = -2 * b * k * u1
        j[..., 1, 0] = -2 * b * k * u1
        j[..., 1, 1] = -k
        return j

    def _equilibrium_points(self):
        return [("E_minus", (-1.0, 0.0)), ("E_plus", (1.0, 0.0))]

    def endpoints(self):
        return np.array([-1.0, 0.0]), np.array([1.0, 0.0])


MODELS = {
    cls.name: cls for cls in (ToyModel, LotkaVolterra, GinzburgLandau, Nagumo, GradientDoubleWell)
}


def make_model(name, **params):
    """Build a model from its registry name.

    ``lotka_volterra`` also accepts ``eps`` in place of ``mu`` (``mu = eps**2``).
    """
    try:
        cls = MODELS[name]
    except KeyError:
        raise ConfigurationError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    if cls is LotkaVolterra and "eps" in params:
        if "mu" in params:
            raise ConfigurationError("give either mu or eps for lotka_volterra, not both")
        params = dict(params)
        params["mu"] = float(params.pop("eps")) ** 2
    return cls(**params)


def eval_reaction(model, u):
    return model.reaction(u)


def eval_jacobian(model, u):
    return model.jacobian(u)


def rot_f(model, u, frame="canonical"):
    """Infinitesimal rotation ``d1 F2 - d2 F1`` of the reaction field.

    With ``frame="tl"`` the point ``u`` is given in transversal-longitudinal
    coordinates and the rotation of the transformed field is returned.
    """
    if model.dimension != 2:
        raise UnsupportedError("rot is only defined for two-component systems")
    if frame == "canonical":
        j = model.jacobian(u)
    elif frame == "tl":
        j = TL_MATRIX @ model.jacobian(from_tl(u)) @ TL_INVERSE
    else:
        raise ValueError(f"unknown frame {frame!r}")
    return j[..., 1, 0] - j[..., 0, 1]


def check_h3_symmetry(model, sample_count=200, seed=0):
    """Return ``(holds, max defect)`` of ``F(S u) = S F(u)`` on random samples."""
    if model.dimension != 2:
        raise UnsupportedError("the exchange symmetry needs two components")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-2.0, 2.0, size=(sample_count, 2))
    defect = float(np.max(np.abs(model.reaction(swap(u)) - swap(model.reaction(u)))))
    return defect < 1e-12, defect


def check_h4(Dbar, tol=1e-14):
    """``S Dbar = -Dbar S`` and ``Dbar != 0``."""
    Dbar = np.asarray(Dbar, dtype=float)
    if Dbar.shape != (2, 2):
        return False
    anti = np.max(np.abs(SWAP @ Dbar + Dbar @ SWAP))
    return bool(anti <= tol and np.max(np.abs(Dbar)) > tol)


def commutes_with_swap(D, tol=1e-14):
    D = np.asarray(D, dtype=float)
    return D.shape == (2, 2) and bool(np.max(np.abs(D @ SWAP - SWAP @ D)) <= tol)


@dataclass(frozen=True)
class DiffusionSpec:
    D: np.ndarray
    Dbar: np.ndarray

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        Dbar = np.atleast_2d(np.asarray(self.Dbar, dtype=float))
        if D.shape != Dbar.shape or D.shape[0] != D.shape[1]:
            raise ConfigurationError("D and Dbar must be square matrices of equal size")
        if not np.allclose(D, D.T, atol=1e-14, rtol=0):
            raise ConfigurationError("D must be symmetric")
        if not np.allclose(Dbar, Dbar.T, atol=1e-14, rtol=0):
            raise ConfigurationError("Dbar must be symmetric")
        if np.min(np.linalg.eigvalsh(D)) <= 0:
            raise ConfigurationError("D must be positive definite")
        D.setflags(write=False)
        Dbar.setflags(write=False)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Dbar", Dbar)

    @classmethod
    def identity(cls, dimension=2, d=1.0):
        Dbar = np.zeros((dimension, dimension))
        if dimension == 2:
            Dbar = np.diag([d, -d])
        return cls(np.eye(dimension), Dbar)

    def perturbed(self, eps):
        return self.D + eps * self.Dbar

    def satisfies_h4(self):
        return check_h4(self.Dbar)
