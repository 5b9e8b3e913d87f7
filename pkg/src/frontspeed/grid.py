"""Uniform 1-D grids, centred finite-difference stencils and quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError


@dataclass(frozen=True)
class Grid:
    half_length: float
    node_count: int

    def __post_init__(self):
        if not self.half_length > 0:
            raise ConfigurationError(f"half_length must be positive, got {self.half_length}")
        if self.node_count < 3 or self.node_count % 2 == 0:
            raise ConfigurationError(f"node_count must be odd and >= 3, got {self.node_count}")

    @property
    def h(self):
        return 2.0 * self.half_length / (self.node_count - 1)

    @property
    def x(self):
        # exactly antisymmetric about the centre node
        return self.h * (np.arange(self.node_count) - self.center)

    @property
    def center(self):
        return (self.node_count - 1) // 2

    @property
    def interior(self):
        return slice(1, self.node_count - 1)

    def mirror(self, values):
        """Values at -x_i, i.e. the array reversed along the node axis."""
        return np.asarray(values)[::-1]


def build_grid(L, N):
    return Grid(float(L), int(N))


def grid_with_spacing(L, h):
    """Smallest odd-node grid on [-L, L] whose spacing does not exceed ``h``."""
    n = int(math.ceil(2 * L / h)) + 1
    if n % 2 == 0:
        n += 1
    return Grid(float(L), n)


@lru_cache(maxsize=None)
def central_weights(order, derivative):
    """Weights of the centred stencil of accuracy ``order`` (even) for the
    given derivative, on offsets ``-order/2 .. order/2`` in units of h."""
    if order < 2 or order % 2:
        raise ConfigurationError(f"stencil order must be even and >= 2, got {order}")
    m = order // 2
    if derivative == 1 and order == 2:
        return np.array([-0.5, 0.0, 0.5])
    offsets = np.arange(-m, m + 1, dtype=float)
    vander = np.vander(offsets, 2 * m + 1, increasing=True).T
    rhs = np.zeros(2 * m + 1)
    rhs[derivative] = math.factorial(derivative)
    w = np.linalg.solve(vander, rhs)
    # exact symmetry of the stencil
    if derivative % 2 == 0:
        w = 0.5 * (w + w[::-1])
    else:
        w = 0.5 * (w - w[::-1])
    w.setflags(write=False)
    return w


def _stencil_apply(values, h, order, derivative, pad):
    values = np.asarray(values, dtype=float)
    w = central_weights(order, derivative)
    m = order // 2
    pad_width = [(m, m)] + [(0, 0)] * (values.ndim - 1)
    if pad == "edge":
        ext = np.pad(values, pad_width, mode="edge")
    else:
        ext = np.pad(values, pad_width, mode="constant")
    n = values.shape[0]
    out = np.zeros_like(values)
    for k, wk in enumerate(w):
        if wk != 0.0:
            out += wk * ext[k : k + n]
    return out / h**derivative


def derivative(values, h, order=2, pad="edge"):
    """First derivative along axis 0. ``pad="edge"`` continues the profile by
    its end values (fronts), ``pad="zero"`` by zeros (perturbations)."""
    return _stencil_apply(values, h, order, 1, pad)


def second_derivative(values, h, order=2, pad="edge"):
    return _stencil_apply(values, h, order, 2, pad)


def block_operator(n_nodes, h, order, D, c, diag_blocks=None):
    """Sparse matrix of ``c d/dx + D d2/dx2 + diag_blocks`` acting on
    node-interleaved vectors of ``n_nodes`` nodes, zero outside."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    dim = D.shape[0]
    w1 = central_weights(order, 1) / h
    w2 = central_weights(order, 2) / h**2
    m = order // 2
    eye = np.eye(dim)
    mats = []
    for k in range(-m, m + 1):
        block = w2[k + m] * D + c * w1[k + m] * eye
        if not np.any(block) or abs(k) >= n_nodes:
            continue
        shift = sp.eye(n_nodes, k=k, format="csr")
        mats.append(sp.kron(shift, block, format="csr"))
    op = mats[0]
    for extra in mats[1:]:
        op = op + extra
    if diag_blocks is not None:
        op = op + block_diagonal(diag_blocks)
    return op.tocsr()


def block_diagonal(blocks):
    blocks = np.asarray(blocks, dtype=float)
    n, d, _ = blocks.shape
    rows = (np.arange(n)[:, None, None] * d + np.arange(d)[None, :, None]).repeat(d, axis=2)
    cols = (np.arange(n)[:, None, None] * d + np.arange(d)[None, None, :]).repeat(d, axis=1)
    return sp.csr_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())), shape=(n * d, n * d))


def trapezoid_weights(grid):
    w = np.full(grid.node_count, grid.h)
    w[0] = w[-1] = 0.5 * grid.h
    return w


def simpson_weights(grid):
    n = grid.node_count
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * grid.h / 3.0


def halfline_weights(grid):
    """Trapezoid weights of the integral over [0, L]."""
    w = np.zeros(grid.node_count)
    c = grid.center
    w[c:] = grid.h
    w[c] = w[-1] = 0.5 * grid.h
    return w


def inner(f, g, weights):
    """Weighted L2 product of node-major arrays ``(N,)`` or ``(N, d)``."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    prod = f * g
    if prod.ndim > 1:
        prod = prod.reshape(prod.shape[0], -1).sum(axis=1)
    return float(weights @ prod)
