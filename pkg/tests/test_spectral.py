import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import I2, lv_grid, toy_front, toy_grid
from frontspeed import grid as gridmod
from frontspeed import spectral
from frontspeed.asymptotics import lv_asymptotic_adjoint
from frontspeed.errors import HypothesisViolation
from frontspeed.front_solver import solve_standing_front, solve_travelling_front
from frontspeed.grid import build_grid
from frontspeed.models import covector_to_tl, make_model, swap, to_tl


def psi_of(front):
    return spectral.kernel_adjoint(spectral.assemble_adjoint(front), front)


# oracles


@pytest.mark.parametrize("mu,bound", [(0.5, -0.5), (2.0, -1.0), (0.25, -0.25), (4.0, -1.0)])
def test_toy_essential_bound(mu, bound):
    ok, b = spectral.essential_spectrum_check(make_model("toy", mu=mu), I2)
    assert ok and abs(b - bound) < 1e-10


def test_lv_monostable_fails_h1():
    ok, b = spectral.essential_spectrum_check(make_model("lotka_volterra", mu=-0.1), I2)
    assert not ok and b > 0


def test_toy_operator_blocks_in_tl_frame():
    mu = 0.5
    f = toy_front(mu)
    g = f.grid
    p = np.column_stack([np.exp(-g.x**2), np.exp(-((g.x - 1) ** 2)) * np.sin(g.x)])
    lp = to_tl(spectral.assemble_linearized(f).apply(p))
    q = to_tl(p)
    q2 = gridmod.second_derivative(q, g.h, f.order, pad="zero")
    phi_l = f.tl[:, 1]
    expect_t = q2[:, 0] - q[:, 0]
    expect_l = q2[:, 1] + (mu - 1) * phi_l * q[:, 0] + 0.5 * mu * (1 - 3 * phi_l**2) * q[:, 1]
    assert np.max(np.abs(lp[1:-1, 0] - expect_t[1:-1])) < 1e-10
    assert np.max(np.abs(lp[1:-1, 1] - expect_l[1:-1])) < 1e-10


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_translation_residual(mu):
    f = toy_front(mu)
    r = spectral.assemble_linearized(f).apply(f.derivative())
    assert np.max(np.abs(r)) < 1e-6 * np.max(np.abs(f.derivative()))


def test_gradient_case_self_adjoint():
    m = make_model("gradient_double_well", tilt=0.0, bend=0.5, stiffness=2.0)
    f = solve_travelling_front(m, I2, toy_grid())
    assert abs(f.speed) < 1e-12
    op = spectral.assemble_linearized(f)
    assert abs(op.matrix - op.matrix.T).max() < 1e-12
    dphi = f.derivative()
    norm2 = gridmod.inner(dphi, dphi, gridmod.trapezoid_weights(f.grid))
    assert np.max(np.abs(psi_of(f) - dphi / norm2)) < 1e-8


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
def test_adjoint_is_transpose(mu):
    f = toy_front(mu)
    a = spectral.assemble_linearized(f).matrix
    b = spectral.assemble_adjoint(f).matrix
    assert abs(a.T - b).max() < 1e-12


def test_toy_mu_one_transversal_adjoint_vanishes():
    psi_tl = covector_to_tl(psi_of(toy_front(1.0)))
    assert np.max(np.abs(psi_tl[:, 0])) < 1e-8


@pytest.mark.parametrize("mu", [0.25, 0.5, 2.0, 4.0])
def test_toy_longitudinal_adjoint(mu):
    f = toy_front(mu)
    psi_tl = covector_to_tl(psi_of(f))
    dphi_l = to_tl(f.derivative())[:, 1]
    n = 3.0 / (2.0 * math.sqrt(mu))
    assert np.max(np.abs(psi_tl[:, 1] - n * dphi_l)) < 1e-6


@pytest.mark.parametrize("mu", [0.25, 0.5, 1.0, 2.0])
def test_adjoint_residual_and_normalisation(mu):
    f = toy_front(mu)
    adj = spectral.assemble_adjoint(f)
    psi = spectral.kernel_adjoint(adj, f)
    assert np.max(np.abs(adj.apply(psi))) < 1e-8
    simpson = gridmod.inner(psi, f.derivative(), gridmod.simpson_weights(f.grid))
    assert abs(simpson - 1.0) < 1e-8


@pytest.mark.parametrize("mu", [0.25, 0.5, 1.0, 2.0, 4.0])
def test_adjoint_kernel_symmetry(mu):
    psi = psi_of(toy_front(mu))
    assert np.max(np.abs(psi[::-1] + swap(psi))) < 1e-6


def test_lv_adjoint_leading_order():
    eps = 0.2
    g = lv_grid(eps)
    f = solve_standing_front(make_model("lotka_volterra", eps=eps), I2, g)
    approx, alpha = lv_asymptotic_adjoint(eps, g)
    defect = np.max(np.abs(covector_to_tl(psi_of(f))[:, 1] - covector_to_tl(approx)[:, 1]))
    assert alpha == 1.5
    assert defect < eps * np.max(np.abs(covector_to_tl(approx)[:, 1]))


# spectra


@pytest.mark.parametrize(
    "make",
    [
        lambda: toy_front(0.5),
        lambda: toy_front(2.0),
        lambda: solve_standing_front(make_model("lotka_volterra", eps=0.3), I2, lv_grid(0.3)),
    ],
    ids=["toy-0.5", "toy-2", "lv-0.3"],
)
def test_zero_eigenvalue_and_gap(make):
    f = make()
    rep = spectral.zero_multiplicity_and_gap(spectral.assemble_linearized(f), f)
    assert rep.converged
    assert rep.zero_eig_estimate < 1e-8
    assert rep.rightmost_nonzero_real_part < -0.01
    assert rep.passes
    assert rep.kernel_angle < 1e-8


def test_toy_spectrum_real():
    f = toy_front(0.5)
    rep = spectral.zero_multiplicity_and_gap(spectral.assemble_linearized(f), f)
    assert max(abs(v.imag) for v in rep.eigenvalues) < 1e-8
    assert rep.spectral_gap == pytest.approx(0.375, rel=1e-3)


def test_report_text_is_flat():
    f = toy_front(0.5)
    text = spectral.zero_multiplicity_and_gap(spectral.assemble_linearized(f), f).to_text()
    assert all("=" in line for line in text.splitlines())
    assert "h2=true" in text


def test_require_hypotheses_raises():
    rep = spectral.SpectralReport(0.1, 0.0, 1.0, 0.0, -1.0)
    with pytest.raises(HypothesisViolation):
        spectral.require_hypotheses(rep)
    rep = spectral.SpectralReport(-0.5, 0.1, 0.2, 0.0, -1.0)
    with pytest.raises(HypothesisViolation):
        spectral.require_hypotheses(rep)


def test_translation_mode_matches_derivative():
    f = toy_front(2.0)
    t = spectral.translation_mode(spectral.assemble_linearized(f), f)
    assert np.max(np.abs(t - f.derivative())) < 1e-6


def test_subspace_iteration_on_diagonal():
    import scipy.sparse as sp

    m = sp.diags([-3.0, -1e-3, -2.0, -0.5, -5.0]).tocsr()
    vals, _, _, converged = spectral.subspace_inverse_iteration(m, count=3)
    assert converged
    # only the two values nearest the shift are converged quantities
    assert vals[0].real == pytest.approx(-1e-3, rel=1e-9)
    assert vals[1].real == pytest.approx(-0.5, rel=1e-6)


# adjoint pairing property

_PAIR_FRONT = {}


def _pair_setup():
    if not _PAIR_FRONT:
        g = build_grid(10, 201)
        f = solve_travelling_front(make_model("lotka_volterra", mu=0.2), np.diag([1.0, 1.7]), g)
        _PAIR_FRONT["ops"] = (f, spectral.assemble_linearized(f), spectral.assemble_adjoint(f))
    return _PAIR_FRONT["ops"]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), width=st.integers(5, 60))
def test_adjoint_pairing(seed, width):
    f, op, adj = _pair_setup()
    rng = np.random.default_rng(seed)
    n = f.grid.node_count
    a = np.zeros((n, 2))
    b = np.zeros((n, 2))
    start = rng.integers(1, n - 1 - width)
    a[start : start + width] = rng.standard_normal((width, 2))
    b[start : start + width] = rng.standard_normal((width, 2))
    w = gridmod.trapezoid_weights(f.grid)
    lhs = gridmod.inner(op.apply(a), b, w)
    rhs = gridmod.inner(a, adj.apply(b), w)
    assert abs(lhs - rhs) < 1e-10
