import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import I2, LV_EPS, TOY_MUS, lv_grid, toy_front, toy_grid
from frontspeed import grid as gridmod
from frontspeed.asymptotics import theta, toy_explicit_front
from frontspeed.errors import ConfigurationError, NonConvergenceError
from frontspeed.front_solver import (
    NewtonOptions,
    auto_half_length,
    continue_in_parameter,
    front_speed_quadrature,
    interior_residual_norm,
    rotating_fronts,
    solve_standing_front,
    solve_travelling_front,
)
from frontspeed.grid import build_grid, grid_with_spacing
from frontspeed.models import make_model, swap

# grid


def test_build_grid_examples():
    assert build_grid(30, 601).h == pytest.approx(0.1)
    assert build_grid(120 / 0.2, 2401).h == pytest.approx(0.5)
    with pytest.raises(ConfigurationError):
        build_grid(30, 600)
    with pytest.raises(ConfigurationError):
        build_grid(-1, 601)


def test_grid_nodes_antisymmetric():
    g = build_grid(7.3, 201)
    assert np.array_equal(g.x[::-1], -g.x)
    assert g.x[g.center] == 0.0


def test_grid_with_spacing():
    g = grid_with_spacing(10.0, 0.03)
    assert g.node_count % 2 == 1 and g.h <= 0.03


@pytest.mark.parametrize("order", [2, 4, 6, 8])
def test_stencil_orders(order):
    errs = []
    for n in (21, 41):
        g = build_grid(1.0, n)
        f = np.sin(2 * g.x)
        keep = np.abs(g.x) <= 0.5 + 1e-12  # same physical points on both grids
        e1 = (gridmod.derivative(f, g.h, order) - 2 * np.cos(2 * g.x))[keep]
        e2 = (gridmod.second_derivative(f, g.h, order) + 4 * f)[keep]
        errs.append((np.max(np.abs(e1)), np.max(np.abs(e2))))
    for k in range(2):
        rate = math.log2(errs[0][k] / errs[1][k])
        assert rate == pytest.approx(order, abs=0.1)


def test_quadratures_integrate_polynomials():
    g = build_grid(2.0, 41)
    f = g.x**3 + g.x**2
    assert gridmod.simpson_weights(g) @ f == pytest.approx(16 / 3, rel=1e-13)
    assert gridmod.halfline_weights(g) @ np.ones(g.node_count) == pytest.approx(2.0)


# standing fronts


def test_toy_explicit_front_mu_half():
    f = toy_front(0.5)
    exact = toy_explicit_front(0.5, toy_grid())
    assert np.max(np.abs(f.values - exact.values)) < 1e-8
    assert abs(f.speed) < 1e-9


@pytest.mark.parametrize("mu", TOY_MUS)
def test_toy_invariants(mu):
    f = toy_front(mu)
    assert f.residual_norm < 1e-10
    assert f.symmetry_defect() < 1e-9
    assert np.allclose(f.values[0], [1, 0]) and np.allclose(f.values[-1], [0, 1])
    assert abs(front_speed_quadrature(f.model, f)) < 1e-9


def test_second_order_convergence():
    m = make_model("toy", mu=0.5)
    errs = []
    for n in (401, 801, 1601):
        g = build_grid(40, n)
        sol = solve_standing_front(m, I2, g, order=2)
        errs.append(np.max(np.abs(sol.values - toy_explicit_front(0.5, g).values)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.6 < r < 4.4 for r in ratios), ratios


def test_boundary_defect_decays_with_length():
    m = make_model("toy", mu=1.0)
    h = 0.05
    short = solve_standing_front(m, I2, grid_with_spacing(10.0, h))
    long = solve_standing_front(m, I2, grid_with_spacing(20.0, h))
    assert long.boundary_defect * 100 <= short.boundary_defect


def test_lv_front_bounds_and_monotonicity():
    eps = 0.3
    f = solve_standing_front(make_model("lotka_volterra", eps=eps), I2, lv_grid(eps))
    v = f.tl[1:-1]
    assert np.all(v[:, 0] <= 1.0 + 1e-12)
    assert np.all(v[:, 0] >= 1.0 - eps**2 / 2 - 1e-12)
    assert np.all(np.diff(f.tl[:, 1]) >= 0)


def test_lv_front_close_to_theta():
    eps = 0.2
    g = lv_grid(eps)
    f = solve_standing_front(make_model("lotka_volterra", eps=eps), I2, g)
    assert np.max(np.abs(f.tl[:, 1] - theta.value(eps * g.x))) < 0.5 * eps


# travelling fronts


def test_nagumo_speed():
    m = make_model("nagumo", a=0.25)
    g = build_grid(40, 1601)
    f = solve_travelling_front(m, np.eye(1), g)
    exact = (1 - 2 * 0.25) / math.sqrt(2)
    assert f.speed == pytest.approx(exact, abs=1e-6)
    assert front_speed_quadrature(m, f) == pytest.approx(f.speed, abs=1e-6)
    # closed-form profile, up to the translation fixed by the phase condition
    x0 = g.x[np.argmin(np.abs(f.values[:, 0] - 0.5))]
    assert np.max(np.abs(f.values[:, 0] - 1 / (1 + np.exp((g.x - x0) / math.sqrt(2))))) < 0.05


def test_toy_travelling_speed_zero():
    f = solve_travelling_front(make_model("toy", mu=0.5), I2, toy_grid())
    assert abs(f.speed) < 1e-9


@pytest.mark.parametrize("tilt", [0.05, 0.1, -0.15])
def test_gradient_speed_from_potential(tilt):
    m = make_model("gradient_double_well", tilt=tilt, bend=0.5, stiffness=2.0)
    g = build_grid(40, 1601)
    f = solve_travelling_front(m, I2, g)
    e_minus, e_plus = m.endpoints()
    dphi = f.derivative()
    norm2 = gridmod.inner(dphi, dphi, gridmod.trapezoid_weights(g))
    assert f.speed == pytest.approx((m.potential(e_plus) - m.potential(e_minus)) / norm2, abs=1e-6)
    assert front_speed_quadrature(m, f) == pytest.approx(f.speed, abs=1e-6)


def test_gl_fronts_opposite_speeds():
    m = make_model("ginzburg_landau_polar", eps=0.1, omega=0.5)
    L = auto_half_length(m, I2)
    g = grid_with_spacing(L, 0.1)
    up, down = rotating_fronts(m, I2, g)
    assert up.speed * down.speed < 0
    for f in (up, down):
        assert f.residual_norm < 1e-10
        _, th = m.to_polar(f.values)
        assert abs(abs(th[-1] - th[0]) - math.pi) < 1e-9


# continuation and failures


def test_continuation_toy():
    out = continue_in_parameter(make_model("toy", mu=0.25), I2, toy_grid(), "mu", TOY_MUS)
    assert len(out) == 5
    for mu, f in zip(TOY_MUS, out):
        assert np.max(np.abs(f.values - toy_explicit_front(mu, toy_grid()).values)) < 1e-7


def test_continuation_lv_with_scaled_domain():
    out = continue_in_parameter(make_model("lotka_volterra", eps=0.4), I2, lv_grid, "eps", LV_EPS)
    assert len(out) == 4
    for eps, f in zip(LV_EPS, out):
        assert f.residual_norm < 1e-10
        assert f.grid.half_length * eps == pytest.approx(24.0)


def test_continuation_empty():
    assert continue_in_parameter(make_model("toy", mu=0.5), I2, toy_grid(), "mu", []) == []


def test_continuation_unknown_parameter():
    with pytest.raises(ConfigurationError):
        continue_in_parameter(make_model("toy", mu=0.5), I2, toy_grid(), "nu", [1.0])


def test_nonconvergence_is_reported():
    m = make_model("toy", mu=0.5)
    g = build_grid(40, 401)
    with pytest.raises(NonConvergenceError) as info:
        solve_standing_front(m, I2, g, options=NewtonOptions(max_iter=1, accept=1e-14))
    assert info.value.iterations >= 1


def test_standing_requires_two_components():
    with pytest.raises(ConfigurationError):
        solve_standing_front(make_model("nagumo", a=0.25), np.eye(1), toy_grid())


@settings(max_examples=25)
@given(shift=st.floats(-0.4, 0.4))
def test_interior_residual_detects_shifted_profile(shift):
    # a shifted exact front is still a solution; a stretched one is not
    g = build_grid(20, 401)
    v = np.column_stack([np.ones(g.node_count), np.tanh(0.5 * math.sqrt(0.5) * (g.x - shift))])
    vals = v @ np.array([[0.5, 0.5], [-0.5, 0.5]])
    m = make_model("toy", mu=0.5)
    assert interior_residual_norm(m, I2, g, vals, 0.0) < 1e-5
    stretched = np.column_stack([np.ones(g.node_count), np.tanh(0.6 * (g.x - shift))]) @ np.array(
        [[0.5, 0.5], [-0.5, 0.5]]
    )
    assert interior_residual_norm(m, I2, g, stretched, 0.0) > 1e-3


def test_symmetry_is_verified_not_imposed():
    f = toy_front(2.0)
    assert np.max(np.abs(f.values[::-1] - swap(f.values))) == pytest.approx(f.symmetry_defect())
