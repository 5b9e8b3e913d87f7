import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import I2, LV_EPS, lv_grid, toy_front, toy_grid
from frontspeed import asymptotics as asy
from frontspeed import grid as gridmod
from frontspeed import spectral
from frontspeed.errors import ConfigurationError
from frontspeed.front_solver import solve_standing_front
from frontspeed.grid import build_grid
from frontspeed.models import covector_to_tl, make_model

th = asy.theta

# constants against adaptive quadrature


def test_theta_prime_squared_constants():
    line, _ = quad(lambda y: th.d1(y) ** 2, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
    half, _ = quad(lambda y: th.d1(y) ** 2, 0, np.inf, epsabs=1e-14, epsrel=1e-13)
    assert abs(line - asy.THETA_PRIME_SQ_LINE) < 1e-10
    assert abs(half - asy.THETA_PRIME_SQ_HALF) < 1e-10
    assert asy.ALPHA == pytest.approx(1.5, abs=1e-15)


def test_theta_triple_constant():
    val, _ = quad(lambda y: th.value(y) * th.d1(y) * th.d2(y), 0, np.inf, epsabs=1e-14, epsrel=1e-13)
    assert abs(val - asy.THETA_TRIPLE_HALF) < 1e-10


@given(y=st.floats(-40, 40))
def test_theta_identities(y):
    t, t1, t2 = th(y)
    assert abs(t2 + 0.5 * t * (1 - t * t)) < 1e-14
    assert abs(t1 - 0.5 * (1 - t * t)) < 1e-14


# closed-form fronts


def test_toy_explicit_front_examples():
    g = toy_grid()
    f = asy.toy_explicit_front(1.0, g)
    assert np.allclose(f.tl[g.center], [1.0, 0.0], atol=0)
    assert asy.toy_explicit_front(0.5, g).residual_norm < 1e-10 * (1 + g.h**2)
    f4 = asy.toy_explicit_front(4.0, g)
    assert abs(f4.tl[0, 1] + 1) < 1e-10 and abs(f4.tl[-1, 1] - 1) < 1e-10
    with pytest.raises(ConfigurationError):
        asy.toy_explicit_front(0.0, g)


def test_lv_asymptotic_front_examples():
    g = lv_grid(0.2)
    f = asy.lv_asymptotic_front(0.2, g)
    assert f.tl[g.center, 0] == pytest.approx(0.98, abs=1e-15)
    assert np.allclose(f.tl[-1], [1.0, 1.0], atol=1e-9)
    with pytest.raises(ConfigurationError):
        asy.lv_asymptotic_front(0.7, g)


def _order(eps, err):
    return np.polyfit(np.log(eps), np.log(err), 1)[0]


def test_lv_asymptotic_front_orders():
    dt, dl = [], []
    for eps in LV_EPS:
        g = lv_grid(eps)
        num = solve_standing_front(make_model("lotka_volterra", eps=eps), I2, g)
        approx = asy.lv_asymptotic_front(eps, g)
        dt.append(np.max(np.abs(num.tl[:, 0] - approx.tl[:, 0])))
        dl.append(np.max(np.abs(num.tl[:, 1] - approx.tl[:, 1])))
    eps = np.array(LV_EPS)
    assert np.all(np.array(dt) < eps**3)
    assert np.all(np.array(dl) < eps)
    assert _order(eps, dt) > 2.8
    assert _order(eps, dl) > 0.8


def test_lv_asymptotic_adjoint(lv):
    g = lv_grid(0.2)
    psi, alpha = asy.lv_asymptotic_adjoint(0.2, g)
    psi_tl = covector_to_tl(psi)
    assert alpha == 1.5
    assert psi_tl[g.center, 0] == 0.0
    errs = []
    for eps in LV_EPS:
        ref = covector_to_tl(lv(eps).psi)[:, 1]
        approx = covector_to_tl(asy.lv_asymptotic_adjoint(eps, lv_grid(eps))[0])[:, 1]
        errs.append(np.max(np.abs(ref - approx)))
    assert _order(np.array(LV_EPS), errs) > 0.8


def test_lv_cbar_leading():
    assert asy.lv_cbar_leading(0.1) == pytest.approx(0.02, abs=1e-16)
    assert asy.lv_cbar_leading(0.0) == 0.0


def test_lv_ratio_converges_monotonically(lv):
    gaps = [abs(lv(eps).cbar_solvency / asy.lv_cbar_leading(eps) - 1) for eps in LV_EPS]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


# forced second-order equation


def test_homoclinic_zero_forcing():
    t = np.arange(0, 10, 0.01)
    assert np.all(asy.homoclinic_solution(lambda s: np.zeros_like(s), t) == 0.0)


@pytest.mark.parametrize("h", [0.01, 0.005])
def test_homoclinic_exponential(h):
    t = np.arange(0.0, 30.0 + h / 2, h)
    u = asy.homoclinic_solution(lambda s: np.exp(-s), t)
    assert np.max(np.abs(u + 0.5 * t * np.exp(-t))) < 1e-8
    assert u[0] == 0.0
    res = gridmod.second_derivative(u, h, 6, pad="zero") - u - np.exp(-t)
    assert np.max(np.abs(res[3:-3])) < 1e-7


POSITIVE_FORCINGS = {
    "exp": lambda s: np.exp(-s),
    "t_exp": lambda s: s * np.exp(-s),
    "sech2": lambda s: 1 / np.cosh(s) ** 2,
    "algebraic": lambda s: 1 / (1 + s * s),
    "gauss": lambda s: np.exp(-s * s),
}


@pytest.mark.parametrize("name", sorted(POSITIVE_FORCINGS))
def test_homoclinic_sign_opposition(name):
    t = np.arange(0, 20, 0.01)
    f = POSITIVE_FORCINGS[name]
    u = asy.homoclinic_solution(f, t)
    assert np.all(u[1:] < 0)
    # negated forcing flips the sign
    assert np.allclose(asy.homoclinic_solution(lambda s: -f(s), t), -u, atol=0)


def test_homoclinic_sign_warning_and_validation():
    t = np.arange(0, 5, 0.01)
    with pytest.warns(RuntimeWarning):
        asy.homoclinic_solution(lambda s: np.cos(s), t)
    with pytest.raises(ConfigurationError):
        asy.homoclinic_solution(lambda s: s, t + 1)


# toy transversal adjoint


def test_toy_adjoint_transversal_mu_one():
    assert np.max(np.abs(asy.toy_adjoint_transversal(1.0, toy_grid()))) == 0.0


@pytest.mark.parametrize("mu,sgn", [(0.25, -1), (0.5, -1), (2.0, 1), (4.0, 1)])
def test_toy_adjoint_transversal_sign(mu, sgn):
    g = toy_grid()
    psi_t = asy.toy_adjoint_transversal(mu, g)
    assert np.all(np.sign(psi_t[g.center + 1 :]) == sgn)
    assert np.array_equal(psi_t[::-1], -psi_t)


@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_toy_adjoint_transversal_matches_spectral(mu):
    f = toy_front(mu)
    psi = spectral.kernel_adjoint(spectral.assemble_adjoint(f), f)
    assert np.max(np.abs(covector_to_tl(psi)[:, 0] - asy.toy_adjoint_transversal(mu, f.grid))) < 1e-5


def test_toy_adjoint_transversal_small_grid_runs():
    # coarse grids still work and stay odd
    g = build_grid(10, 101)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        psi_t = asy.toy_adjoint_transversal(0.5, g)
    assert psi_t[g.center] == 0.0
    assert math.isfinite(float(np.sum(psi_t)))
