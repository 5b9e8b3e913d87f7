import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontspeed.errors import ConfigurationError, UnsupportedError
from frontspeed.models import (
    MODELS,
    DiffusionSpec,
    check_h3_symmetry,
    check_h4,
    eval_jacobian,
    eval_reaction,
    from_tl,
    make_model,
    rot_f,
    swap,
    to_tl,
)

BUILTIN = {
    "toy": {"mu": 0.5},
    "lotka_volterra": {"mu": 0.09},
    "ginzburg_landau_polar": {"eps": 0.1, "omega": 0.5},
    "nagumo": {"a": 0.25},
    "gradient_double_well": {"tilt": 0.1, "bend": 0.5, "stiffness": 2.0},
}


def fd_jacobian(model, u, step=1e-6):
    d = model.dimension
    j = np.empty((d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = step
        j[:, k] = (model.reaction(u + e) - model.reaction(u - e)) / (2 * step)
    return j


# oracle examples first


def test_toy_equilibrium_e1():
    assert np.allclose(eval_reaction(make_model("toy", mu=0.5), [1.0, 0.0]), 0.0, atol=0)


def test_lv_origin_and_coexistence():
    assert np.allclose(eval_reaction(make_model("lotka_volterra", mu=0.3), [0.0, 0.0]), 0.0)
    f = eval_reaction(make_model("lotka_volterra", mu=1.0), [1 / 3, 1 / 3])
    assert np.max(np.abs(f)) < 1e-15


@pytest.mark.parametrize("mu", [0.25, 0.5, 2.0])
def test_toy_jacobian_at_e1(mu):
    # the analytic value (mu - 1) off the diagonal, confirmed by finite differences
    j = eval_jacobian(make_model("toy", mu=mu), [1.0, 0.0])
    assert np.allclose(j, [[-1.0, mu - 1.0], [0.0, -mu]], atol=1e-15)
    assert np.allclose(j, fd_jacobian(make_model("toy", mu=mu), np.array([1.0, 0.0])), atol=1e-8)


@pytest.mark.parametrize("mu", [0.04, 0.3, 1.0])
def test_lv_jacobian_at_e1(mu):
    j = eval_jacobian(make_model("lotka_volterra", mu=mu), [1.0, 0.0])
    assert np.allclose(j, [[-1.0, -1.0 - mu], [0.0, -mu]], atol=1e-15)


@given(v_l=st.floats(-3, 3), mu=st.floats(0.05, 5))
def test_toy_rot_in_tl_frame(v_l, mu):
    r = rot_f(make_model("toy", mu=mu), np.array([1.0, v_l]), frame="tl")
    assert r == pytest.approx((mu - 1.0) * v_l, abs=1e-12)


@given(v_t=st.floats(-2, 2), v_l=st.floats(-2, 2), mu=st.floats(-0.5, 2))
def test_lv_rot_in_tl_frame(v_t, v_l, mu):
    r = rot_f(make_model("lotka_volterra", mu=mu), np.array([v_t, v_l]), frame="tl")
    assert r == pytest.approx(-(1.0 + mu) * v_l, abs=1e-12)


def test_gradient_rot_vanishes():
    m = make_model("gradient_double_well", tilt=0.2, bend=0.7, stiffness=3.0)
    u = np.random.default_rng(1).uniform(-2, 2, (50, 2))
    assert np.max(np.abs(rot_f(m, u))) < 1e-14


def test_tl_transform_examples():
    assert np.array_equal(to_tl([1.0, 0.0]), [1.0, -1.0])
    u = np.array([0.3, 0.7])
    assert np.allclose(from_tl(to_tl(u)), u, atol=1e-16)
    v = to_tl([0.2, 0.9])
    assert np.allclose(to_tl(swap([0.2, 0.9])), [v[0], -v[1]])


def test_h3_examples():
    for name, params in (("toy", {"mu": 0.7}), ("lotka_volterra", {"mu": 0.2})):
        ok, defect = check_h3_symmetry(make_model(name, **params))
        assert ok and defect < 1e-12


def test_h3_counterexample():
    # gradient well is symmetric under u1 -> -u1, not under the exchange
    ok, defect = check_h3_symmetry(make_model("gradient_double_well", tilt=0.0, bend=0.5, stiffness=2.0))
    assert not ok and defect > 0
    ok, _ = check_h3_symmetry(make_model("ginzburg_landau_polar", eps=0.1, omega=0.5))
    assert not ok


def test_equilibria_toy_labels():
    m = make_model("toy", mu=0.5)
    assert m.equilibrium("E1").label == "stable"
    assert m.equilibrium("E2").label == "stable"
    assert m.equilibrium("E0").label == "saddle"


def test_equilibria_lv_monostable():
    m = make_model("lotka_volterra", mu=-0.5)
    assert m.equilibrium("E0").label == "stable"
    assert m.equilibrium("E1").label == "saddle"
    assert m.equilibrium("E2").label == "saddle"


def test_lv_coexistence_point():
    assert np.allclose(make_model("lotka_volterra", mu=1.0).equilibrium("E0").point, [1 / 3, 1 / 3])


def test_lv_eps_parameterisation():
    assert make_model("lotka_volterra", eps=0.2).params["mu"] == pytest.approx(0.04)
    with pytest.raises(ConfigurationError):
        make_model("lotka_volterra", eps=0.2, mu=0.04)


# properties


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_jacobian_matches_finite_differences(name):
    m = make_model(name, **BUILTIN[name])
    rng = np.random.default_rng(0)
    for u in rng.uniform(-1.5, 1.5, (100, m.dimension)):
        exact = m.jacobian(u)
        approx = fd_jacobian(m, u)
        scale = max(1.0, np.max(np.abs(exact)))
        assert np.max(np.abs(exact - approx)) / scale < 1e-5


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_equilibria_are_zeros(name):
    m = make_model(name, **BUILTIN[name])
    for eq in m.equilibria():
        assert np.linalg.norm(m.reaction(eq.point)) < 1e-12, eq.name


@settings(max_examples=50)
@given(
    name=st.sampled_from(["toy", "lotka_volterra", "ginzburg_landau_polar", "gradient_double_well"]),
    u1=st.floats(-2, 2),
    u2=st.floats(-2, 2),
)
def test_rot_frame_invariance(name, u1, u2):
    m = make_model(name, **BUILTIN[name])
    u = np.array([u1, u2])
    assert rot_f(m, u) == pytest.approx(rot_f(m, to_tl(u), frame="tl"), abs=1e-10)


def test_rot_requires_two_components():
    with pytest.raises(UnsupportedError):
        rot_f(make_model("nagumo", a=0.25), np.array([0.3]))


def test_registry_and_errors():
    assert set(MODELS) == set(BUILTIN)
    with pytest.raises(ConfigurationError):
        make_model("brusselator")
    with pytest.raises(ConfigurationError):
        make_model("toy", mu=1.0, nu=2.0)
    with pytest.raises(ConfigurationError):
        make_model("toy")
    m = make_model("toy", mu=0.5)
    with pytest.raises(AttributeError):
        m.foo = 1


def test_h4_and_diffusion_spec():
    assert check_h4(np.diag([1.0, -1.0]))
    assert not check_h4(np.diag([1.0, 0.0]))
    assert not check_h4(np.zeros((2, 2)))
    spec = DiffusionSpec.identity()
    assert spec.satisfies_h4()
    assert np.allclose(spec.perturbed(0.1), np.diag([1.1, 0.9]))
    with pytest.raises(ConfigurationError):
        DiffusionSpec(np.diag([1.0, -1.0]), np.zeros((2, 2)))
    with pytest.raises(ConfigurationError):
        DiffusionSpec(np.array([[1.0, 0.2], [0.0, 1.0]]), np.zeros((2, 2)))


def test_gl_polar_round_trip():
    m = make_model("ginzburg_landau_polar", eps=0.1, omega=0.5)
    r, th = np.array([0.3, -0.2]), np.array([0.1, 2.0])
    r2, th2 = m.to_polar(m.from_polar(r, th))
    assert np.allclose(r2, r) and np.allclose(th2, th)
    for eq in m.equilibria():
        if eq.name.startswith("A_"):
            assert eq.label == "stable"
        if eq.name.startswith("S"):
            assert eq.label == "saddle"
