import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from esbgk.config import parse_config
from esbgk.relaxation import (
    TAU_BOLTZMANN,
    TAU_DEFAULT,
    RelaxationParams,
    TauModel,
    bgk_relaxation_step,
    prandtl,
    relax,
    relaxation_step,
    tau_default,
    transport_coefficients,
    update_moments,
    update_sigma,
)
from esbgk.solver import build_setup, make_solver
from esbgk.velocity import MomentSet, VelocityGrid, gaussian, maxwellian, moments, second_moment
from oracles import direct_moments


def one(rho=1.0, u=(0.0, 0.0), T=1.0):
    return MomentSet.from_primitive(np.array([rho]), np.array([u], dtype=float), np.array([T]))


def random_f(rng, grid, n):
    """Non-negative distributions: a few random blobs plus background noise."""
    f = rng.uniform(0.0, 0.05, (n, grid.size))
    for _ in range(3):
        c = rng.uniform(-2.0, 2.0, (n, 1, 2))
        w = rng.uniform(0.3, 1.5, (n, 1))
        f += rng.uniform(0.1, 1.0, (n, 1)) * np.exp(-np.sum((grid.points - c) ** 2, axis=-1) / (2 * w))
    return f


def test_tau_values():
    assert tau_default(one())[0] == pytest.approx(1.41372, abs=1e-5)
    assert TauModel(TAU_BOLTZMANN)(one())[0] == pytest.approx(1.45282, abs=1e-5)
    assert tau_default(one(rho=0.5))[0] == pytest.approx(0.70686, abs=1e-5)
    assert TAU_DEFAULT == pytest.approx(0.9 * np.pi / 2)


def test_tau_temperature_hook():
    m = one(rho=2.0, T=4.0)
    assert TauModel(1.0, omega=0.5)(m)[0] == pytest.approx(2.0 * 4.0**0.5)
    assert TauModel(1.0)(m)[0] == pytest.approx(2.0)


@pytest.mark.parametrize("kw", [dict(eps=0.0, nu=0.0, dt=1.0), dict(eps=1.0, nu=1.0, dt=1.0),
                                dict(eps=1.0, nu=-1.5, dt=1.0), dict(eps=1.0, nu=0.0, dt=0.0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        RelaxationParams(**kw)


def test_prandtl_identity_exact():
    m = MomentSet.from_primitive(np.array([0.3, 1.0, 7.0]), np.zeros((3, 2)), np.array([0.2, 1.0, 3.0]))
    for nu in (-1.0, -0.5, 0.0, 0.5, 0.9):
        mu, kappa = transport_coefficients(m, nu, TauModel())
        np.testing.assert_allclose(prandtl(mu, kappa, 2), 1.0 / (1.0 - nu), rtol=1e-15)


def test_update_sigma_limits(vgrid):
    m = one(1.2, (0.3, -0.1), 0.9)
    u = m.u[0]
    eq = 1.2 * (0.9 * np.eye(2) + np.outer(u, u))
    star = eq + np.array([[[0.2, 0.05], [0.05, -0.2]]])
    tau = TauModel()(m)[0]
    s = update_sigma(star, m, RelaxationParams(1e-14, 0.5, 0.01))
    np.testing.assert_allclose(s[0], eq, atol=1e-10)
    # (1 - nu) tau dt = eps gives the midpoint
    nu, dt = -1.0, 0.01
    s = update_sigma(star, m, RelaxationParams((1 - nu) * tau * dt, nu, dt))
    np.testing.assert_allclose(s[0], 0.5 * (star[0] + eq), rtol=1e-13)
    s = update_sigma(star, m, RelaxationParams(0.1, 1.0 - 1e-13, 0.01))
    np.testing.assert_allclose(s[0], star[0], atol=1e-12)
    np.testing.assert_allclose(s[0], s[0].T)


def test_homogeneous_maxwellian_is_fixed_point(vgrid):
    M = maxwellian(one(1.1, (0.2, 0.3), 0.8), vgrid)
    for eps in (1.0, 1e-3, 1e-8):
        f, _ = relaxation_step(M, vgrid, RelaxationParams(eps, -1.0, 0.01))
        np.testing.assert_allclose(f, M, rtol=1e-9, atol=1e-15)


def test_update_moments_independent_of_eps(vgrid):
    f = random_f(np.random.default_rng(0), vgrid, 3)
    np.testing.assert_array_equal(update_moments(f, vgrid).as_array(), moments(f, vgrid).as_array())


def test_stiff_limit_projects_onto_gaussian(vgrid):
    f_star = random_f(np.random.default_rng(1), vgrid, 4)
    params = RelaxationParams(1e-300, 0.5, 0.01)
    m = update_moments(f_star, vgrid)
    sig = update_sigma(second_moment(f_star, vgrid), m, params)
    f, G, _ = relax(f_star, m, sig, params, vgrid, return_info=True)
    np.testing.assert_allclose(f, G, rtol=1e-14, atol=1e-300)


def test_nu_zero_matches_classical_bgk(vgrid):
    f_star = random_f(np.random.default_rng(2), vgrid, 16)
    for eps in (1.0, 1e-2, 1e-6):
        params = RelaxationParams(eps, 0.0, 0.02)
        a, _ = relaxation_step(f_star, vgrid, params)
        b, _ = bgk_relaxation_step(f_star, vgrid, params)
        assert np.max(np.abs(a - b)) <= 1e-13


def test_riemann_update_moments_matches_direct_sum():
    cfg = parse_config(None, dict(scenario="riemann", nx=40, nv=12))
    setup = build_setup(cfg)
    solver = make_solver(cfg, setup)
    f_star = solver.transport(setup.f0, solver.dt)
    U = update_moments(f_star, setup.vgrid).as_array()
    ref = direct_moments(f_star, setup.vgrid.points, setup.vgrid.weight)
    np.testing.assert_allclose(U, ref, rtol=1e-12, atol=1e-14)
    assert U[:, 0].sum() == pytest.approx(f_star.sum() * setup.vgrid.weight, rel=1e-13)


# --- properties -----------------------------------------------------------------

eps_values = st.sampled_from([1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8])


@given(st.integers(0, 2**32 - 1), eps_values, st.sampled_from([-1.0, -0.5, 0.0, 0.5, 0.9]),
       st.floats(1e-3, 0.1))
def test_relaxation_conserves_moments(seed, eps, nu, dt):
    g = VelocityGrid(2, 6.0, 24)
    f_star = random_f(np.random.default_rng(seed), g, 4)
    f, _ = relaxation_step(f_star, g, RelaxationParams(eps, nu, dt))
    U0 = moments(f_star, g).as_array()
    np.testing.assert_allclose(moments(f, g).as_array(), U0, rtol=1e-10, atol=1e-10 * np.abs(U0).max())


@given(st.integers(0, 2**32 - 1), eps_values, st.sampled_from([-1.0, -0.5, 0.0, 0.5, 0.9]))
def test_relaxation_positive_and_bounded(seed, eps, nu):
    g = VelocityGrid(2, 6.0, 24)
    f_star = random_f(np.random.default_rng(seed), g, 4)
    params = RelaxationParams(eps, nu, 0.05)
    m = update_moments(f_star, g)
    sig = update_sigma(second_moment(f_star, g), m, params)
    f, G, _ = relax(f_star, m, sig, params, g, return_info=True)
    bound = np.maximum(f_star.max(axis=-1), G.max(axis=-1))
    assert np.all(f >= 0.0)
    assert np.all(f.max(axis=-1) <= bound * (1 + 1e-14))


@pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-4, 1e-6, 1e-8])
def test_eps_uniform_homogeneous_run(eps):
    g = VelocityGrid(2, 6.0, 24)
    f = random_f(np.random.default_rng(3), g, 8)
    params = RelaxationParams(eps, -1.0, 0.01)
    for _ in range(100):
        f, _ = relaxation_step(f, g, params)
        assert np.all(np.isfinite(f))
        assert f.min() >= -1e-12


def test_gaussian_carries_relaxed_second_moment(vgrid):
    m0 = MomentSet.from_primitive(np.array([1.0, 0.7]), np.array([[0.3, -0.2], [0.0, 0.5]]), np.array([1.0, 0.8]))
    theta = np.array([[[1.3, 0.2], [0.2, 0.7]], [[0.6, -0.1], [-0.1, 1.0]]])
    f_star = gaussian(m0, theta, vgrid)
    params = RelaxationParams(0.3, -0.5, 0.05)
    m = update_moments(f_star, vgrid)
    sig = update_sigma(second_moment(f_star, vgrid), m, params)
    _, G, _ = relax(f_star, m, sig, params, vgrid, return_info=True)
    np.testing.assert_allclose(moments(G, vgrid).as_array(), m.as_array(), rtol=1e-12, atol=1e-13)
    u = m.u
    Tc = (1 - params.nu) * m.T[:, None, None] * np.eye(2) + params.nu * (
        sig / m.rho[:, None, None] - u[:, :, None] * u[:, None, :])
    expected = m.rho[:, None, None] * (Tc + u[:, :, None] * u[:, None, :])
    np.testing.assert_allclose(second_moment(G, vgrid), expected, rtol=1e-9, atol=1e-10)
