import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from esbgk.errors import CFLError, WallError
from esbgk.transport import (
    OUTFLOW,
    PERIODIC,
    BoundarySpec,
    Inflow,
    SpatialGrid,
    apply_diffusive_wall,
    cfl_dt,
    minmod,
    transport_step,
    van_leer,
    wall_maxwellian,
)
from esbgk.velocity import MomentSet, VelocityGrid, maxwellian, moments, second_moment
from oracles import cell_average_sine, periodic_shift_box

PER1 = BoundarySpec.uniform(PERIODIC, 1)


def unit_speed_grid():
    # nodes -1.5, -0.5, 0.5, 1.5; the tests follow the node with v_x = 1.5
    return VelocityGrid(2, 2.0, 4)


def advect_profile(profile, n, t_end, cfl, limiter="minmod"):
    """Advect ``profile`` with every velocity node; return the node with v_x = 1.5."""
    sg = SpatialGrid((-1.0,), (1.0,), (n,))
    vg = unit_speed_grid()
    x_lo = sg.lower[0] + sg.dx[0] * np.arange(n)
    f = np.repeat(profile(x_lo, x_lo + sg.dx[0])[:, None], vg.size, axis=1)
    speed = vg.speed_max
    steps = int(round(t_end * speed / (cfl * sg.dx[0])))
    dt = t_end / steps
    for _ in range(steps):
        f, _ = transport_step(f, sg, vg, PER1, dt, limiter)
    k = int(np.flatnonzero((vg.points[:, 0] == speed) & (vg.points[:, 1] == vg.nodes[0]))[0])
    return f[:, k], x_lo, sg.dx[0], speed


def l1_order(errors, ns):
    return np.polyfit(np.log(ns), np.log(errors), 1)[0] * -1


def test_cfl_dt_examples():
    sg = SpatialGrid((-1.0,), (1.0,), (200,))
    assert cfl_dt(sg, 8.0, 0.8) == pytest.approx(0.001)
    assert cfl_dt(SpatialGrid((0.0,), (2.0,), (2,)), 1.0, 1.0) == pytest.approx(1.0)
    assert cfl_dt(SpatialGrid((0.0, 0.0), (1.0, 2.0), (10, 10)), 1.0, 1.0) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        cfl_dt(sg, 1.0, 1.5)


def test_cfl_violation_raises():
    sg = SpatialGrid((-1.0,), (1.0,), (10,))
    vg = VelocityGrid(2, 4.0, 8)
    f = np.ones((10, vg.size))
    with pytest.raises(CFLError):
        transport_step(f, sg, vg, PER1, dt=1.0)


def test_constant_state_unchanged():
    sg = SpatialGrid((-1.0,), (1.0,), (16,))
    vg = VelocityGrid(2, 4.0, 8)
    f = np.tile(np.linspace(0.1, 1.0, vg.size), (16, 1))
    f_star, flux = transport_step(f, sg, vg, PER1, cfl_dt(sg, vg.v_max, 0.5))
    np.testing.assert_allclose(f_star, f, rtol=1e-15)
    np.testing.assert_allclose(flux, 0.0, atol=1e-12)


def test_smooth_sine_second_order():
    errs, ns = [], [50, 100, 200]
    for n in ns:
        profile = lambda lo, hi: 1.0 + 0.5 * cell_average_sine(lo, hi, 0.0)
        num, x_lo, h, speed = advect_profile(profile, n, 2.0 / 1.5, cfl=0.5)
        exact = 1.0 + 0.5 * cell_average_sine(x_lo, x_lo + h, speed * (2.0 / 1.5))
        errs.append(np.sum(np.abs(num - exact)) * h)
    assert l1_order(errs, ns) >= 1.8


def test_square_pulse_translates():
    errs, ns = [], [50, 100, 200, 400]
    for n in ns:
        profile = lambda lo, hi: periodic_shift_box(lo, hi, -0.5, 0.0, 0.0)
        t_end = 0.4
        num, x_lo, h, speed = advect_profile(profile, n, t_end, cfl=0.5)
        exact = periodic_shift_box(x_lo, x_lo + h, -0.5, 0.0, speed * t_end)
        errs.append(np.sum(np.abs(num - exact)) * h)
        assert num.min() >= -1e-14 and num.max() <= 1 + 1e-14
        # mass moves with the exact pulse
        assert np.sum(num * (x_lo + 0.5 * h)) * h == pytest.approx(np.sum(exact * (x_lo + 0.5 * h)) * h, abs=5e-3)
    assert errs[-1] < errs[0]
    # limited schemes converge at a fractional order on discontinuities
    assert 0.5 <= l1_order(errs, ns) <= 1.2


def test_van_leer_is_also_second_order():
    errs, ns = [], [50, 100, 200]
    for n in ns:
        profile = lambda lo, hi: 1.0 + 0.5 * cell_average_sine(lo, hi, 0.0)
        num, x_lo, h, speed = advect_profile(profile, n, 2.0 / 1.5, 0.5, limiter="vanleer")
        exact = 1.0 + 0.5 * cell_average_sine(x_lo, x_lo + h, speed * (2.0 / 1.5))
        errs.append(np.sum(np.abs(num - exact)) * h)
    assert l1_order(errs, ns) >= 1.9


def test_limiters():
    a = np.array([1.0, -1.0, 2.0, 0.0, 3.0])
    b = np.array([2.0, -3.0, -1.0, 1.0, 1.0])
    np.testing.assert_array_equal(minmod(a, b), [1.0, -1.0, 0.0, 0.0, 1.0])
    np.testing.assert_allclose(van_leer(a, b), [4 / 3, -1.5, 0.0, 0.0, 1.5])


def test_sigma_flux_is_second_moment_of_divergence():
    sg = SpatialGrid((-1.0,), (1.0,), (20,))
    vg = VelocityGrid(2, 4.0, 8)
    x = sg.centers()
    m = MomentSet.from_primitive(1 + 0.3 * np.sin(np.pi * x), np.stack([0.2 * np.cos(np.pi * x), 0 * x], -1),
                                 1 + 0.1 * np.cos(np.pi * x))
    f = maxwellian(m, vg)
    dt = cfl_dt(sg, vg.v_max, 0.5)
    f_star, flux = transport_step(f, sg, vg, PER1, dt)
    div = (f - f_star) / dt
    np.testing.assert_allclose(flux, second_moment(div, vg), rtol=1e-10, atol=1e-12)


def test_inflow_ghosts_feed_the_domain():
    sg = SpatialGrid((0.0,), (1.0,), (10,))
    vg = VelocityGrid(2, 5.0, 10)
    inflow = Inflow(2.0, (0.5, 0.0), 1.0)
    bc = BoundarySpec(((inflow, OUTFLOW),))
    f = maxwellian(MomentSet.from_primitive(np.ones(10), np.zeros((10, 2)), np.ones(10)), vg)
    dt = cfl_dt(sg, vg.v_max, 0.5)
    for _ in range(200):
        f, _ = transport_step(f, sg, vg, bc, dt)
    # the right-moving half near the inlet is the far-field half
    M_in = maxwellian(MomentSet.from_primitive(np.array([2.0]), np.array([[0.5, 0.0]]), np.array([1.0])), vg)[0]
    right = vg.points[:, 0] > 0
    np.testing.assert_allclose(f[0, right], M_in[right], rtol=1e-6)


# --- diffusive wall ---------------------------------------------------------------


def test_wall_equilibrium_is_unchanged():
    vg = VelocityGrid(2, 8.0, 32)
    T_w = 1.05
    f = maxwellian(MomentSet.from_primitive(np.array([1.0]), np.zeros((1, 2)), np.array([T_w])), vg)
    out = apply_diffusive_wall(f, (1.0, 0.0), T_w, vg)
    np.testing.assert_allclose(out, f, rtol=1e-12)
    f2 = 2.0 * f
    np.testing.assert_allclose(apply_diffusive_wall(f2, (0.0, -1.0), T_w, vg), f2, rtol=1e-12)


@pytest.mark.parametrize("normal", [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 1.0)])
def test_wall_zero_net_mass_flux(normal):
    vg = VelocityGrid(2, 8.0, 32)
    n = np.asarray(normal) / np.linalg.norm(normal)
    f = maxwellian(MomentSet.from_primitive(np.array([1.0]), (0.3 * n)[None], np.array([1.0])), vg)
    out = apply_diffusive_wall(f, normal, 1.05, vg)[0]
    vn = vg.points @ n
    flux = np.sum(out * vn) * vg.weight
    outgoing = np.sum(np.where(vn > 0, out * vn, 0.0)) * vg.weight
    assert abs(flux) <= 1e-13 * outgoing
    # the half travelling into the wall is untouched
    np.testing.assert_array_equal(out[vn > 0], f[0, vn > 0])


def test_wall_without_outgoing_flux_fails():
    vg = VelocityGrid(2, 4.0, 8)
    with pytest.raises(WallError):
        apply_diffusive_wall(np.zeros((1, vg.size)), (1.0, 0.0), 1.0, vg)


def test_closed_box_of_walls_conserves_mass():
    # 2-D periodic box with a solid square inside: walls must not create or destroy mass
    n = 16
    solid = np.zeros((n, n), dtype=bool)
    solid[6:10, 6:10] = True
    sg = SpatialGrid((-1.0, -1.0), (1.0, 1.0), (n, n), solid=solid)
    vg = VelocityGrid(2, 5.0, 12)
    bc = BoundarySpec.uniform(PERIODIC, 2, wall_T=1.2)
    X, Y = sg.mesh()
    m = MomentSet.from_primitive(1 + 0.2 * np.sin(np.pi * X), np.stack([0.3 + 0 * X, 0.1 + 0 * Y], -1), np.ones_like(X))
    f = maxwellian(m, vg)
    mass0 = moments(f[~solid], vg).rho.sum()
    dt = cfl_dt(sg, vg.v_max, 0.5)
    for _ in range(20):
        f_new, _ = transport_step(f, sg, vg, bc, dt)
        np.testing.assert_array_equal(f_new[solid], f[solid])
        f = f_new
    assert moments(f[~solid], vg).rho.sum() == pytest.approx(mass0, rel=1e-12)


def test_wall_maxwellian_unit_density():
    vg = VelocityGrid(2, 8.0, 32)
    assert np.sum(wall_maxwellian(vg, 1.05)) * vg.weight == pytest.approx(1.0, rel=1e-12)


# --- properties -----------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_periodic_transport_conserves(seed, cfl):
    rng = np.random.default_rng(seed)
    sg = SpatialGrid((-1.0,), (1.0,), (24,))
    vg = VelocityGrid(2, 3.0, 6)
    f = rng.uniform(0.0, 1.0, (24, vg.size))
    f_star, _ = transport_step(f, sg, vg, PER1, cfl_dt(sg, vg.v_max, cfl))
    np.testing.assert_allclose(moments(f_star, vg).as_array().sum(0), moments(f, vg).as_array().sum(0), rtol=1e-12,
                               atol=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
def test_minmod_transport_is_tvd(seed, cfl):
    rng = np.random.default_rng(seed)
    sg = SpatialGrid((-1.0,), (1.0,), (32,))
    vg = VelocityGrid(2, 3.0, 6)
    f = rng.uniform(0.0, 1.0, (32, vg.size))
    f_star, _ = transport_step(f, sg, vg, PER1, cfl_dt(sg, vg.v_max, cfl))

    def tv(g):
        return np.sum(np.abs(g - np.roll(g, 1, axis=0)), axis=0)

    assert np.all(tv(f_star) <= tv(f) + 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_solid_cells_never_change_and_never_leak(seed):
    rng = np.random.default_rng(seed)
    n = 12
    solid = rng.uniform(size=(n, n)) < 0.15
    sg = SpatialGrid((0.0, 0.0), (1.0, 1.0), (n, n), solid=solid)
    vg = VelocityGrid(2, 3.0, 6)
    f = rng.uniform(0.1, 1.0, (n, n, vg.size))
    # garbage in solid cells must not influence fluid cells
    g = f.copy()
    g[solid] = 1e6
    bc = BoundarySpec.uniform(PERIODIC, 2)
    dt = cfl_dt(sg, vg.v_max, 0.5)
    a, _ = transport_step(f, sg, vg, bc, dt)
    b, _ = transport_step(g, sg, vg, bc, dt)
    np.testing.assert_allclose(a[~solid], b[~solid], rtol=1e-13)
    np.testing.assert_array_equal(b[solid], g[solid])
