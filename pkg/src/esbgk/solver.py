"""Time loop: transport, then closed-form ES-BGK relaxation, repeated.

One step of the first-order IMEX scheme is::

    f*      = f^n - dt v . grad_x f^n            (transport_step)
    U^{n+1} = moments(f*)                       (update_moments)
    tau     = tau_model(U^{n+1})
    Sigma   = relaxed second moment              (update_sigma)
    f^{n+1} = a f* + (1 - a) G[U^{n+1}, Sigma]   (relax)
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from . import output
from .config import ScenarioConfig
from .diagnostics import (
    RunLog,
    conserved_totals,
    equilibrium_distance,
    oscillation_functional,
    time_derivative_norm,
)
from .errors import ESBGKError, SPDError
from .fluid import TransportCoeffs, advance
from .relaxation import RelaxationParams, TauModel, bgk_relaxation_step, relaxation_step
from .transport import OUTFLOW, PERIODIC, BoundarySpec, Inflow, SpatialGrid, cfl_dt, transport_step
from .velocity import MomentSet, VelocityGrid, mass_defect, maxwellian, moments, thermal_vmax

log = logging.getLogger(__name__)


class SimulationError(ESBGKError):
    """A module error raised inside the time loop, tagged with its step."""

    def __init__(self, step, cause):
        cells = getattr(cause, "cells", ())
        where = f" at cell(s) {list(cells)}" if cells else ""
        super().__init__(f"step {step}: {cause}{where}")
        self.step = step
        self.cells = cells
        self.cause = cause


class KineticSolver:
    """First-order IMEX solver for the ES-BGK (or BGK) kinetic equation.

    Parameters
    ----------
    sgrid, vgrid : SpatialGrid, VelocityGrid
    bc : BoundarySpec
    eps, nu : float
        Knudsen number and Prandtl parameter.
    tau_model : TauModel
    cfl : float
        Fraction of the transport stability limit used for ``dt``.
    model : {"esbgk", "bgk"}
        ``"bgk"`` relaxes toward the Maxwellian built from the moments only.
    """

    def __init__(self, sgrid, vgrid, bc, eps, nu, tau_model=None, cfl=0.5, limiter="minmod",
                 cfl_limit=0.9, moment_correction=True, spd_floor_limit=1000, model="esbgk"):
        self.sgrid = sgrid
        self.vgrid = vgrid
        self.bc = bc
        self.eps = eps
        self.nu = nu
        self.tau_model = tau_model or TauModel()
        self.cfl = cfl
        self.limiter = limiter
        self.cfl_limit = cfl_limit
        self.moment_correction = moment_correction
        self.spd_floor_limit = spd_floor_limit
        if model not in ("esbgk", "bgk"):
            raise ValueError(f"model must be 'esbgk' or 'bgk', got {model!r}")
        self.model = model
        self.n_floored = 0
        self.n_uncorrected = 0
        RelaxationParams(eps, nu, 1.0)  # validates eps and nu up front

    @property
    def dt(self):
        return cfl_dt(self.sgrid, self.vgrid.v_max, self.cfl)

    @property
    def fluid(self):
        return self.sgrid.fluid

    def params(self, dt):
        return RelaxationParams(self.eps, self.nu, dt, self.tau_model, self.moment_correction)

    def transport(self, f, dt):
        return transport_step(f, self.sgrid, self.vgrid, self.bc, dt, self.limiter, self.cfl_limit)[0]

    def relax(self, f_star, dt):
        """Relaxation of the transported state on fluid cells."""
        params = self.params(dt)
        mask = self.sgrid.solid
        cells = f_star if mask is None else f_star[~mask]
        if self.model == "bgk":
            new, info = bgk_relaxation_step(cells, self.vgrid, params)
        else:
            new, info = relaxation_step(cells, self.vgrid, params)
        self.n_floored += info.n_floored
        self.n_uncorrected += info.n_uncorrected
        if self.n_floored > self.spd_floor_limit:
            raise SPDError(f"SPD guard triggered {self.n_floored} times (limit {self.spd_floor_limit})")
        if mask is None:
            return new
        out = f_star.copy()
        out[~mask] = new
        return out

    def step(self, f, dt=None):
        dt = self.dt if dt is None else dt
        return self.relax(self.transport(f, dt), dt)


@dataclass
class Setup:
    """Grids, boundary conditions and initial data built from a config."""

    sgrid: SpatialGrid
    vgrid: VelocityGrid
    bc: BoundarySpec
    f0: np.ndarray
    rho_g: float
    fluid_U0: np.ndarray = None  # matching fluid initial state (1-D only)


def build_setup(cfg: ScenarioConfig):
    if cfg.scenario == "smooth_periodic":
        return _smooth_setup(cfg)
    if cfg.scenario in ("riemann", "custom"):
        return _two_state_setup(cfg)
    if cfg.scenario == "cylinder":
        return _cylinder_setup(cfg)
    raise ValueError(cfg.scenario)


def _vgrid(cfg, states):
    vmax = cfg.vmax if cfg.vmax is not None else thermal_vmax(states)
    return VelocityGrid(cfg.d_v, vmax, cfg.nv)


def _vec(u, d):
    v = np.zeros(d)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v[: min(d, u.size)] = u[:d]
    return v


def _smooth_setup(cfg):
    d = cfg.d_v
    u0 = _vec(cfg.u0, d)
    T_mid = cfg.T0 + np.dot(u0, u0) / d  # temperature of the two-beam mixture
    vgrid = _vgrid(cfg, [(u0, cfg.T0), (np.zeros(d), T_mid)])
    sgrid = SpatialGrid(cfg.lower, cfg.upper, cfg.nx)
    x = sgrid.centers()
    amp = 1.0 + cfg.A0 * np.sin(np.pi * x)
    beam = MomentSet.from_primitive(np.ones(2), np.stack([u0, -u0]), cfg.T0)
    M = maxwellian(beam, vgrid)
    f0 = amp[:, None] * (M[0] + M[1])[None, :]
    bc = BoundarySpec.uniform(PERIODIC, 1)
    m0 = moments(f0, vgrid)
    rho_g = float(np.mean(m0.rho))
    return Setup(sgrid, vgrid, bc, f0, rho_g, m0.as_array())


def _two_state_setup(cfg):
    d = cfg.d_v
    ul, ur = _vec(cfg.u_l, d), _vec(cfg.u_r, d)
    vgrid = _vgrid(cfg, [(ul, cfg.T_l), (ur, cfg.T_r)])
    sgrid = SpatialGrid(cfg.lower, cfg.upper, cfg.nx)
    x = sgrid.centers()
    left = x <= 0.0
    rho = np.where(left, cfg.rho_l, cfg.rho_r)
    T = np.where(left, cfg.T_l, cfg.T_r)
    u = np.where(left[:, None], ul, ur)
    m0 = MomentSet.from_primitive(rho, u, T)
    f0 = maxwellian(m0, vgrid)
    kind = PERIODIC if cfg.bc == "periodic" else OUTFLOW
    bc = BoundarySpec.uniform(kind, 1)
    rho_g = float(np.mean(m0.rho))
    return Setup(sgrid, vgrid, bc, f0, rho_g, m0.as_array())


def _cylinder_setup(cfg):
    d = cfg.d_v
    u_i = _vec((cfg.mach * np.sqrt(2.0 * cfg.T_i), 0.0), d)
    vgrid = _vgrid(cfg, [(u_i, cfg.T_i), (np.zeros(d), cfg.T_w)])
    sgrid = SpatialGrid(cfg.lower, cfg.upper, cfg.nx)
    X = sgrid.mesh()
    solid = np.sqrt(sum(x**2 for x in X)) < cfg.radius
    sgrid.solid = solid
    inflow = Inflow(cfg.rho_i, tuple(u_i), cfg.T_i)
    sides = []
    for axis in range(sgrid.d_x):
        # outward normals -e_axis / +e_axis; far field enters where u_i . n <= 0
        sides.append(tuple(inflow if s * u_i[axis] <= 0.0 else OUTFLOW for s in (-1.0, 1.0)))
    bc = BoundarySpec(tuple(sides), wall_T=cfg.T_w)
    M_i = maxwellian(MomentSet.from_primitive(cfg.rho_i, u_i, cfg.T_i), vgrid)
    M_w = maxwellian(MomentSet.from_primitive(1.0, np.zeros(d), cfg.T_w), vgrid)
    f0 = np.where(solid[..., None], M_w, M_i)
    return Setup(sgrid, vgrid, bc, f0, cfg.rho_i)


def make_solver(cfg, setup):
    return KineticSolver(
        setup.sgrid, setup.vgrid, setup.bc, cfg.eps, cfg.nu, TauModel(cfg.c_tau, cfg.omega),
        cfg.cfl, cfg.limiter, cfg.cfl_limit, cfg.moment_correction, cfg.spd_floor_limit,
    )


@dataclass
class RunResult:
    log: RunLog
    f: np.ndarray
    setup: Setup
    solver: KineticSolver
    t: float
    steps: int
    snapshots: dict = field(default_factory=dict)  # t -> f
    reference: dict = field(default_factory=dict)  # t -> fluid U


def run(cfg: ScenarioConfig, keep_snapshots=False, callback=None):
    """Execute a scenario; writes outputs when ``cfg.out`` is set.

    ``callback(step, t, f)`` is invoked after every completed step.
    """
    cfg.validate()
    setup = build_setup(cfg)
    solver = make_solver(cfg, setup)
    sgrid, vgrid = setup.sgrid, setup.vgrid
    mask = sgrid.solid
    fluid = None if mask is None else ~mask
    vol = sgrid.cell_volume
    dt_max = solver.dt

    log.info("scenario=%s eps=%g nu=%g dt=%g vmax=%g", cfg.scenario, cfg.eps, cfg.nu, dt_max, vgrid.v_max)
    m_all = moments(setup.f0 if fluid is None else setup.f0[fluid], vgrid)
    m_avg = MomentSet.from_array(np.mean(m_all.as_array(), axis=0))
    log.info("discrete mass defect of the mean-state Maxwellian: %.3e", float(mass_defect(m_avg, vgrid)))
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)

    stops = sorted({float(s) for s in cfg.snapshots if 0.0 <= s <= cfg.t_end} | {float(cfg.t_end)})
    # the final state is always written
    snap_times = {float(s) for s in cfg.snapshots if 0.0 <= s <= cfg.t_end} | {float(cfg.t_end)}

    f = setup.f0.copy()
    t = 0.0
    steps = 0
    result = RunResult(RunLog(), f, setup, solver, t, steps)
    U_prev = moments(f if fluid is None else f[fluid], vgrid).as_array()

    def record(dudt):
        cells = f if fluid is None else f[fluid]
        tot = conserved_totals(cells, vgrid, vol)
        rho = moments(cells, vgrid).rho
        osc = oscillation_functional(rho, setup.rho_g, vol)
        eqd = equilibrium_distance(cells, vgrid, vol)
        result.log.append(t, tot[0], tot[1:-1], tot[-1], osc, eqd, dudt)

    written = set()

    def snapshot():
        written.add(t)
        if keep_snapshots:
            result.snapshots[t] = f.copy()
        if cfg.out:
            path = output.write_snapshot(cfg.out, t, f, setup, cfg)
            result.log.snapshots[t] = path

    try:
        moments(f if fluid is None else f[fluid], vgrid).check()
    except ESBGKError as exc:
        raise SimulationError(0, exc) from exc
    record(0.0)
    if 0.0 in snap_times:
        snapshot()

    done = False
    for stop in stops:
        while t < stop - 1e-12 * max(1.0, stop):
            if cfg.max_steps and steps >= cfg.max_steps:
                done = True
                break
            dt = min(dt_max, stop - t)
            try:
                f = solver.step(f, dt)
            except ESBGKError as exc:
                raise SimulationError(steps + 1, exc) from exc
            t = stop if stop - (t + dt) < 1e-12 * max(1.0, stop) else t + dt
            steps += 1
            U = moments(f if fluid is None else f[fluid], vgrid).as_array()
            record(time_derivative_norm(U, U_prev, dt))
            U_prev = U
            if callback is not None:
                callback(steps, t, f)
        if done:
            break
        if stop in snap_times and stop > 0.0:
            snapshot()
    if done and t not in written:
        snapshot()

    result.f, result.t, result.steps = f, t, steps

    if cfg.compare != "none" and setup.fluid_U0 is not None:
        result.reference = run_reference(cfg, setup, sorted(snap_times | {t}))
        if cfg.out:
            for tr, U in result.reference.items():
                output.write_fluid_snapshot(cfg.out, tr, U, setup, cfg)

    if cfg.out:
        result.log.write_csv(os.path.join(cfg.out, "series.csv"), header=cfg.echo())
    return result


def run_reference(cfg, setup, times):
    """Euler or Navier-Stokes reference on the kinetic run's spatial grid."""
    coeffs = TransportCoeffs(cfg.nu, TauModel(cfg.c_tau, cfg.omega)) if cfg.compare == "ns" else None
    bc = PERIODIC if setup.bc.sides[0][0] == PERIODIC else OUTFLOW
    dx = setup.sgrid.dx[0]
    return advance(setup.fluid_U0.copy(), dx, max(times), cfl=cfg.cfl, coeffs=coeffs,
                   eps=cfg.eps if coeffs is not None else 0.0, bc=bc, stops=times)


__all__ = ["KineticSolver", "RunResult", "Setup", "SimulationError", "build_setup", "make_solver", "run",
           "run_reference"]
