"""1-D compressible Euler / Navier-Stokes reference solver.

Conserved state per cell is ``(rho, rho*u_1, ..., rho*u_dv, E)`` with the
velocity carried in all ``d_v`` components so that shear (``u_2``) is
represented even though the flow varies in ``x`` only. The polytropic
constant is ``gamma = (d_v + 2) / d_v``, giving ``p = rho T``.

Hyperbolic fluxes are HLL on minmod-limited primitive reconstructions;
viscous and heat fluxes are centred differences. Time stepping is two-stage
SSP Runge-Kutta.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError
from .relaxation import TauModel, transport_coefficients
from .transport import OUTFLOW, PERIODIC, minmod
from .velocity import MomentSet


def gamma_of(d_v):
    return (d_v + 2.0) / d_v


@dataclass(frozen=True)
class TransportCoeffs:
    """ES-BGK viscosity and conductivity, ``mu = p/((1-nu) tau)``, ``kappa = (d_v+2) p/(2 tau)``.

    ``kappa_override`` replaces the conductivity law by a callable of the
    :class:`MomentSet` (e.g. ``lambda m: m.rho * m.T``).
    """

    nu: float = 0.0
    tau_model: TauModel = field(default_factory=TauModel)
    kappa_override: object = None

    def __call__(self, m):
        mu, kappa = transport_coefficients(m, self.nu, self.tau_model)
        if self.kappa_override is not None:
            kappa = np.broadcast_to(self.kappa_override(m), np.shape(mu)).astype(float)
        return mu, kappa


def to_moments(U):
    return MomentSet.from_array(U)


def primitive(U):
    """``(rho, u, p)`` from conserved variables."""
    m = to_moments(U)
    return m.rho, m.u, m.p


def conservative(rho, u, p):
    rho = np.asarray(rho, dtype=float)
    T = np.asarray(p, dtype=float) / rho
    return MomentSet.from_primitive(rho, u, T).as_array()


def euler_flux(rho, u, p):
    """Physical x-flux for primitive states of shape ``(..., )`` / ``(..., d_v)``."""
    d = u.shape[-1]
    E = 0.5 * rho * np.sum(u**2, axis=-1) + d / 2.0 * p
    un = u[..., 0]
    F = np.empty(rho.shape + (d + 2,))
    F[..., 0] = rho * un
    F[..., 1:-1] = rho[..., None] * un[..., None] * u
    F[..., 1] += p
    F[..., -1] = (E + p) * un
    return F


def hll_flux(left, right, gamma):
    """HLL flux between primitive states ``(rho, u, p)`` on each side."""
    rl, ul, pl = left
    rr, ur, pr = right
    cl = np.sqrt(gamma * pl / rl)
    cr = np.sqrt(gamma * pr / rr)
    sl = np.minimum(ul[..., 0] - cl, ur[..., 0] - cr)
    sr = np.maximum(ul[..., 0] + cl, ur[..., 0] + cr)
    Fl = euler_flux(rl, ul, pl)
    Fr = euler_flux(rr, ur, pr)
    Ul = conservative(rl, ul, pl)
    Ur = conservative(rr, ur, pr)
    sl_ = sl[..., None]
    sr_ = sr[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        Fm = (sr_ * Fl - sl_ * Fr + sl_ * sr_ * (Ur - Ul)) / (sr_ - sl_)
    return np.where(sl_ >= 0.0, Fl, np.where(sr_ <= 0.0, Fr, Fm))


def _pad(U, bc, ng=2):
    if bc == PERIODIC:
        return np.concatenate([U[-ng:], U, U[:ng]], axis=0)
    if bc == OUTFLOW:
        return np.concatenate([np.repeat(U[:1], ng, 0), U, np.repeat(U[-1:], ng, 0)], axis=0)
    raise ValueError(f"unknown boundary kind {bc!r}")


def _check(U):
    rho, _, p = primitive(U)
    bad = np.flatnonzero(~((rho > 0) & (p > 0)))
    if bad.size:
        raise InvalidStateError(f"fluid positivity failure at cell {bad[0]}", cells=bad[:10])


def euler_rhs(U, dx, bc=OUTFLOW):
    """``-dF/dx`` from limited reconstruction and HLL fluxes."""
    d = U.shape[-1] - 2
    gamma = gamma_of(d)
    P = _pad(U, bc)
    rho, u, p = primitive(P)
    W = np.concatenate([rho[:, None], u, p[:, None]], axis=1)
    dW = np.diff(W, axis=0)
    s = minmod(dW[:-1], dW[1:])  # padded cells 1 .. n+2
    n = U.shape[0]
    WL = W[1 : n + 2] + 0.5 * s[0 : n + 1]
    WR = W[2 : n + 3] - 0.5 * s[1 : n + 2]
    F = hll_flux((WL[:, 0], WL[:, 1:-1], WL[:, -1]), (WR[:, 0], WR[:, 1:-1], WR[:, -1]), gamma)
    return -(F[1:] - F[:-1]) / dx


def viscous_rhs(U, dx, coeffs, eps, bc=OUTFLOW):
    """Divergence of the eps-scaled viscous stress and Fourier heat flux."""
    d = U.shape[-1] - 2
    P = _pad(U, bc, ng=1)
    m = to_moments(P)
    u, T = m.u, m.T
    mu, kappa = coeffs(m)
    mu_f = 0.5 * (mu[1:] + mu[:-1])
    kappa_f = 0.5 * (kappa[1:] + kappa[:-1])
    du = np.diff(u, axis=0) / dx
    dT = np.diff(T) / dx
    u_f = 0.5 * (u[1:] + u[:-1])
    # x-row of sigma(u) = grad u + grad u^T - (2/d_v) div u I, for a flow varying in x only
    sig = du.copy()
    sig[:, 0] = (2.0 - 2.0 / d) * du[:, 0]
    G = np.zeros((du.shape[0], d + 2))
    G[:, 1:-1] = eps * mu_f[:, None] * sig
    G[:, -1] = eps * (mu_f * np.sum(sig * u_f, axis=1) + kappa_f * dT)
    return (G[1:] - G[:-1]) / dx


def hyperbolic_dt(U, dx, cfl):
    d = U.shape[-1] - 2
    rho, u, p = primitive(U)
    c = np.sqrt(gamma_of(d) * p / rho)
    return cfl * dx / np.max(np.abs(u[:, 0]) + c)


def parabolic_dt(U, dx, coeffs, eps, safety=0.4):
    """Explicit diffusion bound ``dx^2 / (2 D)`` scaled by ``safety / 0.5``.

    ``D`` is the largest of the momentum diffusivity ``(2 - 2/d_v) eps mu / rho``
    and the thermal diffusivity ``(gamma - 1) eps kappa / rho``.
    """
    if eps == 0.0:
        return np.inf
    d = U.shape[-1] - 2
    m = to_moments(U)
    mu, kappa = coeffs(m)
    D = eps * np.maximum(max(1.0, 2.0 - 2.0 / d) * mu, (gamma_of(d) - 1.0) * kappa) / m.rho
    return safety * dx**2 / np.max(D)


def stable_dt(U, dx, cfl=0.5, coeffs=None, eps=0.0):
    dt = hyperbolic_dt(U, dx, cfl)
    if coeffs is not None:
        dt = min(dt, parabolic_dt(U, dx, coeffs, eps))
    return dt


def euler_step(U, dx, dt, bc=OUTFLOW):
    """One SSP-RK2 step of the Euler equations."""
    _check(U)
    U1 = U + dt * euler_rhs(U, dx, bc)
    _check(U1)
    U2 = 0.5 * (U + U1 + dt * euler_rhs(U1, dx, bc))
    _check(U2)
    return U2


def ns_step(U, dx, dt, coeffs, eps, bc=OUTFLOW):
    """One SSP-RK2 step of the Navier-Stokes system; ``eps = 0`` reduces to :func:`euler_step`."""
    if eps == 0.0:
        return euler_step(U, dx, dt, bc)
    _check(U)

    def rhs(V):
        return euler_rhs(V, dx, bc) + viscous_rhs(V, dx, coeffs, eps, bc)

    U1 = U + dt * rhs(U)
    _check(U1)
    U2 = 0.5 * (U + U1 + dt * rhs(U1))
    _check(U2)
    return U2


def advance(U, dx, t_end, cfl=0.5, coeffs=None, eps=0.0, bc=OUTFLOW, stops=()):
    """Integrate to ``t_end``; returns ``{t: U}`` for each time in ``stops`` plus ``t_end``."""
    t = 0.0
    out = {}
    targets = sorted(set(float(s) for s in stops if 0 <= s <= t_end) | {float(t_end)})
    if targets and targets[0] == 0.0:
        out[0.0] = U.copy()
    for target in targets:
        while t < target - 1e-14:
            dt = min(stable_dt(U, dx, cfl, coeffs, eps), target - t)
            U = ns_step(U, dx, dt, coeffs, eps, bc) if coeffs is not None else euler_step(U, dx, dt, bc)
            t += dt
        out[target] = U.copy()
    return out
