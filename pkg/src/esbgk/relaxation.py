"""Implicit ES-BGK relaxation resolved in closed form.

The implicit step ``f' = f* + (dt tau / eps) (G[f'] - f')`` looks nonlinear
because the Gaussian depends on ``f'``. Its collision invariants and second
moment can however be advanced first, in this order:

1. conserved moments of ``f'`` equal those of the transported state ``f*``;
2. ``tau`` follows from those moments;
3. the raw second moment relaxes toward ``rho (T I + u u)`` with rate
   ``(1 - nu) tau``;
4. the Gaussian is built from 1-3 and ``f'`` is a convex combination.

No iteration is needed anywhere.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidStateError, SPDError
from .velocity import (
    SPD_DELTA,
    centered_tensor,
    conserve_moments,
    corrected_tensor,
    gaussian,
    maxwellian,
    moments,
    second_moment,
)

TAU_DEFAULT = 0.9 * np.pi / 2
A2_5 = 0.436
TAU_BOLTZMANN = 3.0 * np.pi / (2.0 * np.sqrt(2.0)) * A2_5


@dataclass(frozen=True)
class TauModel:
    """Collision frequency ``tau = c_tau * rho * T**(1 - omega)``.

    The default ``omega = 1`` makes ``tau`` linear in density and independent
    of temperature.
    """

    c_tau: float = TAU_DEFAULT
    omega: float = 1.0

    def __post_init__(self):
        if not self.c_tau > 0:
            raise ValueError(f"c_tau must be positive, got {self.c_tau}")

    def __call__(self, m):
        tau = self.c_tau * np.asarray(m.rho)
        if self.omega != 1.0:
            tau = tau * np.asarray(m.T) ** (1.0 - self.omega)
        return tau


def tau_default(m, c_tau=TAU_DEFAULT):
    return c_tau * np.asarray(m.rho)


@dataclass(frozen=True)
class RelaxationParams:
    eps: float
    nu: float
    dt: float
    tau_model: TauModel = field(default_factory=TauModel)
    moment_correction: bool = True
    spd_delta: float = SPD_DELTA

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not -1.0 <= self.nu < 1.0:
            raise ValueError(f"nu must lie in [-1, 1), got {self.nu}")


class RelaxInfo(NamedTuple):
    n_floored: int = 0
    n_uncorrected: int = 0


def transport_coefficients(m, nu, tau_model):
    """Viscosity and heat conductivity of the ES-BGK Navier-Stokes limit.

    ``mu = p / ((1 - nu) tau)`` and ``kappa = (d_v + 2) p / (2 tau)``.
    """
    tau = tau_model(m)
    p = m.p
    mu = p / ((1.0 - nu) * tau)
    kappa = 0.5 * (m.d_v + 2) * p / tau
    return mu, kappa


def prandtl(mu, kappa, d_v):
    return 0.5 * (d_v + 2) * mu / kappa


def update_moments(f_star, grid):
    """Conserved moments after the implicit step: those of the transported state."""
    return moments(f_star, grid)


def update_sigma(sigma_star, m_next, params):
    """Relax the raw second moment toward its isotropic equilibrium value."""
    tau = params.tau_model(m_next)
    k = (1.0 - params.nu) * tau * params.dt
    a = params.eps / (params.eps + k)
    u = m_next.u
    eq = m_next.rho[..., None, None] * (
        np.asarray(m_next.T)[..., None, None] * np.eye(m_next.d_v) + u[..., :, None] * u[..., None, :]
    )
    return a[..., None, None] * sigma_star + (1.0 - a)[..., None, None] * eq


def relax(f_star, m_next, sigma_next, params, grid, return_info=False):
    """Convex combination of ``f_star`` and the Gaussian of ``(m_next, sigma_next)``."""
    tau = params.tau_model(m_next)
    theta = centered_tensor(sigma_next, m_next)
    tcorr = corrected_tensor(m_next.T, theta, params.nu)
    G, n_floored = gaussian(m_next, tcorr, grid, delta=params.spd_delta, return_floored=True)
    n_skip = 0
    if params.moment_correction:
        G, n_skip = conserve_moments(G, m_next, grid)
    b = params.eps / (params.eps + tau * params.dt)
    f_next = b[..., None] * f_star + (1.0 - b)[..., None] * G
    if return_info:
        return f_next, G, RelaxInfo(n_floored, n_skip)
    return f_next


def relaxation_step(f_star, grid, params):
    """Full implicit ES-BGK relaxation of a transported state.

    Returns ``(f_next, info)``. Raises :class:`InvalidStateError` if any cell
    of ``f_star`` has density or temperature below the floors.
    """
    m_next = update_moments(f_star, grid).check()
    sigma_star = second_moment(f_star, grid)
    sigma_next = update_sigma(sigma_star, m_next, params)
    f_next, _, info = relax(f_star, m_next, sigma_next, params, grid, return_info=True)
    return f_next, info


def bgk_relaxation_step(f_star, grid, params):
    """Classical BGK implicit relaxation: the Maxwellian is fixed by the moments alone."""
    m = moments(f_star, grid).check()
    tau = params.tau_model(m)
    M = maxwellian(m, grid)
    n_skip = 0
    if params.moment_correction:
        M, n_skip = conserve_moments(M, m, grid)
    b = params.eps / (params.eps + tau * params.dt)
    return b[..., None] * f_star + (1.0 - b)[..., None] * M, RelaxInfo(0, n_skip)


__all__ = [
    "A2_5",
    "InvalidStateError",
    "RelaxInfo",
    "RelaxationParams",
    "SPDError",
    "TAU_BOLTZMANN",
    "TAU_DEFAULT",
    "TauModel",
    "bgk_relaxation_step",
    "prandtl",
    "relax",
    "relaxation_step",
    "tau_default",
    "transport_coefficients",
    "update_moments",
    "update_sigma",
]
