"""Scalar and field diagnostics for kinetic runs."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .relaxation import transport_coefficients
from .velocity import MomentSet, heat_flux, maxwellian, moments

SERIES_COLUMNS = ("t", "mass", "momentum_x", "momentum_y", "energy", "oscillation", "eq_distance", "dUdt_inf")


def _fluid(f, mask):
    f = np.asarray(f)
    return f if mask is None else f[mask]


def conserved_totals(f, vgrid, cell_volume, mask=None):
    """Phase-space totals ``(mass, momentum..., energy)`` over fluid cells."""
    U = moments(_fluid(f, mask), vgrid).as_array()
    U = U.reshape(-1, U.shape[-1])
    return np.sum(U, axis=0) * cell_volume


def equilibrium_distance(f, vgrid, cell_volume, mask=None):
    """Discrete ``||f - M[f]||_{L1(x, v)}``."""
    f = _fluid(f, mask)
    M = maxwellian(moments(f, vgrid).check(), vgrid)
    return float(np.sum(np.abs(f - M)) * vgrid.weight * cell_volume)


def oscillation_functional(rho, rho_g, cell_volume):
    """``||rho - rho_g||_{L1(x)}``."""
    return float(np.sum(np.abs(np.asarray(rho) - rho_g)) * cell_volume)


def global_maxwellian(f0, vgrid, mask=None):
    """Stationary state of a closed run: the Maxwellian of the domain-averaged moments.

    ``rho_g`` is the mean density and ``T_g`` the temperature that carries the
    mean total energy with the mean momentum, so ``M_g`` has the same
    totals as ``f0``. Returns ``(M_g, MomentSet)``.
    """
    f0 = _fluid(f0, mask)
    U = moments(f0, vgrid).as_array().reshape(-1, vgrid.d_v + 2)
    mg = MomentSet.from_array(np.mean(U, axis=0))
    return maxwellian(mg, vgrid), mg


def mach_field(m, gamma=None):
    """Local Mach number ``|u| / sqrt(gamma T)``; ``gamma`` defaults to ``(d_v+2)/d_v``."""
    if gamma is None:
        gamma = (m.d_v + 2.0) / m.d_v
    return np.linalg.norm(m.u, axis=-1) / np.sqrt(gamma * np.asarray(m.T))


def time_derivative_norm(U_new, U_old, dt):
    """``max |U^{n+1} - U^n| / dt`` over cells and components."""
    return float(np.max(np.abs(np.asarray(U_new) - np.asarray(U_old))) / dt)


def count_local_maxima(series, t=None, after=None, floor=0.0):
    """Strict interior local maxima of ``series`` above ``floor`` (optionally for ``t > after``)."""
    y = np.asarray(series, dtype=float)
    peak = np.zeros(y.shape, dtype=bool)
    peak[1:-1] = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]) & (y[1:-1] > floor)
    if after is not None:
        peak &= np.asarray(t) > after
    return int(np.count_nonzero(peak))


def periodic_gradient(q, dx):
    """Centred difference with periodic wrap along axis 0."""
    return (np.roll(q, -1, axis=0) - np.roll(q, 1, axis=0)) / (2.0 * dx)


def chapman_enskog_ratios(f, vgrid, dx, eps, nu, tau_model):
    """Measured over predicted transport coefficients on a 1-D periodic state.

    The heat flux ``Q_x`` is regressed on ``-kappa dT/dx`` and the shear
    stress ``int c_x c_y f dv / eps`` on ``-mu du_y/dx``, with ``kappa``
    and ``mu`` from the ES-BGK Navier-Stokes limit evaluated cell by cell.
    Returns a dict with ``kappa`` and ``mu`` ratios (1 is exact) and the
    measured Prandtl number.
    """
    m = moments(f, vgrid).check()
    mu, kappa = transport_coefficients(m, nu, tau_model)
    q = heat_flux(f, m, vgrid, eps)[:, 0]
    c = vgrid.points - m.u[:, None, :]
    pxy = np.sum(f * c[..., 0] * c[..., 1], axis=-1) * vgrid.weight / eps
    dT = periodic_gradient(m.T, dx)
    duy = periodic_gradient(m.u[:, 1], dx)
    pred_q = -kappa * dT
    pred_p = -mu * duy
    r_kappa = float(np.sum(q * pred_q) / np.sum(pred_q**2))
    r_mu = float(np.sum(pxy * pred_p) / np.sum(pred_p**2))
    # Pr = (d_v+2)/2 * mu/kappa with the measured coefficients
    kappa_meas = r_kappa * kappa
    mu_meas = r_mu * mu
    pr = float(np.mean(0.5 * (vgrid.d_v + 2) * mu_meas / kappa_meas))
    return {"kappa": r_kappa, "mu": r_mu, "prandtl": pr}


@dataclass
class RunLog:
    """Time series of run diagnostics plus the paths of written snapshots."""

    rows: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    def append(self, t, mass, momentum, energy, oscillation, eq_distance, dudt):
        if self.rows and not t > self.rows[-1][0]:
            raise ValueError(f"time {t} does not increase past {self.rows[-1][0]}")
        mom = list(np.atleast_1d(momentum)) + [0.0, 0.0]
        self.rows.append((float(t), float(mass), float(mom[0]), float(mom[1]), float(energy),
                          float(oscillation), float(eq_distance), float(dudt)))

    def column(self, name):
        k = SERIES_COLUMNS.index(name)
        return np.array([r[k] for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def write_csv(self, path, header=()):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for line in header:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(SERIES_COLUMNS)
            for row in self.rows:
                w.writerow([f"{v:.12g}" for v in row])
