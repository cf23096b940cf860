"""Explicit finite-volume free transport ``df/dt + v . grad_x f = 0``.

Each velocity node is advected independently with a limited upwind scheme
(MUSCL-Hancock form: time-centred face values, one explicit stage), swept
one spatial axis at a time. Boundary conditions are supplied through two
ghost cells per side; the obstacle of the cylinder case is a solid cell
mask whose faces carry diffusive-wall fluxes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CFLError, WallError
from .velocity import MomentSet, maxwellian, second_moment

PERIODIC = "periodic"
OUTFLOW = "outflow"


@dataclass(frozen=True)
class Inflow:
    """Far-field Maxwellian imposed in the ghost cells."""

    rho: float
    u: tuple
    T: float


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary kinds per axis, ``((low, high), ...)``, plus the obstacle wall temperature.

    Each side is ``"periodic"``, ``"outflow"`` (zero gradient) or an
    :class:`Inflow`. ``wall_T`` applies to faces between fluid and solid
    cells of :attr:`SpatialGrid.solid`.
    """

    sides: tuple
    wall_T: float = 1.0

    def __post_init__(self):
        for low, high in self.sides:
            if (low == PERIODIC) != (high == PERIODIC):
                raise ValueError("periodic boundaries must be paired on an axis")

    @classmethod
    def uniform(cls, kind, d_x=1, wall_T=1.0):
        return cls(tuple((kind, kind) for _ in range(d_x)), wall_T)


@dataclass
class SpatialGrid:
    """Uniform Cartesian cell-centred grid, optionally with a solid mask."""

    lower: tuple
    upper: tuple
    n: tuple
    solid: np.ndarray = None

    def __post_init__(self):
        self.lower = tuple(float(a) for a in np.atleast_1d(self.lower))
        self.upper = tuple(float(b) for b in np.atleast_1d(self.upper))
        self.n = tuple(int(k) for k in np.atleast_1d(self.n))
        if not len(self.lower) == len(self.upper) == len(self.n):
            raise ValueError("lower, upper and n must have the same length")
        if any(k < 2 for k in self.n) or any(b <= a for a, b in zip(self.lower, self.upper)):
            raise ValueError("grid needs n >= 2 and upper > lower on every axis")
        if self.solid is not None:
            self.solid = np.asarray(self.solid, dtype=bool)
            if self.solid.shape != self.n:
                raise ValueError(f"solid mask shape {self.solid.shape} != grid shape {self.n}")

    @property
    def d_x(self):
        return len(self.n)

    @property
    def dx(self):
        return tuple((b - a) / k for a, b, k in zip(self.lower, self.upper, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.dx))

    @property
    def fluid(self):
        if self.solid is None:
            return np.ones(self.n, dtype=bool)
        return ~self.solid

    def centers(self, axis=0):
        a, h = self.lower[axis], self.dx[axis]
        return a + h * (np.arange(self.n[axis]) + 0.5)

    def mesh(self):
        return np.meshgrid(*[self.centers(k) for k in range(self.d_x)], indexing="ij")


def cfl_dt(sgrid, v_max, cfl):
    """Largest transport step ``cfl * min(dx) / v_max``; independent of eps."""
    if not 0 < cfl <= 1:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    return cfl * min(sgrid.dx) / v_max


def minmod(a, b):
    sa = np.sign(a)
    return sa * np.maximum(0.0, np.minimum(np.abs(a), sa * b))


def van_leer(a, b):
    ab = a * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = 2.0 * ab / (a + b)
    return np.where(ab > 0.0, s, 0.0)


LIMITERS = {"minmod": minmod, "vanleer": van_leer}


def wall_maxwellian(vgrid, T_w):
    """Unit-density wall Maxwellian at rest."""
    return maxwellian(MomentSet.from_primitive(1.0, np.zeros(vgrid.d_v), T_w), vgrid)


def apply_diffusive_wall(f, normal, T_w, vgrid):
    """Replace the half of ``f`` travelling into the gas by a wall Maxwellian.

    ``normal`` points from the gas into the wall. Velocities with
    ``v . n < 0`` are re-emitted at temperature ``T_w`` with the density
    that makes the net mass flux through the wall vanish.
    """
    f = np.asarray(f, dtype=float)
    n = np.zeros(vgrid.d_v)
    normal = np.atleast_1d(np.asarray(normal, dtype=float))
    n[: normal.size] = normal / np.linalg.norm(normal)
    vn = vgrid.points @ n
    Mw = wall_maxwellian(vgrid, T_w)
    out = np.sum(f * np.maximum(vn, 0.0), axis=-1)
    back = np.sum(Mw * np.maximum(-vn, 0.0))
    if np.any(out <= 0.0):
        raise WallError("no outgoing flux at diffusive wall")
    rho_w = out / back
    return np.where(vn < 0.0, rho_w[..., None] * Mw, f)


def transport_step(f, sgrid, vgrid, bc, dt, limiter="minmod", cfl_limit=0.9):
    """Advance ``f`` by one explicit transport step.

    Returns ``(f_star, sigma_flux)`` where ``sigma_flux`` is the raw second
    moment of the discrete divergence, ``(Sigma[f] - Sigma[f_star]) / dt``.
    """
    f = np.asarray(f, dtype=float)
    for axis, h in enumerate(sgrid.dx):
        courant = dt * np.max(np.abs(vgrid.points[:, axis])) / h
        if courant > cfl_limit * (1 + 1e-12):
            raise CFLError(f"Courant number {courant:.4g} exceeds limit {cfl_limit} on axis {axis}")
    slope = LIMITERS[limiter]
    f_star = f
    for axis in range(sgrid.d_x):
        f_star = _sweep(f_star, axis, sgrid, vgrid, bc, dt, slope)
    sigma_flux = (second_moment(f, vgrid) - second_moment(f_star, vgrid)) / dt
    return f_star, sigma_flux


def _ghosts(g, side, vgrid, at_low):
    """Two ghost layers for one side of an axis already moved to position 0."""
    if side == OUTFLOW:
        edge = g[:1] if at_low else g[-1:]
        return np.repeat(edge, 2, axis=0)
    if isinstance(side, Inflow):
        m = MomentSet.from_primitive(side.rho, np.asarray(side.u, dtype=float), side.T)
        M = maxwellian(m, vgrid)
        return np.broadcast_to(M, (2,) + g.shape[1:]).copy()
    raise ValueError(f"unknown boundary kind {side!r}")


def _sweep(f, axis, sgrid, vgrid, bc, dt, slope):
    h = sgrid.dx[axis]
    speed = vgrid.points[:, axis]
    courant = np.abs(speed) * dt / h
    vpos = np.maximum(speed, 0.0)
    vneg = np.minimum(speed, 0.0)

    g = np.moveaxis(f, axis, 0)
    n = g.shape[0]
    low, high = bc.sides[axis]
    if low == PERIODIC:
        G = np.concatenate([g[-2:], g, g[:2]], axis=0)
    else:
        G = np.concatenate([_ghosts(g, low, vgrid, True), g, _ghosts(g, high, vgrid, False)], axis=0)

    d = np.diff(G, axis=0)
    s = slope(d[:-1], d[1:])  # padded cells 1 .. n+2

    solid = None
    if sgrid.solid is not None and sgrid.solid.any():
        solid = np.moveaxis(sgrid.solid, axis, 0)
        # ghost flags follow the ghost data: wrapped or copied from the edge
        if low == PERIODIC:
            S = np.concatenate([solid[-2:], solid, solid[:2]], axis=0)
        else:
            S = np.concatenate([solid[:1], solid[:1], solid, solid[-1:], solid[-1:]], axis=0)
        touch = S[1:-1] | S[:-2] | S[2:]
        s = np.where(touch[..., None], 0.0, s)

    half = 0.5 * (1.0 - courant)
    fL = G[1 : n + 2] + half * s[0 : n + 1]
    fR = G[2 : n + 3] - half * s[1 : n + 2]
    F = vpos * fL + vneg * fR

    if solid is not None:
        F = _wall_fluxes(F, fL, fR, S, vgrid, speed, bc.wall_T, n)

    g_new = g - (dt / h) * (F[1:] - F[:-1])
    if solid is not None:
        g_new = np.where(solid[..., None], g, g_new)
    return np.moveaxis(g_new, 0, axis)


def _wall_fluxes(F, fL, fR, S, vgrid, speed, T_w, n):
    left_solid = S[1 : n + 2]
    right_solid = S[2 : n + 3]
    Mw = wall_maxwellian(vgrid, T_w)
    w = vgrid.weight
    vpos = np.maximum(speed, 0.0)
    vneg = np.minimum(speed, 0.0)
    back = np.sum(vpos * Mw) * w  # emitted flux of unit density, either direction

    F = F.copy()
    # gas on the left, wall on the right: gas leaves with v > 0
    sel = ~left_solid & right_solid
    if sel.any():
        out = fL[sel]
        flux_out = out @ vpos * w
        if np.any(flux_out <= 0.0):
            raise WallError("no outgoing flux at diffusive wall")
        F[sel] = vpos * out + (flux_out / back)[:, None] * (vneg * Mw)
    sel = left_solid & ~right_solid
    if sel.any():
        out = fR[sel]
        flux_out = -(out @ vneg) * w
        if np.any(flux_out <= 0.0):
            raise WallError("no outgoing flux at diffusive wall")
        F[sel] = vneg * out + (flux_out / back)[:, None] * (vpos * Mw)
    F[left_solid & right_solid] = 0.0
    return F
