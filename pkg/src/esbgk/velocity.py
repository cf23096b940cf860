"""Discrete velocity space: grid, quadrature moments and equilibria.

Distribution values are stored with the velocity index flattened into the
last axis, so ``f`` has shape ``(*cells, grid.size)`` and a single cell is
just a 1-D array of ``grid.size`` values. Moments then reduce to matrix
products against small per-grid tables.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError, SPDError

RHO_FLOOR = 1e-12
T_FLOOR = 1e-12
SPD_DELTA = 1e-10


@dataclass(frozen=True)
class VelocityGrid:
    """Truncated uniform Cartesian velocity grid with midpoint quadrature.

    Parameters
    ----------
    d_v : int
        Velocity dimension.
    v_max : float
        Half-width of the truncated domain ``[-v_max, v_max]^d_v``.
    n_v : int
        Nodes per axis (at least 4).
    """

    d_v: int
    v_max: float
    n_v: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    points: np.ndarray = field(init=False, repr=False, compare=False)
    weight: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d_v not in (1, 2, 3):
            raise ValueError(f"d_v must be 1, 2 or 3, got {self.d_v}")
        if self.n_v < 4:
            raise ValueError(f"n_v must be >= 4, got {self.n_v}")
        if not self.v_max > 0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        dv = 2.0 * self.v_max / self.n_v
        nodes = -self.v_max + dv * (np.arange(self.n_v) + 0.5)
        # exact mirror symmetry, independent of round-off in the formula above
        nodes = 0.5 * (nodes - nodes[::-1])
        mesh = np.meshgrid(*([nodes] * self.d_v), indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=-1)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weight", dv**self.d_v)
        # moment tables: phi = (1, v, |v|^2/2), vv = v (x) v
        phi = np.column_stack([np.ones(len(points)), points, 0.5 * np.sum(points**2, axis=1)])
        vv = (points[:, :, None] * points[:, None, :]).reshape(len(points), -1)
        object.__setattr__(self, "_phi", phi)
        object.__setattr__(self, "_vv", vv)
        # rows (v (x) v, v, 1): a Gaussian exponent is one product against this
        object.__setattr__(self, "_quad", np.vstack([vv.T, points.T, np.ones(len(points))]))
        object.__setattr__(self, "_phiphi", (phi[:, :, None] * phi[:, None, :]).reshape(len(points), -1))

    @property
    def dv(self):
        return 2.0 * self.v_max / self.n_v

    @property
    def size(self):
        return self.n_v**self.d_v

    @property
    def shape(self):
        return (self.n_v,) * self.d_v

    @property
    def speed_max(self):
        """Largest node speed along any single axis."""
        return float(self.nodes[-1])

    @classmethod
    def for_states(cls, states, n_v, d_v=2, widths=8.0):
        """Grid whose half-width covers every ``(u, T)`` state by ``widths`` thermal widths."""
        return cls(d_v=d_v, v_max=thermal_vmax(states, widths), n_v=n_v)


def thermal_vmax(states, widths=8.0):
    """``max(|u| + widths * sqrt(T))`` over an iterable of ``(u, T)`` pairs."""
    vmax = 0.0
    for u, T in states:
        vmax = max(vmax, float(np.linalg.norm(np.atleast_1d(u))) + widths * np.sqrt(T))
    return vmax


@dataclass
class MomentSet:
    """Conserved fields ``(rho, rho*u, E)`` per cell, with derived u, T, p."""

    rho: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray

    @property
    def d_v(self):
        return self.momentum.shape[-1]

    @property
    def u(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.momentum / self.rho[..., None]

    @property
    def T(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            kinetic = np.sum(self.momentum**2, axis=-1) / self.rho
            return (2.0 * self.energy - kinetic) / (self.d_v * self.rho)

    @property
    def p(self):
        return self.rho * self.T

    @property
    def valid(self):
        T = self.T
        return np.isfinite(T) & (self.rho > RHO_FLOOR) & (T > T_FLOOR)

    def check(self):
        """Raise :class:`InvalidStateError` naming the first bad cells."""
        bad = np.flatnonzero(~np.asarray(self.valid))
        if bad.size:
            raise InvalidStateError(
                f"invalid state (rho or T below floor) in {bad.size} cell(s), first at {bad[0]}",
                cells=bad[:10],
            )
        return self

    def as_array(self):
        """Stack to ``(*cells, 2 + d_v)`` in the order ``(rho, rho*u, E)``."""
        return np.concatenate([self.rho[..., None], self.momentum, self.energy[..., None]], axis=-1)

    @classmethod
    def from_array(cls, U):
        U = np.asarray(U, dtype=float)
        return cls(U[..., 0], U[..., 1:-1], U[..., -1])

    @classmethod
    def from_primitive(cls, rho, u, T):
        """Build from density, velocity and temperature (broadcast together)."""
        rho = np.asarray(rho, dtype=float)
        u = np.asarray(u, dtype=float)
        T = np.asarray(T, dtype=float)
        rho, T = np.broadcast_arrays(rho, T)
        u = np.broadcast_to(u, rho.shape + u.shape[-1:])
        d = u.shape[-1]
        energy = 0.5 * rho * np.sum(u**2, axis=-1) + 0.5 * d * rho * T
        return cls(rho.copy(), rho[..., None] * u, energy)

    def __getitem__(self, idx):
        return MomentSet(self.rho[idx], self.momentum[idx], self.energy[idx])


@dataclass
class StressState:
    """Second-moment tensors of a distribution, per cell."""

    Sigma: np.ndarray
    Theta: np.ndarray
    Tcorr: np.ndarray


def moments(f, grid):
    """Quadrature of ``(1, v, |v|^2/2)`` against ``f``.

    Cells whose density or temperature fall below the floors are reported
    through :attr:`MomentSet.valid`; nothing is raised here.
    """
    U = (np.asarray(f) @ grid._phi) * grid.weight
    return MomentSet.from_array(U)


def second_moment(f, grid):
    """Raw second moment ``int v (x) v f dv`` with shape ``(*cells, d_v, d_v)``."""
    f = np.asarray(f)
    S = (f @ grid._vv) * grid.weight
    S = S.reshape(f.shape[:-1] + (grid.d_v, grid.d_v))
    return 0.5 * (S + np.swapaxes(S, -1, -2))


def centered_tensor(Sigma, m):
    """``Theta = Sigma / rho - u (x) u``."""
    u = m.u
    return Sigma / m.rho[..., None, None] - u[..., :, None] * u[..., None, :]


def corrected_tensor(T, Theta, nu):
    """``(1 - nu) T I + nu Theta``."""
    d = Theta.shape[-1]
    eye = np.eye(d)
    if nu == 0.0:
        return np.asarray(T)[..., None, None] * eye
    return (1.0 - nu) * np.asarray(T)[..., None, None] * eye + nu * Theta


def stress_state(f, grid, nu, m=None):
    if m is None:
        m = moments(f, grid)
    Sigma = second_moment(f, grid)
    Theta = centered_tensor(Sigma, m)
    return StressState(Sigma, Theta, corrected_tensor(m.T, Theta, nu))


def maxwellian(m, grid):
    """Isotropic Maxwellian of ``m`` evaluated on every velocity node."""
    T = np.asarray(m.T)
    if np.any(~(T > 0)):
        raise InvalidStateError("maxwellian requires T > 0", cells=np.flatnonzero(~(T.ravel() > 0))[:10])
    d = grid.d_v
    prec = np.eye(d) / T[..., None, None]
    return _gaussian_values(m.rho, m.u, prec, d * np.log(T), grid)


def _gaussian_values(rho, u, prec, logdet, grid):
    """``rho / sqrt(det(2 pi C)) exp(-(v-u)^T P (v-u) / 2)`` with ``P = C^-1``.

    The exponent is expanded in the monomials ``v_i v_j``, ``v_i`` and 1 so
    that all cells are evaluated with a single matrix product.
    """
    d = grid.d_v
    b = np.einsum("...ij,...j->...i", prec, u)
    c0 = np.log(rho) - 0.5 * (d * np.log(2.0 * np.pi) + logdet) - 0.5 * np.sum(u * b, axis=-1)
    coef = np.concatenate([-0.5 * prec.reshape(prec.shape[:-2] + (d * d,)), b, c0[..., None]], axis=-1)
    return np.exp(coef @ grid._quad)


def spd_guard(Tcorr, T, delta=SPD_DELTA):
    """Eigen-decompose ``Tcorr`` with eigenvalues floored at ``delta * T``.

    Returns ``(eigvals, eigvecs, n_floored)``. Raises :class:`SPDError` for
    non-finite tensors.
    """
    Tcorr = np.asarray(Tcorr)
    if not np.all(np.isfinite(Tcorr)):
        raise SPDError("non-finite temperature tensor")
    lam, Q = np.linalg.eigh(Tcorr)
    floor = delta * np.asarray(T)[..., None]
    low = lam < floor
    n_floored = int(np.count_nonzero(np.any(low, axis=-1)))
    if n_floored:
        lam = np.where(low, floor, lam)
    if not np.all(lam > 0):
        raise SPDError("temperature tensor not positive definite after guard")
    return lam, Q, n_floored


def gaussian(m, Tcorr, grid, delta=SPD_DELTA, return_floored=False):
    """Anisotropic Gaussian with density ``m.rho``, mean ``m.u`` and covariance ``Tcorr``.

    ``G(v) = rho / sqrt(det(2 pi Tcorr)) * exp(-(v-u)^T Tcorr^{-1} (v-u) / 2)``.
    """
    lam, Q, n_floored = spd_guard(Tcorr, m.T, delta)
    if n_floored:
        prec = (Q / lam[..., None, :]) @ np.swapaxes(Q, -1, -2)
    else:
        prec = np.linalg.inv(Tcorr)
    G = _gaussian_values(m.rho, m.u, prec, np.sum(np.log(lam), axis=-1), grid)
    if return_floored:
        return G, n_floored
    return G


def conserve_moments(g, m, grid):
    """Correct equilibrium values so their discrete moments equal ``m`` exactly.

    Uses ``g * (1 + lambda . psi)`` with ``psi = (1, c/sqrt(T), |c|^2/(2T))``
    and ``c = v - u``; lambda solves a ``(d_v+2)``-square linear system per
    cell. Cells where the correction would make a node negative keep the
    uncorrected values. Returns ``(g_corrected, n_skipped)``.
    """
    u, T, rho = m.u, np.asarray(m.T), m.rho
    d = grid.d_v
    k = d + 2
    # psi = L phi with phi = (1, v, |v|^2/2), so every sum is a table product
    L = np.zeros(rho.shape + (k, k))
    s = np.sqrt(T)
    L[..., 0, 0] = 1.0
    idx = np.arange(1, d + 1)
    L[..., idx, 0] = -u / s[..., None]
    L[..., idx, idx] = 1.0 / s[..., None]
    L[..., -1, 0] = 0.5 * np.sum(u * u, axis=-1) / T
    L[..., -1, 1:-1] = -u / T[..., None]
    L[..., -1, -1] = 1.0 / T
    gw = g * grid.weight
    have = L @ (gw @ grid._phi)[..., None]
    A = L @ (gw @ grid._phiphi).reshape(rho.shape + (k, k)) @ np.swapaxes(L, -1, -2)
    target = np.zeros(rho.shape + (k, 1))
    target[..., 0, 0] = rho
    target[..., -1, 0] = 0.5 * d * rho
    lam = np.linalg.solve(A, target - have)
    mu = (np.swapaxes(L, -1, -2) @ lam)[..., 0]
    factor = 1.0 + mu @ grid._phi.T
    bad = np.any(factor < 0.0, axis=-1)
    factor = np.where(bad[..., None], 1.0, factor)
    return g * factor, int(np.count_nonzero(bad))


def heat_flux(f, m, grid, eps):
    """``(1/eps) int |v-u|^2/2 (v-u) f dv`` per cell."""
    c = grid.points - m.u[..., None, :]
    kern = 0.5 * np.sum(c**2, axis=-1, keepdims=True) * c
    return np.einsum("...n,...nk->...k", np.asarray(f), kern) * grid.weight / eps


def mass_defect(m, grid):
    """Relative discrete mass defect of the Maxwellian of ``m``."""
    M = maxwellian(m, grid)
    return np.sum(M, axis=-1) * grid.weight / m.rho - 1.0

