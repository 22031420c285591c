"""Observation-direction grids, angular maps and great-circle scans."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..correlations import (
    CorrelationRecord,
    DriveParams,
    g1_physical_prefactor,
    g2_from_factors,
    gm_leading_from_factors,
)
from ..errors import InvalidArgumentError
from ..geometry import as_positions
from ..structure import ScatteringVector, structure_factor_orders


def directions(theta, phi) -> np.ndarray:
    """Unit vectors for polar angle ``theta`` (from +z) and azimuth ``phi``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


@dataclass(frozen=True)
class AngularGrid:
    """Cell-centred (theta, phi) grid over the full sphere, theta-major order.

    ``weights`` are exact cell solid angles ``(cos th_lo - cos th_hi) dphi``,
    which sum to 4 pi up to round-off.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if int(self.n_theta) < 1 or int(self.n_phi) < 1:
            raise InvalidArgumentError("grid resolution must be >= 1 in both angles")
        object.__setattr__(self, "n_theta", int(self.n_theta))
        object.__setattr__(self, "n_phi", int(self.n_phi))

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    @property
    def dtheta(self):
        return np.pi / self.n_theta

    @property
    def dphi(self):
        return 2 * np.pi / self.n_phi

    @property
    def theta_axis(self):
        return (np.arange(self.n_theta) + 0.5) * self.dtheta

    @property
    def phi_axis(self):
        return np.arange(self.n_phi) * self.dphi

    @property
    def theta(self):
        return np.repeat(self.theta_axis, self.n_phi)

    @property
    def phi(self):
        return np.tile(self.phi_axis, self.n_theta)

    @property
    def points(self) -> np.ndarray:
        return directions(self.theta, self.phi)

    @property
    def weights(self) -> np.ndarray:
        edges = np.arange(self.n_theta + 1) * self.dtheta
        band = np.cos(edges[:-1]) - np.cos(edges[1:])
        return np.repeat(band * self.dphi, self.n_phi)

    def __len__(self):
        return self.n_theta * self.n_phi


@dataclass
class MapData:
    """Column-oriented correlation data over a list of directions."""

    theta: np.ndarray
    phi: np.ndarray
    k_obs: np.ndarray
    k_laser: tuple
    s: float
    n: int
    S: np.ndarray
    S2: np.ndarray
    g2: np.ndarray
    gm: dict = field(default_factory=dict)

    @property
    def s_abs2(self):
        return self.S.real**2 + self.S.imag**2

    @property
    def g1_normalized(self):
        return self.s * self.n + self.s_abs2

    @property
    def g1_physical(self):
        return g1_physical_prefactor(self.s) * self.g1_normalized

    @property
    def one_minus_exp_neg_g2(self):
        # presentational transform; raw g2 is always kept
        return -np.expm1(-self.g2)

    def __len__(self):
        return self.S.shape[0]

    def records(self) -> list[CorrelationRecord]:
        out = []
        a2 = self.s_abs2
        g1n = self.g1_normalized
        g1p = self.g1_physical
        for i in range(len(self)):
            out.append(
                CorrelationRecord(
                    k=ScatteringVector(tuple(self.k_obs[i]), self.k_laser),
                    structure_factor=complex(self.S[i]),
                    s_abs2=float(a2[i]),
                    g1_normalized=float(g1n[i]),
                    g1_physical=float(g1p[i]),
                    g2=float(self.g2[i]),
                    gm={m: float(v[i]) for m, v in self.gm.items()},
                    theta=float(self.theta[i]),
                    phi=float(self.phi[i]),
                )
            )
        return out


def _orders(orders):
    orders = sorted({int(m) for m in (orders or (2,))})
    if orders[0] < 1:
        raise InvalidArgumentError("correlation orders must be >= 1")
    return orders


def evaluate_directions(config, drive: DriveParams, k_obs, orders=(2,), theta=None, phi=None):
    """Correlation columns for arbitrary observation directions ``k_obs`` (M, 3)."""
    orders = _orders(orders)
    k_obs = np.asarray(k_obs, dtype=float).reshape(-1, 3)
    if k_obs.shape[0] == 0:
        raise InvalidArgumentError("empty direction list")
    n = as_positions(config).shape[0]
    kvecs = k_obs - np.asarray(drive.k_laser)[None, :]
    svals = structure_factor_orders(config, kvecs, max(2, orders[-1]))
    g2 = g2_from_factors(svals[0], svals[1], n, drive.s)
    gm = {m: gm_leading_from_factors(svals, m, n, drive.s) for m in orders if m != 2}
    if theta is None:
        theta = np.arccos(np.clip(k_obs[:, 2], -1, 1))
    if phi is None:
        phi = np.mod(np.arctan2(k_obs[:, 1], k_obs[:, 0]), 2 * np.pi)
    return MapData(
        theta=np.asarray(theta, float),
        phi=np.asarray(phi, float),
        k_obs=k_obs,
        k_laser=drive.k_laser,
        s=drive.s,
        n=n,
        S=svals[0],
        S2=svals[1],
        g2=g2,
        gm=gm,
    )


def map_data(config, drive: DriveParams, grid: AngularGrid, orders=(2,)) -> MapData:
    return evaluate_directions(config, drive, grid.points, orders, grid.theta, grid.phi)


def angular_map(config, drive: DriveParams, grid: AngularGrid, orders=(2,)) -> list[CorrelationRecord]:
    """One record per grid point, in grid order."""
    return map_data(config, drive, grid, orders).records()


def scan_plane_basis(k_laser, plane_normal):
    """In-plane unit vector ``u`` such that the scan is ``cos t k_L + sin t u``."""
    kl = np.asarray(k_laser, float)
    nrm = np.asarray(plane_normal, float).reshape(3)
    nrm = nrm - np.dot(nrm, kl) * kl
    if not np.linalg.norm(nrm) > 1e-12:
        raise InvalidArgumentError("plane normal must be non-zero and not parallel to the laser")
    nrm = nrm / np.linalg.norm(nrm)
    return np.cross(nrm, kl)


def plane_scan(config, drive: DriveParams, plane_normal, n_points: int, orders=(2,)) -> MapData:
    """Great circle through ``k_laser`` in the plane orthogonal to ``plane_normal``.

    Scan angles ``t_j = 2 pi j / n_points`` go into the ``theta`` column;
    ``t = 0`` is the forward direction. For the laser along +z and normal +y
    the circle is the xz-plane with ``k_obs = (sin t, 0, cos t)``.
    """
    if int(n_points) < 2:
        raise InvalidArgumentError("n_points must be >= 2")
    u = scan_plane_basis(drive.k_laser, plane_normal)
    t = 2 * np.pi * np.arange(int(n_points)) / int(n_points)
    kl = np.asarray(drive.k_laser, float)
    k_obs = np.cos(t)[:, None] * kl[None, :] + np.sin(t)[:, None] * u[None, :]
    azimuth = float(np.mod(np.arctan2(u[1], u[0]), 2 * np.pi))
    return evaluate_directions(config, drive, k_obs, orders, t, np.full_like(t, azimuth))
