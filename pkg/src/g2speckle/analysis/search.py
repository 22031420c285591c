"""Deterministic searches over observation directions.

Both searches start from a dense cell-centred (theta, phi) grid and refine
locally: each level lays a ``(2 f + 1)^2`` sub-grid spanning one parent
cell on either side of the current best point, then shrinks the cell by
``f``. The current best point is always part of the sub-grid, so a level
never makes the result worse. Condition directions are additionally
polished with Gauss-Newton steps on the complex residual.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .. import kernels
from ..correlations import DriveParams, g2_from_factors, gm_leading_from_factors
from ..errors import InvalidArgumentError
from ..geometry import as_positions
from ..structure import combine_partitions, enumerate_partitions
from .grid import AngularGrid, directions

DEFAULT_SEARCH_GRID = (360, 720)
DEFAULT_SEED_GRID = (180, 360)


class Extremum(NamedTuple):
    k_obs: np.ndarray
    value: float
    theta: float
    phi: float
    coarse_value: float
    history: tuple


class ConditionDirection(NamedTuple):
    k_obs: np.ndarray
    residual: float
    theta: float
    phi: float
    S: complex
    S2: complex


def _better(which):
    if which == "max":
        return lambda a, b: a > b
    if which == "min":
        return lambda a, b: a < b
    raise InvalidArgumentError(f"which must be 'max' or 'min', got {which!r}")


def _values(svals, m, n, s):
    if m == 2:
        return g2_from_factors(svals[0], svals[1], n, s)
    return gm_leading_from_factors(svals, m, n, s)


def _local_extrema(values, which, count):
    """Flat indices of 3x3 local extrema (phi wraps), best first, ties by index."""
    filt = ndimage.maximum_filter if which == "max" else ndimage.minimum_filter
    mask = values == filt(values, size=3, mode=("nearest", "wrap"))
    idx = np.flatnonzero(mask)
    v = values.ravel()[idx]
    order = np.argsort(-v if which == "max" else v, kind="stable")
    return idx[order[:count]]


def _refine(f, theta, phi, dtheta, dphi, levels, factor, which):
    """Refine every start point in ``theta``/``phi`` (arrays) at once.

    Returns refined angles, values and the per-level best values, each with a
    leading candidate axis.
    """
    better = _better(which)
    pick = np.argmax if which == "max" else np.argmin
    theta = np.array(theta, dtype=float).reshape(-1)
    phi = np.array(phi, dtype=float).reshape(-1)
    value = np.asarray(f(directions(theta, phi)), dtype=float).copy()
    history = [value.copy()]
    offs = np.arange(-factor, factor + 1) / factor
    d_t = np.repeat(offs, offs.size)
    d_p = np.tile(offs, offs.size)
    rows = np.arange(theta.size)
    for _ in range(levels):
        T = theta[:, None] + d_t[None, :] * dtheta
        P = phi[:, None] + d_p[None, :] * dphi
        vals = np.asarray(f(directions(T.ravel(), P.ravel())), dtype=float).reshape(T.shape)
        i = pick(vals, axis=1)
        cand = vals[rows, i]
        upd = better(cand, value)
        value = np.where(upd, cand, value)
        theta = np.where(upd, T[rows, i], theta)
        phi = np.where(upd, P[rows, i], phi)
        history.append(value.copy())
        dtheta /= factor
        dphi /= factor
    return theta, phi, value, np.stack(history, axis=1)


def sphere_extrema(
    config,
    s_values,
    k_laser=(0.0, 0.0, 1.0),
    m=2,
    which=("max", "min"),
    grid=None,
    levels=5,
    factor=4,
    n_candidates=64,
):
    """Max/min of ``g^(m)`` over all observation directions for several ``s``.

    The coarse structure factors do not depend on ``s`` and are computed once.
    ``m = 2`` uses the closed form; other orders use the small-s leading term.
    Returns ``{which: [Extremum per s]}``.
    """
    grid = grid or AngularGrid(*DEFAULT_SEARCH_GRID)
    pos = as_positions(config)
    n = pos.shape[0]
    kl = np.asarray(k_laser, float)
    order = max(2, int(m))
    svals = kernels.phase_sums(pos, grid.points - kl[None, :], order)
    th_axis, ph_axis = grid.theta_axis, grid.phi_axis
    out = {w: [] for w in which}
    for s in s_values:
        s = float(s)
        coarse = _values(svals, m, n, s).reshape(grid.shape)

        def f(kobs, s=s):
            return _values(kernels.phase_sums(pos, kobs - kl[None, :], order), m, n, s)

        for w in which:
            cands = _local_extrema(coarse, w, n_candidates)
            i, j = np.divmod(cands, grid.n_phi)
            t, p, v, hist = _refine(
                f, th_axis[i], ph_axis[j], grid.dtheta, grid.dphi, levels, factor, w
            )
            # first (best-ranked) candidate wins ties
            b = int(np.argmax(v) if w == "max" else np.argmin(v))
            out[w].append(
                Extremum(
                    directions(t[b], p[b]),
                    float(v[b]),
                    float(t[b]),
                    float(p[b]),
                    float(coarse[i[b], j[b]]),
                    tuple(float(x) for x in hist[b]),
                )
            )
    return out


def extremum_search(config, drive: DriveParams, m=2, which="max", **kwargs) -> Extremum:
    """Two-stage (grid + local refinement) max or min of ``g^(m)`` on the sphere."""
    return sphere_extrema(config, [drive.s], drive.k_laser, m, (which,), **kwargs)[which][0]


# {{{ condition directions


def _field_and_grad(pos, theta, phi, kl, order, kind):
    """Residual field (S or S^(m)) and its (theta, phi) gradient at one direction."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    kobs = np.array([st * cp, st * sp, ct])
    d_t = np.array([ct * cp, ct * sp, -st])
    d_p = np.array([-st * sp, st * cp, 0.0])
    ph = pos @ (kobs - kl)
    at = pos @ d_t
    ap = pos @ d_p
    L = 1 if kind == "destructive" else order
    S = np.empty(L, complex)
    dS = np.empty((L, 2), complex)
    for l in range(1, L + 1):
        e = np.exp(1j * l * ph)
        S[l - 1] = e.sum()
        dS[l - 1, 0] = (1j * l * at * e).sum()
        dS[l - 1, 1] = (1j * l * ap * e).sum()
    if kind == "destructive" or L == 1:
        return S[0], dS[0], S
    F = 0j
    G = np.zeros(2, complex)
    for t in enumerate_partitions(L):
        mono = float(t.coefficient)
        for l, c in enumerate(t.counts, start=1):
            if c:
                mono = mono * S[l - 1] ** c
        F += mono
        for l, c in enumerate(t.counts, start=1):
            if not c:
                continue
            rest = float(t.coefficient) * c * S[l - 1] ** (c - 1)
            for l2, c2 in enumerate(t.counts, start=1):
                if c2 and l2 != l:
                    rest = rest * S[l2 - 1] ** c2
            G += rest * dS[l - 1]
    return F, G, S


def polish_direction(pos, theta, phi, k_laser, order, kind, max_iter=60):
    """Gauss-Newton on (Re F, Im F) = 0 with a backtracking step; least-norm steps
    handle rank-deficient Jacobians (zero lines on chains)."""
    kl = np.asarray(k_laser, float)
    F, G, _ = _field_and_grad(pos, theta, phi, kl, order, kind)
    r = abs(F) ** 2
    for _ in range(max_iter):
        if r == 0.0:
            break
        J = np.array([[G[0].real, G[1].real], [G[0].imag, G[1].imag]])
        step = np.linalg.lstsq(J, -np.array([F.real, F.imag]), rcond=None)[0]
        t = 1.0
        accepted = False
        while t > 1e-8:
            th2, ph2 = theta + t * step[0], phi + t * step[1]
            F2, G2, _ = _field_and_grad(pos, th2, ph2, kl, order, kind)
            r2 = abs(F2) ** 2
            if r2 < r:
                theta, phi, F, G, r = th2, ph2, F2, G2, r2
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
    return theta, phi


def _residual_of(svals, order):
    if order == 1:
        return np.abs(svals[0]) ** 2
    return np.abs(combine_partitions(svals[:order], order)) ** 2


def coarse_phase_sums(config, grid, k_laser=(0.0, 0.0, 1.0), max_order=2):
    """``S(l k)`` on every grid point, shape ``(max_order, len(grid))``."""
    pos = as_positions(config)
    kl = np.asarray(k_laser, float)
    return kernels.phase_sums(pos, grid.points - kl[None, :], max(2, int(max_order)))


def find_condition_directions(
    config,
    m=2,
    kind="destructive",
    n_seeds=10,
    k_laser=(0.0, 0.0, 1.0),
    grid=None,
    levels=5,
    factor=4,
    polish=True,
    min_coherent_abs2=1e-6,
    dedupe_tol=1e-6,
    coarse=None,
) -> list[ConditionDirection]:
    """Directions minimizing ``|S(k)|^2`` (``destructive``) or ``|S^(m)(k)|^2``
    (``generalized_antibunch``), sorted by residual.

    Residuals are reported as computed, never assumed zero. For the
    antibunching kind, points where ``|S(k)|^2 < min_coherent_abs2`` are
    dropped: there every factor ``S(lk)`` may vanish together, which is a
    destructive direction, not an antibunching one. ``coarse`` may carry
    precomputed :func:`coarse_phase_sums` on ``grid`` (at least ``max(m, 2)``
    orders) so several searches can share one pass.
    """
    if kind not in ("destructive", "generalized_antibunch"):
        raise InvalidArgumentError(f"unknown condition kind {kind!r}")
    if int(n_seeds) < 1:
        raise InvalidArgumentError("n_seeds must be >= 1")
    grid = grid or AngularGrid(*DEFAULT_SEED_GRID)
    pos = as_positions(config)
    kl = np.asarray(k_laser, float)
    order = 1 if kind == "destructive" else int(m)
    if order < 1:
        raise InvalidArgumentError("order must be >= 1")
    L = max(order, 2)

    def f(kobs):
        return _residual_of(kernels.phase_sums(pos, kobs - kl[None, :], L), order)

    if coarse is None:
        coarse = coarse_phase_sums(pos, grid, kl, L)
    resid = _residual_of(coarse, order).reshape(grid.shape)
    seeds = _local_extrema(resid, "min", int(n_seeds))
    i, j = np.divmod(seeds, grid.n_phi)
    ts, ps, _, _ = _refine(
        f, grid.theta_axis[i], grid.phi_axis[j], grid.dtheta, grid.dphi, levels, factor, "min"
    )
    found = []
    for t, p in zip(ts.tolist(), ps.tolist()):
        if polish:
            t, p = polish_direction(pos, t, p, kl, order, kind)
        kobs = directions(t, p)
        sv = kernels.phase_sums(pos, (kobs - kl)[None, :], L)[:, 0]
        res = float(_residual_of(sv[:, None], order)[0])
        if kind == "generalized_antibunch" and abs(sv[0]) ** 2 < min_coherent_abs2:
            continue
        found.append(ConditionDirection(kobs, res, float(t), float(p), complex(sv[0]), complex(sv[1])))
    found.sort(key=lambda d: d.residual)
    unique = []
    for d in found:
        if all(np.linalg.norm(d.k_obs - u.k_obs) > dedupe_tol for u in unique):
            unique.append(d)
    return unique


# }}}
