"""Intensity and equal-time photon correlations of independent two-level emitters.

All emitters share the product steady state of a resonantly driven
two-level atom with saturation parameter ``s``::

    p_ee = s / (2 (1 + s))          <sigma+ sigma->
    coh  = -sqrt(s) / (sqrt(2) (1 + s))   <sigma+> = <sigma->  (real)

The closed form for ``g2`` only needs ``S(k)`` and ``S(2k)``; the
brute-force path sums the full 2m-fold index expansion and is kept
independent of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateInputError, InvalidArgumentError, ResourceLimitError
from .geometry import as_positions
from .structure import (
    ScatteringVector,
    as_kvector,
    combine_partitions,
    structure_factor_orders,
)

#: Size guard (N**(2m)) for :func:`correlation_bruteforce`.
BRUTEFORCE_LIMIT = 10**8
#: Below this normalized intensity a normalized correlation is refused.
MIN_INTENSITY = 1e-30

# Heuristic validity thresholds for the asymptotic predictions (not fitted values).
#: Eq. "destructive" prediction is trusted when |S|^2 < DESTRUCTIVE_REGIME_FRACTION * sN.
DESTRUCTIVE_REGIME_FRACTION = 0.01
#: Expected relative agreement of the antibunching approximation near S2 = 0.
ANTIBUNCH_REL_TOL = 0.30
#: Expected relative agreement of the destructive prediction inside its regime.
DESTRUCTIVE_REL_TOL = 0.25


@dataclass(frozen=True)
class SteadyState:
    p_ee: float
    coh: float

    @classmethod
    def from_s(cls, s: float) -> "SteadyState":
        return cls(s / (2.0 * (1.0 + s)), -math.sqrt(s) / (math.sqrt(2.0) * (1.0 + s)))


@dataclass(frozen=True)
class DriveParams:
    """Saturation parameter and laser direction."""

    s: float
    k_laser: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        s = float(self.s)
        if not (math.isfinite(s) and s > 0):
            raise InvalidArgumentError(f"saturation parameter must be finite and > 0, got {self.s}")
        kl = np.asarray(self.k_laser, dtype=float).reshape(3)
        if abs(np.linalg.norm(kl) - 1.0) > 1e-12:
            raise InvalidArgumentError("k_laser must be a unit 3-vector")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "k_laser", tuple(float(c) for c in kl))

    def steady_state(self) -> SteadyState:
        return SteadyState.from_s(self.s)

    def scattering(self, k_obs) -> ScatteringVector:
        return ScatteringVector(tuple(np.asarray(k_obs, float).reshape(3)), self.k_laser)


@dataclass(frozen=True)
class CorrelationRecord:
    """Per-direction bundle used by maps, scans and CSV export."""

    k: ScatteringVector
    structure_factor: complex
    s_abs2: float
    g1_normalized: float
    g1_physical: float
    g2: float
    gm: dict = field(default_factory=dict)
    theta: float | None = None
    phi: float | None = None


def _s_of(drive):
    return drive.s if isinstance(drive, DriveParams) else float(drive)


def g1_physical_prefactor(s):
    return s / (2.0 * (1.0 + s) ** 2)


def _check_intensity(g1n):
    if np.any(np.asarray(g1n) < MIN_INTENSITY):
        raise DegenerateInputError("normalized intensity below 1e-30; correlation undefined")


# {{{ array-level formulas


def g2_from_factors(S1, S2, n, s):
    """Closed-form g2 from ``S(k)`` and ``S(2k)`` (scalars or arrays)."""
    S1 = np.asarray(S1, dtype=np.complex128)
    S2 = np.asarray(S2, dtype=np.complex128)
    a2 = S1.real**2 + S1.imag**2
    g1n = s * n + a2
    _check_intensity(g1n)
    if n == 1:
        # identically zero; skip the 4s(1 - |S|^2) round-off
        return np.zeros(np.broadcast(S1, S2).shape)
    coherent = np.abs(S1 * S1 - S2) ** 2
    num = 2.0 * s * n * (2.0 + s * (n - 1)) + 4.0 * s * (n - 2) * a2 + coherent
    return num / g1n**2


def gm_leading_from_factors(svals, m, n, s):
    """``|S^(m)|^2 / (sN + |S|^2)^m`` from ``svals[l-1] = S(l k)``."""
    svals = np.asarray(svals, dtype=np.complex128)
    g1n = s * n + np.abs(svals[0]) ** 2
    _check_intensity(g1n)
    sm = combine_partitions(svals[:m], m)
    return np.abs(sm) ** 2 / g1n**m


# }}}


def g1(config, drive, k) -> tuple[float, float]:
    """``(sN + |S(k)|^2, s/(2(1+s)^2) * (sN + |S(k)|^2))``."""
    s = _s_of(drive)
    n = as_positions(config).shape[0]
    S = structure_factor_orders(config, as_kvector(k), 1)[0, 0]
    norm = s * n + abs(S) ** 2
    return float(norm), float(g1_physical_prefactor(s) * norm)


def g2_closed_form(config, drive, k) -> float:
    """Normalized equal-time ``g2`` in closed form::

        2sN[2 + s(N-1)] + 4s(N-2)|S|^2 + |S(k)^2 - S(2k)|^2
        ---------------------------------------------------
                      (sN + |S(k)|^2)^2
    """
    s = _s_of(drive)
    n = as_positions(config).shape[0]
    S1, S2 = structure_factor_orders(config, as_kvector(k), 2)[:, 0]
    return float(g2_from_factors(S1, S2, n, s))


def correlation_bruteforce(config, drive, k, m: int = 2) -> float:
    """``G^(m) / (G^(1))^m`` by direct summation over all 2m emitter indices.

    Factorizes the expectation value atom by atom, so it never builds a
    2^N state vector. Raises :class:`ResourceLimitError` above N^(2m) = 1e8.
    """
    if int(m) < 1:
        raise InvalidArgumentError("order must be >= 1")
    pos = as_positions(config)
    n = pos.shape[0]
    if float(n) ** (2 * m) > BRUTEFORCE_LIMIT:
        raise ResourceLimitError(f"N**(2m) = {n}**{2 * m} exceeds {BRUTEFORCE_LIMIT}")
    ss = SteadyState.from_s(_s_of(drive))
    phasors = np.exp(1j * (pos @ as_kvector(k)))
    G1 = kernels.correlation_sum(phasors, 1, ss.p_ee, ss.coh).real
    if G1 < MIN_INTENSITY * g1_physical_prefactor(_s_of(drive)):
        raise DegenerateInputError("first-order correlation vanishes")
    if m == 1:
        return 1.0
    Gm = kernels.correlation_sum(phasors, int(m), ss.p_ee, ss.coh).real
    return float(Gm / G1**m)


def gm_leading_order(config, drive, k, m: int) -> float:
    """Small-s leading term ``|S^(m)(k)|^2 / (sN + |S(k)|^2)^m``."""
    if int(m) < 1:
        raise InvalidArgumentError("order must be >= 1")
    s = _s_of(drive)
    n = as_positions(config).shape[0]
    svals = structure_factor_orders(config, as_kvector(k), int(m))[:, 0]
    return float(gm_leading_from_factors(svals, int(m), n, s))


# {{{ asymptotic predictions


def g2_ordered_predictions(n: int, s: float, regime: str) -> float:
    """Chain predictions.

    ``destructive``: ``4/(sN) + 2 - 2/N`` (S = S(2k) = 0).
    ``antibunch``: ``8 s N``, valid for ``sN << 1`` (caller's responsibility).
    ``even_exception``: even ``N`` at ``phi = pi``, closed form with S = 0, S(2k) = N.
    """
    n = int(n)
    if n < 2:
        raise InvalidArgumentError("n must be >= 2")
    if not s > 0:
        raise InvalidArgumentError("s must be > 0")
    if regime == "destructive":
        return 4.0 / (s * n) + 2.0 - 2.0 / n
    if regime == "antibunch":
        return 8.0 * s * n
    if regime == "even_exception":
        if n % 2:
            raise InvalidArgumentError("even_exception requires an even number of emitters")
        return float(g2_from_factors(0.0, float(n), n, s))
    raise InvalidArgumentError(f"unknown regime {regime!r}")


def g2_destructive_prediction(config, drive, k) -> float:
    """``|S(2k)|^2/(sN)^2 + 4/(sN) + 2 - 2/N``, meant for near-destructive directions."""
    s = _s_of(drive)
    n = as_positions(config).shape[0]
    S2 = structure_factor_orders(config, as_kvector(k), 2)[1, 0]
    sn = s * n
    return float(abs(S2) ** 2 / sn**2 + 4.0 / sn + 2.0 - 2.0 / n)


def g2_antibunch_prediction(config, drive, k) -> float:
    """``4 s N (1 + |S|^2) / |S|^4``, meant near ``S(k)^2 = S(2k)`` with ``sN -> 0``."""
    s = _s_of(drive)
    n = as_positions(config).shape[0]
    S = structure_factor_orders(config, as_kvector(k), 1)[0, 0]
    return float(antibunch_from_abs2(abs(S) ** 2, n, s))


def antibunch_from_abs2(a2, n, s):
    a2 = np.asarray(a2, dtype=float)
    if np.any(a2 <= 0):
        raise DegenerateInputError("antibunching prediction needs |S(k)| > 0")
    return 4.0 * s * n * (1.0 + a2) / a2**2


# }}}


def correlation_record(config, drive: DriveParams, k_obs, orders=(2,), theta=None, phi=None):
    """Full :class:`CorrelationRecord` for one observation direction."""
    sv = drive.scattering(k_obs)
    n = as_positions(config).shape[0]
    max_order = max(2, *orders) if orders else 2
    svals = structure_factor_orders(config, sv.k, max_order)[:, 0]
    a2 = abs(svals[0]) ** 2
    g1n = drive.s * n + a2
    _check_intensity(g1n)
    gm = {int(m): float(gm_leading_from_factors(svals, int(m), n, drive.s)) for m in orders if m != 2}
    return CorrelationRecord(
        k=sv,
        structure_factor=complex(svals[0]),
        s_abs2=float(a2),
        g1_normalized=float(g1n),
        g1_physical=float(g1_physical_prefactor(drive.s) * g1n),
        g2=float(g2_from_factors(svals[0], svals[1], n, drive.s)),
        gm=gm,
        theta=theta,
        phi=phi,
    )
