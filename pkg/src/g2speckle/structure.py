"""Plain and generalized structure factors.

``S(k) = sum_mu exp(i k . R_mu)``. The generalized m-th order factor sums
``exp(i k . (R_mu1 + ... + R_mum))`` over mutually distinct indices and is
expanded over integer partitions of ``m`` (cycle types of the symmetric
group), each weighted by its exact conjugacy-class size.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, ResourceLimitError
from .geometry import as_positions

#: Largest order accepted without ``allow_large=True``.
MAX_ORDER = 12
#: Size guard (N**m) for the brute-force generalized structure factor.
BRUTEFORCE_LIMIT = 10**8
_CHAIN_LIMIT_TOL = 1e-9


@dataclass(frozen=True)
class ScatteringVector:
    """``k = k_obs - k_laser`` in units of the optical wavenumber."""

    k_obs: tuple
    k_laser: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        for name in ("k_obs", "k_laser"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if not np.all(np.isfinite(v)) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise InvalidArgumentError(f"{name} must be a unit 3-vector")
            object.__setattr__(self, name, tuple(float(c) for c in v))

    @property
    def k(self) -> np.ndarray:
        return np.subtract(self.k_obs, self.k_laser)


def as_kvector(k) -> np.ndarray:
    if isinstance(k, ScatteringVector):
        return k.k
    k = np.asarray(k, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(k)):
        raise InvalidArgumentError("k must be finite")
    return k


# {{{ plain structure factor


def structure_factor(config, k) -> complex:
    """``sum_mu exp(i k . R_mu)``; ``|S| <= N`` and ``S(0) = N``."""
    pos = as_positions(config)
    return complex(kernels.phase_sums(pos, as_kvector(k)[None, :], 1)[0, 0])


def structure_factor_orders(config, kvecs, max_order) -> np.ndarray:
    """``S(l k)`` for ``l = 1..max_order`` over many ``k`` rows; shape ``(max_order, M)``."""
    pos = as_positions(config)
    kvecs = np.asarray(kvecs, dtype=np.float64).reshape(-1, 3)
    return kernels.phase_sums(pos, kvecs, max_order)


def chain_structure_factor(n: int, phi: float) -> complex:
    """Closed-form chain sum ``(1 - e^{i N phi}) / (e^{-i phi} - 1)``.

    Returns the limit value ``n`` when ``phi`` is within 1e-9 of a multiple
    of ``2 pi`` (removable singularity).
    """
    if int(n) < 1:
        raise InvalidArgumentError("n must be >= 1")
    n = int(n)
    frac = phi / (2 * math.pi)
    if abs(frac - round(frac)) * 2 * math.pi < _CHAIN_LIMIT_TOL:
        return complex(n)
    num = 1 - np.exp(1j * n * phi)
    den = np.exp(-1j * phi) - 1
    return complex(num / den)


# }}}


# {{{ partitions


@dataclass(frozen=True)
class PartitionTerm:
    """Integer partition of ``m`` as cycle counts ``counts[j-1] = c_j``."""

    m: int
    counts: tuple
    cardinality: int
    sign: int

    @property
    def n_cycles(self) -> int:
        return sum(self.counts)

    @property
    def coefficient(self) -> int:
        """Signed class size; the weight of this term in the generalized factor."""
        return self.sign * self.cardinality

    def parts(self) -> tuple:
        """The partition as a non-increasing tuple of part sizes."""
        out = []
        for j in range(self.m, 0, -1):
            out.extend([j] * self.counts[j - 1])
        return tuple(out)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "counts": list(self.counts),
            "parts": list(self.parts()),
            "cardinality": self.cardinality,
            "sign": self.sign,
        }


def _check_order(m, allow_large):
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise InvalidArgumentError(f"order must be an integer, got {m!r}")
    if m < 1 or (m > MAX_ORDER and not allow_large):
        raise InvalidArgumentError(
            f"order must satisfy 1 <= m <= {MAX_ORDER} (pass allow_large=True to exceed)"
        )


def _partitions_desc(m, largest):
    if m == 0:
        yield ()
        return
    for first in range(min(m, largest), 0, -1):
        for rest in _partitions_desc(m - first, first):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def _enumerate(m):
    terms = []
    for parts in _partitions_desc(m, m):
        counts = [0] * m
        for p in parts:
            counts[p - 1] += 1
        centralizer = 1
        for j, c in enumerate(counts, start=1):
            centralizer *= math.factorial(c) * j**c
        card, rem = divmod(math.factorial(m), centralizer)
        assert rem == 0
        sign = -1 if (m - sum(counts)) % 2 else 1
        terms.append(PartitionTerm(m, tuple(counts), card, sign))
    # most cycles first (1+1+...+1 leads), then smaller largest part
    terms.sort(key=lambda t: (-t.n_cycles, max(t.parts())))
    return tuple(terms)


def enumerate_partitions(m: int, allow_large: bool = False) -> list[PartitionTerm]:
    """All integer partitions of ``m`` with exact class sizes ``m!/prod(c_j! j^c_j)``
    and signs ``(-1)^(m - sum c_j)``."""
    _check_order(m, allow_large)
    return list(_enumerate(int(m)))


def combine_partitions(svals, m, allow_large=False):
    """Evaluate the partition expansion from ``svals[l-1] = S(l k)`` (any trailing shape)."""
    terms = enumerate_partitions(m, allow_large)
    svals = np.asarray(svals)
    out = np.zeros(svals.shape[1:], dtype=np.complex128)
    for t in terms:
        prod = np.full(svals.shape[1:], float(t.coefficient), dtype=np.complex128)
        for l, c in enumerate(t.counts, start=1):
            if c:
                prod = prod * svals[l - 1] ** c
        out = out + prod
    return out


def generalized_structure_factor(config, k, m: int, allow_large: bool = False) -> complex:
    """Generalized m-th order factor via the partition expansion.

    ``m=2`` gives ``S(k)^2 - S(2k)``; ``m=1`` gives ``S(k)``.
    """
    _check_order(m, allow_large)
    svals = structure_factor_orders(config, as_kvector(k), m)[:, 0]
    return complex(combine_partitions(svals, m, allow_large))


def generalized_structure_factor_bruteforce(config, k, m: int) -> complex:
    """Direct sum over ordered m-tuples of mutually distinct emitters (oracle)."""
    if int(m) < 1:
        raise InvalidArgumentError("order must be >= 1")
    pos = as_positions(config)
    n = pos.shape[0]
    if float(n) ** m > BRUTEFORCE_LIMIT:
        raise ResourceLimitError(f"N**m = {n}**{m} exceeds the brute-force limit {BRUTEFORCE_LIMIT}")
    phasors = np.exp(1j * (pos @ as_kvector(k)))
    return kernels.distinct_tuple_sum(phasors, int(m))


# }}}


# {{{ Stirling numbers


def falling_factorial(n: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= n - i
    return out


def unsigned_stirling_from_partitions(m: int, allow_large: bool = False) -> list[int]:
    """``c(m, j)`` for ``j = 0..m`` as sums of class sizes with ``j`` cycles."""
    out = [0] * (m + 1)
    for t in enumerate_partitions(m, allow_large):
        out[t.n_cycles] += t.cardinality
    return out


def stirling_falling_factorial_check(m: int, n: int) -> tuple[int, int]:
    """Both sides of ``N(N-1)...(N-m+1) = sum_j s(m,j) N^j`` in exact integers.

    The right-hand side builds the signed Stirling numbers of the first kind
    from partition class sizes.
    """
    _check_order(m, False)
    if not isinstance(n, (int, np.integer)) or n < 0 or n > 10**6:
        raise InvalidArgumentError("n must be an integer in [0, 10**6]")
    n = int(n)
    c = unsigned_stirling_from_partitions(int(m))
    rhs = sum((-1) ** (m - j) * c[j] * n**j for j in range(1, m + 1))
    return falling_factorial(n, int(m)), rhs


# }}}
