"""Hot numeric loops.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version. The public names dispatch on :data:`g2speckle._backend.USE_NUMBA`;
both variants stay importable (``*_numpy`` / ``*_numba``) so the benchmark
and the tests can compare them directly.

Conventions: ``positions`` is a C-contiguous ``(N, 3)`` float64 array,
``kvecs`` is ``(M, 3)`` float64, phasors are complex128.
"""

import itertools
import math

import numpy as np

from ._backend import USE_NUMBA, numba

#: Above this many emitters the numba phase sum switches from a running
#: accumulator to blocked pairwise accumulation.
PAIRWISE_THRESHOLD = 10_000
_BLOCK = 128

# numpy path: max elements of one (directions x emitters) phase chunk
_CHUNK_ELEMS = 1 << 20


# {{{ numpy implementations


def phase_sums_numpy(positions, kvecs, max_order):
    """Return ``out[l-1, j] = sum_mu exp(i l k_j . R_mu)`` for ``l = 1..max_order``."""
    n = positions.shape[0]
    m = kvecs.shape[0]
    out = np.empty((max_order, m), dtype=np.complex128)
    x, y, z = positions[:, 0], positions[:, 1], positions[:, 2]
    chunk = max(1, _CHUNK_ELEMS // max(n, 1))
    for a in range(0, m, chunk):
        kc = kvecs[a : a + chunk]
        ph = kc[:, 0:1] * x + kc[:, 1:2] * y + kc[:, 2:3] * z
        base = np.cos(ph) + 1j * np.sin(ph)
        term = base
        for l in range(max_order):
            if l:
                term = term * base
            # np.sum over the contiguous axis is pairwise
            out[l, a : a + chunk] = term.sum(axis=1)
    return out


def distinct_tuple_sum_numpy(phasors, m):
    """Sum of ``prod_a z[mu_a]`` over ordered m-tuples of mutually distinct indices."""
    n = phasors.shape[0]
    total = 0j
    it = itertools.permutations(range(n), m)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(it, 1 << 15)), dtype=np.int64
        )
        if flat.size == 0:
            break
        block = flat.reshape(-1, m)
        total += np.prod(phasors[block], axis=1).sum()
    return complex(total)


def correlation_sum_numpy(phasors, m, p_ee, coh):
    """Unnormalized ``G^(m)`` by the direct 2m-fold index sum.

    Per-atom operator content with ``a`` raisings and ``b`` lowerings
    evaluates to 0 (a >= 2 or b >= 2), ``p_ee`` (1, 1), ``coh`` (1, 0) or
    (0, 1), and 1 otherwise.
    """
    n = phasors.shape[0]
    tuples = np.indices((n,) * m).reshape(m, -1).T
    distinct = np.ones(tuples.shape[0], dtype=bool)
    for a in range(m):
        for b in range(a + 1, m):
            distinct &= tuples[:, a] != tuples[:, b]
    nu_phase = np.conj(np.prod(phasors[tuples], axis=1))
    total = 0j
    for mu in tuples:
        if len(set(mu.tolist())) < m:
            # some atom carries two raisings
            continue
        overlap = (tuples[:, :, None] == mu[None, None, :]).any(axis=1).sum(axis=1)
        factor = np.where(distinct, p_ee**overlap * coh ** (2 * m - 2 * overlap), 0.0)
        total += np.prod(phasors[mu]) * np.dot(factor, nu_phase)
    return complex(total)


# }}}


# {{{ numba implementations

if USE_NUMBA:
    njit = numba.njit
    prange = numba.prange

    @njit(cache=True, nogil=True)
    def _tree_sum(buf, size):
        while size > 1:
            half = size // 2
            for i in range(half):
                buf[i] = buf[2 * i] + buf[2 * i + 1]
            if size % 2 == 1:
                buf[half] = buf[size - 1]
                size = half + 1
            else:
                size = half
        return buf[0]

    @njit(parallel=True, cache=True, nogil=True)
    def _phase_sums_nb(positions, kvecs, max_order):
        n = positions.shape[0]
        m = kvecs.shape[0]
        out = np.empty((max_order, m), dtype=np.complex128)
        pairwise = n > PAIRWISE_THRESHOLD
        nblocks = (n + _BLOCK - 1) // _BLOCK
        for j in prange(m):
            kx = kvecs[j, 0]
            ky = kvecs[j, 1]
            kz = kvecs[j, 2]
            if pairwise:
                parts = np.zeros((max_order, nblocks), dtype=np.complex128)
            else:
                parts = np.zeros((max_order, 1), dtype=np.complex128)
            for mu in range(n):
                ph = kx * positions[mu, 0] + ky * positions[mu, 1] + kz * positions[mu, 2]
                base = complex(math.cos(ph), math.sin(ph))
                term = base
                blk = mu // _BLOCK if pairwise else 0
                for l in range(max_order):
                    if l > 0:
                        term = term * base
                    parts[l, blk] += term
            for l in range(max_order):
                if pairwise:
                    out[l, j] = _tree_sum(parts[l].copy(), nblocks)
                else:
                    out[l, j] = parts[l, 0]
        return out

    @njit(cache=True, nogil=True)
    def _distinct_tuple_sum_nb(phasors, m):
        n = phasors.shape[0]
        idx = np.zeros(m, dtype=np.int64)
        total = 0j
        while True:
            ok = True
            for a in range(m):
                for b in range(a + 1, m):
                    if idx[a] == idx[b]:
                        ok = False
            if ok:
                p = 1.0 + 0j
                for a in range(m):
                    p = p * phasors[idx[a]]
                total += p
            pos = m - 1
            while pos >= 0:
                idx[pos] += 1
                if idx[pos] < n:
                    break
                idx[pos] = 0
                pos -= 1
            if pos < 0:
                break
        return total

    @njit(cache=True, nogil=True)
    def _correlation_sum_nb(phasors, m, p_ee, coh):
        n = phasors.shape[0]
        idx = np.zeros(2 * m, dtype=np.int64)  # mu_1..mu_m, nu_1..nu_m
        total = 0j
        while True:
            zero = False
            for a in range(m):
                for b in range(a + 1, m):
                    if idx[a] == idx[b] or idx[m + a] == idx[m + b]:
                        zero = True
            if not zero:
                overlap = 0
                for a in range(m):
                    for b in range(m):
                        if idx[a] == idx[m + b]:
                            overlap += 1
                factor = p_ee**overlap * coh ** (2 * m - 2 * overlap)
                p = 1.0 + 0j
                for a in range(m):
                    p = p * phasors[idx[a]] * np.conj(phasors[idx[m + a]])
                total += factor * p
            pos = 2 * m - 1
            while pos >= 0:
                idx[pos] += 1
                if idx[pos] < n:
                    break
                idx[pos] = 0
                pos -= 1
            if pos < 0:
                break
        return total

    def phase_sums_numba(positions, kvecs, max_order):
        return _phase_sums_nb(positions, kvecs, int(max_order))

    def distinct_tuple_sum_numba(phasors, m):
        return complex(_distinct_tuple_sum_nb(phasors, int(m)))

    def correlation_sum_numba(phasors, m, p_ee, coh):
        return complex(_correlation_sum_nb(phasors, int(m), float(p_ee), float(coh)))

else:
    phase_sums_numba = None
    distinct_tuple_sum_numba = None
    correlation_sum_numba = None

# }}}


def _prep(positions, kvecs):
    positions = np.ascontiguousarray(positions, dtype=np.float64).reshape(-1, 3)
    kvecs = np.ascontiguousarray(kvecs, dtype=np.float64).reshape(-1, 3)
    return positions, kvecs


def phase_sums(positions, kvecs, max_order=1):
    """``S(l k_j)`` for ``l = 1..max_order`` and every row ``k_j``; shape ``(max_order, M)``."""
    positions, kvecs = _prep(positions, kvecs)
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if USE_NUMBA:
        return phase_sums_numba(positions, kvecs, max_order)
    return phase_sums_numpy(positions, kvecs, max_order)


def distinct_tuple_sum(phasors, m):
    phasors = np.ascontiguousarray(phasors, dtype=np.complex128)
    if USE_NUMBA:
        return distinct_tuple_sum_numba(phasors, m)
    return distinct_tuple_sum_numpy(phasors, m)


def correlation_sum(phasors, m, p_ee, coh):
    phasors = np.ascontiguousarray(phasors, dtype=np.complex128)
    if USE_NUMBA:
        return correlation_sum_numba(phasors, m, p_ee, coh)
    return correlation_sum_numpy(phasors, m, p_ee, coh)
