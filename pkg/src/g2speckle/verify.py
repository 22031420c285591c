"""Self-check suite: closed forms against brute-force oracles and exact identities.

``mutate`` injects a known defect so the suite's sensitivity can be checked:
``partition-sign`` flips the sign of the last partition term.
"""

from __future__ import annotations

import json
import math
import sys
import time

import numpy as np

from .correlations import DriveParams, correlation_bruteforce, g2_closed_form
from .errors import InvalidArgumentError
from .geometry import make_rng
from .structure import (
    enumerate_partitions,
    generalized_structure_factor_bruteforce,
    stirling_falling_factorial_check,
    structure_factor_orders,
)

MUTATIONS = ("partition-sign",)
LEVELS = {
    "fast": {"n_max": 6, "m_max": 3, "oracle_cases": 30, "partition_cases": 30},
    "full": {"n_max": 8, "m_max": 4, "oracle_cases": 100, "partition_cases": 100},
}
ORACLE_RTOL = 1e-9
PARTITION_RTOL = 1e-10
# p(m) for m = 1..12
PARTITION_COUNTS = (1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77)


class CheckFailed(Exception):
    def __init__(self, case):
        super().__init__(json.dumps(case))
        self.case = case


def _random_case(rng, n_max):
    n = int(rng.integers(2, n_max + 1))
    pos = rng.uniform(-3.0, 3.0, size=(n, 3))
    v = rng.standard_normal(3)
    k_obs = v / np.linalg.norm(v)
    s = float(10 ** rng.uniform(-6, 1))
    return pos, k_obs, s


def _partition_value(svals, m, mutate):
    terms = enumerate_partitions(m)
    out = 0j
    for i, t in enumerate(terms):
        coef = t.coefficient
        if mutate == "partition-sign" and i == len(terms) - 1 and m > 1:
            coef = -coef
        prod = complex(coef)
        for l, c in enumerate(t.counts, start=1):
            prod *= svals[l - 1] ** c
        out += prod
    return out


def check_oracle(level, rng, mutate=None):
    p = LEVELS[level]
    for _ in range(p["oracle_cases"]):
        pos, k_obs, s = _random_case(rng, p["n_max"])
        drive = DriveParams(s)
        k = k_obs - np.array(drive.k_laser)
        a = g2_closed_form(pos, drive, k)
        b = correlation_bruteforce(pos, drive, k, 2)
        if not abs(a - b) <= ORACLE_RTOL * max(abs(b), 1e-30):
            raise CheckFailed(
                {"positions": pos.tolist(), "k": k.tolist(), "s": s, "closed_form": a, "bruteforce": b}
            )
    return p["oracle_cases"]


def check_partitions(level, rng, mutate=None):
    p = LEVELS[level]
    count = 0
    for m in range(2, p["m_max"] + 1):
        for _ in range(p["partition_cases"]):
            pos, k_obs, _ = _random_case(rng, p["n_max"])
            k = k_obs - np.array([0.0, 0.0, 1.0])
            svals = structure_factor_orders(pos, k, m)[:, 0]
            a = _partition_value(svals, m, mutate)
            b = generalized_structure_factor_bruteforce(pos, k, m)
            if not abs(a - b) <= PARTITION_RTOL * max(abs(b), 1.0):
                raise CheckFailed(
                    {"positions": pos.tolist(), "k": k.tolist(), "m": m, "partition": [a.real, a.imag], "bruteforce": [b.real, b.imag]}
                )
            count += 1
    return count


def check_stirling(level, rng, mutate=None):
    ns = [0, 1, 2, 3, 7, 10, 1000, 10**6] + [int(v) for v in rng.integers(0, 10**6, size=8)]
    count = 0
    for m in range(1, 7):
        for n in ns:
            ff, rhs = stirling_falling_factorial_check(m, n)
            if ff != rhs:
                raise CheckFailed({"m": m, "n": n, "falling_factorial": ff, "stirling_sum": rhs})
            count += 1
    for m in range(1, 13):
        if len(enumerate_partitions(m)) != PARTITION_COUNTS[m - 1]:
            raise CheckFailed({"m": m, "partitions": len(enumerate_partitions(m)), "expected": PARTITION_COUNTS[m - 1]})
        if sum(t.cardinality for t in enumerate_partitions(m)) != math.factorial(m):
            raise CheckFailed({"m": m, "class_sizes_sum": "!= m!"})
        count += 1
    return count


def check_limits(level, rng, mutate=None):
    count = 0
    # a single emitter never emits two photons at once
    for s in (1e-8, 1e-3, 1.0, 1e3):
        k = rng.standard_normal(3)
        g = g2_closed_form(np.zeros((1, 3)), DriveParams(s), k)
        if abs(g) > 1e-15:
            raise CheckFailed({"limit": "single emitter", "s": s, "k": k.tolist(), "g2": g})
        count += 1
    pos = rng.uniform(-5, 5, size=(20, 3))
    n = pos.shape[0]
    # chaotic limit away from the forward direction
    k = np.array([1.0, 0.0, 0.0]) - np.array([0.0, 0.0, 1.0])
    g = g2_closed_form(pos, DriveParams(1e8), k)
    if abs(g - (2 - 2 / n)) > 1e-5 * (2 - 2 / n):
        raise CheckFailed({"limit": "chaotic", "positions": pos.tolist(), "g2": g, "expected": 2 - 2 / n})
    count += 1
    # forward coherent limit
    g = g2_closed_form(pos, DriveParams(1e-10), np.zeros(3))
    if abs(g - (1 - 1 / n) ** 2) > 1e-6 * (1 - 1 / n) ** 2:
        raise CheckFailed({"limit": "forward", "positions": pos.tolist(), "g2": g, "expected": (1 - 1 / n) ** 2})
    count += 1
    return count


GROUPS = (
    ("oracle_g2", check_oracle),
    ("partition_vs_bruteforce", check_partitions),
    ("stirling_and_counts", check_stirling),
    ("limits", check_limits),
)


def run(level="fast", seed=0, mutate=None, stream=None) -> bool:
    """Run every group, print one line per group; stop at the first failure."""
    stream = stream or sys.stdout
    if level not in LEVELS:
        raise InvalidArgumentError(f"unknown level {level!r}")
    if mutate is not None and mutate not in MUTATIONS:
        raise InvalidArgumentError(f"unknown mutation {mutate!r}")
    rng = make_rng(seed)
    ok = True
    for name, fn in GROUPS:
        t0 = time.perf_counter()
        try:
            n = fn(level, rng, mutate)
        except CheckFailed as exc:
            print(f"FAIL {name}", file=stream)
            print(f"  failing case: {json.dumps(exc.case)}", file=stream)
            ok = False
            break
        print(f"PASS {name} ({n} cases, {time.perf_counter() - t0:.2f} s)", file=stream)
    return ok
