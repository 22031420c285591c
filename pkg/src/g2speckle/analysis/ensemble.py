"""Ensembles of disordered realizations and scaling tables.

Realization ``r`` of a run with master seed ``M`` is built from the seed
``stable_hash(M, r)``. Realizations are evaluated in index order and
reduced with numpy's pairwise summation over an index-ordered array, so a
table depends only on the master seed, never on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..correlations import DriveParams
from ..errors import InvalidArgumentError
from ..geometry import GeometryKind, generate_chain, generate_lattice, sample_ball
from .fitting import FitResult, composite_fit, pearson, power_law_fit
from .grid import AngularGrid, map_data
from .search import coarse_phase_sums, find_condition_directions, sphere_extrema

_MASK64 = (1 << 64) - 1

#: Condition directions count as found when ``residual <= CONDITION_RESIDUAL_TOL * N^2``.
CONDITION_RESIDUAL_TOL = 1e-8
#: Seed grid for the conditional structure statistics (speckle grains of a
#: 6 pi cloud are ~0.05 rad wide, the grid step is 0.035 rad).
CONDITION_SEED_GRID = (90, 180)
DEFAULT_DIAMETER = 6 * math.pi


def stable_hash(master_seed: int, r: int) -> int:
    """SplitMix64 finalizer of ``master_seed * 0x9E3779B97F4A7C15 + r + 1`` (mod 2^64)."""
    x = (int(master_seed) * 0x9E3779B97F4A7C15 + int(r) + 1) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class GeometryRecipe:
    """How to build one realization from a seed. Only ``ball`` uses the seed."""

    kind: str = "ball"
    n: int = 100
    diameter: float = DEFAULT_DIAMETER
    spacing: float = 1.0
    axis: tuple = (1.0, 0.0, 0.0)
    counts: tuple = ()

    def __post_init__(self):
        kind = GeometryKind(self.kind).value
        object.__setattr__(self, "kind", kind)
        if kind == "custom":
            raise InvalidArgumentError("a recipe cannot build custom geometries")
        if int(self.n) < 1:
            raise InvalidArgumentError("n must be >= 1")
        object.__setattr__(self, "n", int(self.n))

    def build(self, seed=None):
        if self.kind == "ball":
            if seed is None:
                raise InvalidArgumentError("ball recipes need a seed")
            return sample_ball(self.n, self.diameter, seed)
        if self.kind == "chain":
            return generate_chain(self.n, self.spacing, self.axis)
        counts = self.counts or ((self.n,) + (1,) * (2 if self.kind == "lattice3d" else 1))
        return generate_lattice(counts, [self.spacing] * len(counts))

    def with_n(self, n):
        d = asdict(self)
        d["n"] = int(n)
        return GeometryRecipe(**d)

    def to_dict(self):
        d = asdict(self)
        d["axis"] = list(d["axis"])
        d["counts"] = list(d["counts"])
        return d


@dataclass(frozen=True)
class ScalingRow:
    control: float
    mean: float
    stderr: float
    n_realizations: int

    @property
    def stderr_defined(self) -> bool:
        return self.n_realizations > 1


def summarize(control, values) -> ScalingRow:
    """Mean and standard error (sample std / sqrt(R)); stderr is NaN for R = 1."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 1:
        raise InvalidArgumentError("need at least one realization")
    mean = float(np.sum(v) / v.size)
    if v.size == 1:
        return ScalingRow(float(control), mean, math.nan, 1)
    var = float(np.sum((v - mean) ** 2) / (v.size - 1))
    return ScalingRow(float(control), mean, math.sqrt(var / v.size), int(v.size))


@dataclass
class ScalingTable:
    """Rows with strictly monotone control values (s or N)."""

    rows: list
    control_name: str = "control"
    statistic: str = ""

    def __post_init__(self):
        if not self.rows:
            raise InvalidArgumentError("a scaling table needs at least one row")
        c = np.array([r.control for r in self.rows], dtype=float)
        d = np.diff(c)
        if c.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise InvalidArgumentError("control values must be strictly monotone")
        for r in self.rows:
            if r.n_realizations < 1:
                raise InvalidArgumentError("realization count must be >= 1")

    @property
    def controls(self):
        return np.array([r.control for r in self.rows])

    @property
    def means(self):
        return np.array([r.mean for r in self.rows])

    @property
    def stderrs(self):
        return np.array([r.stderr for r in self.rows])

    def fit(self, window=None) -> FitResult:
        """Power-law fit restricted to controls inside ``window = (lo, hi)``."""
        x, y = self.controls, self.means
        if window is not None:
            lo, hi = window
            keep = (x >= lo) & (x <= hi)
            x, y = x[keep], y[keep]
        return power_law_fit(x, y)


def _check_realizations(n_realizations):
    if int(n_realizations) < 1:
        raise InvalidArgumentError("n_realizations must be >= 1")
    return int(n_realizations)


def realization_values(recipe: GeometryRecipe, statistic, n_realizations, master_seed):
    """``statistic(config)`` for each realization, stacked along axis 0."""
    R = _check_realizations(n_realizations)
    out = []
    for r in range(R):
        cfg = recipe.build(stable_hash(master_seed, r))
        out.append(np.asarray(statistic(cfg), dtype=float))
    return np.stack(out, axis=0)


def ensemble_average(recipe: GeometryRecipe, drive: DriveParams, statistic, n_realizations, master_seed, control=None):
    """Mean and standard error of ``statistic(config, drive)`` over realizations."""
    vals = realization_values(recipe, lambda cfg: statistic(cfg, drive), n_realizations, master_seed)
    return summarize(drive.s if control is None else control, vals)


# {{{ statistics


def extrema_over_s(config, s_values, k_laser=(0.0, 0.0, 1.0), which=("max", "min"), **search_kw):
    """Per-``s`` max/min of g2 over the sphere, shape ``(len(which), len(s_values))``."""
    ext = sphere_extrema(config, s_values, k_laser, 2, tuple(which), **search_kw)
    return np.array([[e.value for e in ext[w]] for w in which])


_REDUCERS = {"mean": np.mean, "median": np.median, "min": np.min}


def conditional_structure_statistics(
    config,
    k_laser=(0.0, 0.0, 1.0),
    n_seeds=10,
    grid=None,
    reduce="median",
    residual_tol=CONDITION_RESIDUAL_TOL,
    **search_kw,
) -> dict:
    """Structure-factor expressions at numerically found condition directions.

    ``S2k_at_dest``: mean of ``|S(2k)|^2`` over directions with ``S(k) = 0``.
    ``antibunch_expr``: ``(1 + |S|^2)/|S|^4`` over directions with
    ``S(k)^2 = S(2k)``, reduced with ``reduce`` (``median`` by default). There
    ``|S|^2 = |S(2k)|``, and ``1/|S(2k)|^2`` has no finite mean for a Gaussian
    ``S(2k)``, so the plain mean is dominated by rare near-zero draws.
    Entries are NaN when no direction converged below ``residual_tol * N^2``.
    """
    if reduce not in _REDUCERS:
        raise InvalidArgumentError(f"reduce must be one of {sorted(_REDUCERS)}")
    grid = grid or AngularGrid(*CONDITION_SEED_GRID)
    n = config.n if hasattr(config, "n") else np.asarray(config).reshape(-1, 3).shape[0]
    tol = residual_tol * n * n
    coarse = coarse_phase_sums(config, grid, k_laser, 2)
    kw = dict(n_seeds=n_seeds, k_laser=k_laser, grid=grid, coarse=coarse, **search_kw)
    dest = [d for d in find_condition_directions(config, kind="destructive", **kw) if d.residual <= tol]
    anti = [
        d for d in find_condition_directions(config, m=2, kind="generalized_antibunch", **kw)
        if d.residual <= tol
    ]
    s2k = np.array([abs(d.S2) ** 2 for d in dest])
    a2 = np.array([abs(d.S) ** 2 for d in anti])
    expr = (1.0 + a2) / a2**2
    return {
        "S2k_at_dest": float(np.mean(s2k)) if s2k.size else math.nan,
        "antibunch_expr": float(_REDUCERS[reduce](expr)) if expr.size else math.nan,
        "n_dest": len(dest),
        "n_antibunch": len(anti),
    }


def map_pearson(config, drive: DriveParams, grid=None) -> float:
    """Pearson r of ``log G1`` against ``1 - exp(-g2)`` over all grid pixels (unweighted)."""
    grid = grid or AngularGrid(180, 360)
    md = map_data(config, drive, grid)
    return pearson(np.log(md.g1_physical), md.one_minus_exp_neg_g2)


# }}}


# {{{ sweeps

EXTREMA_STATISTICS = ("max_g2", "min_g2")
CONDITION_STATISTICS = ("S2k_at_dest", "antibunch_expr")
STATISTICS = EXTREMA_STATISTICS + CONDITION_STATISTICS


def _finite_mean(control, vals, name):
    vals = np.asarray(vals, float)
    ok = np.isfinite(vals)
    if not np.any(ok):
        raise InvalidArgumentError(f"no realization produced a value for {name} at {control}")
    return summarize(control, vals[ok])


def s_sweep(recipe, s_values, n_realizations, master_seed, statistics=EXTREMA_STATISTICS, k_laser=(0.0, 0.0, 1.0), **search_kw):
    """Tables of per-realization sphere max/min of g2 against ``s``.

    One sphere search per realization covers every ``s`` (the structure
    factors do not depend on ``s``).
    """
    s_values = [float(s) for s in s_values]
    if not s_values:
        raise InvalidArgumentError("empty s list")
    for name in statistics:
        if name not in EXTREMA_STATISTICS:
            raise InvalidArgumentError(f"{name!r} is not an s-sweep statistic")
    which = tuple(n.split("_")[0] for n in statistics)
    vals = realization_values(
        recipe, lambda cfg: extrema_over_s(cfg, s_values, k_laser, which, **search_kw), n_realizations, master_seed
    )
    out = {}
    for w, name in enumerate(statistics):
        rows = [summarize(s, vals[:, w, i]) for i, s in enumerate(s_values)]
        out[name] = ScalingTable(rows, "s", name)
    return out


def n_sweep(recipe, n_values, n_realizations, master_seed, statistics=CONDITION_STATISTICS, k_laser=(0.0, 0.0, 1.0), **stat_kw):
    """Tables of conditional structure statistics against ``N``.

    Each ``N`` draws its realizations under the master seed
    ``stable_hash(master_seed, N)`` so adding or removing an ``N`` leaves
    the other rows unchanged.
    """
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise InvalidArgumentError("empty N list")
    for name in statistics:
        if name not in CONDITION_STATISTICS:
            raise InvalidArgumentError(f"{name!r} is not an N-sweep statistic")
    cols = {name: [] for name in statistics}
    for n in n_values:
        vals = realization_values(
            recipe.with_n(n),
            lambda cfg: [conditional_structure_statistics(cfg, k_laser, **stat_kw)[s] for s in statistics],
            n_realizations,
            stable_hash(master_seed, n),
        )
        for i, name in enumerate(statistics):
            cols[name].append(_finite_mean(n, vals[:, i], name))
    return {name: ScalingTable(rows, "N", name) for name, rows in cols.items()}


def antibunch_scaling_statistic(recipe, n_values, n_realizations, master_seed, **stat_kw):
    """Composite ``(1 + a N^b)/(a N^b)^2`` fit of the antibunching expression against ``N``.

    Returns ``(FitResult, ScalingTable)``.
    """
    if len(n_values) < 3:
        raise InvalidArgumentError("need at least 3 N values")
    table = n_sweep(recipe, n_values, n_realizations, master_seed, ("antibunch_expr",), **stat_kw)["antibunch_expr"]
    return composite_fit(table.controls, table.means), table


def fit_table(table: ScalingTable, window=None) -> FitResult:
    """The automatic fit for a sweep table: composite model for the antibunching
    expression, plain power law otherwise."""
    if table.statistic == "antibunch_expr":
        x, y = table.controls, table.means
        if window is not None:
            keep = (x >= window[0]) & (x <= window[1])
            x, y = x[keep], y[keep]
        return composite_fit(x, y)
    return table.fit(window)


# }}}
