"""Emitter configurations.

Positions are dimensionless: physical position times the optical
wavenumber, so a phase ``k . R`` is a plain dot product with a wave vector
of unit magnitude.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigParseError, InvalidArgumentError

#: Name of the bit generator used for every random draw in the package.
RNG_ALGORITHM = "numpy.random.Philox (Philox4x64-10) seeded via SeedSequence"

_UNIT_TOL = 1e-12


class GeometryKind(str, enum.Enum):
    CHAIN = "chain"
    LATTICE2D = "lattice2d"
    LATTICE3D = "lattice3d"
    BALL = "ball"
    CUSTOM = "custom"


def make_rng(seed):
    """Bit generator for a single realization."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class EmitterConfig:
    """Immutable set of emitter positions plus provenance metadata."""

    positions: np.ndarray
    kind: GeometryKind = GeometryKind.CUSTOM
    seed: int | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64, copy=True)
        if pos.ndim == 1 and pos.size == 3:
            pos = pos.reshape(1, 3)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidArgumentError(f"positions must have shape (N, 3), got {pos.shape}")
        if pos.shape[0] == 0:
            raise InvalidArgumentError("positions must be non-empty")
        if not np.all(np.isfinite(pos)):
            raise InvalidArgumentError("positions must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "kind", GeometryKind(self.kind))
        if self.seed is not None:
            object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "params", dict(self.params))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def __len__(self):
        return self.n

    def bounding_radius(self) -> float:
        """Largest distance from the centroid."""
        c = self.positions.mean(axis=0)
        return float(np.max(np.linalg.norm(self.positions - c, axis=1)))


def as_positions(config) -> np.ndarray:
    """Accept an :class:`EmitterConfig` or anything array-like of shape (N, 3)."""
    if isinstance(config, EmitterConfig):
        return config.positions
    pos = np.asarray(config, dtype=np.float64)
    return pos.reshape(-1, 3)


def _unit(v, name="axis"):
    v = np.asarray(v, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(v)) or abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise InvalidArgumentError(f"{name} must be a unit 3-vector, got {v.tolist()}")
    return v


def generate_chain(n: int, spacing: float, axis=(1.0, 0.0, 0.0)) -> EmitterConfig:
    """Chain with ``positions[mu-1] = mu * spacing * axis`` for ``mu = 1..n``.

    The 1-based index keeps the structure factor equal to the geometric sum
    ``sum_{mu=1}^{N} exp(i mu phi)`` with ``phi = spacing * axis . k``.
    """
    if int(n) < 1:
        raise InvalidArgumentError("n must be >= 1")
    if not spacing > 0:
        raise InvalidArgumentError("spacing must be > 0")
    axis = _unit(axis)
    mu = np.arange(1, int(n) + 1, dtype=np.float64)
    pos = (mu * spacing)[:, None] * axis[None, :]
    return EmitterConfig(
        pos,
        GeometryKind.CHAIN,
        None,
        {"n": int(n), "spacing": float(spacing), "axis": axis.tolist()},
    )


def generate_lattice(counts, spacing) -> EmitterConfig:
    """Full rectangular grid with axis-aligned spacings, row-major order.

    ``counts`` and ``spacing`` have length 2 (xy-plane) or 3. Node indices
    start at 1 on every axis, as for :func:`generate_chain`, so the
    structure factor is the product of per-axis chain sums.
    """
    counts = [int(c) for c in counts]
    spacing = [float(d) for d in np.broadcast_to(np.asarray(spacing, float), (len(counts),))]
    dims = len(counts)
    if dims not in (2, 3):
        raise InvalidArgumentError("lattice must be 2D or 3D")
    if any(c < 1 for c in counts):
        raise InvalidArgumentError("every lattice count must be >= 1")
    if any(not d > 0 for d in spacing):
        raise InvalidArgumentError("every lattice spacing must be > 0")
    axes = [np.arange(1, c + 1) * d for c, d in zip(counts, spacing)]
    grids = np.meshgrid(*axes, indexing="ij")
    pos = np.zeros((int(np.prod(counts)), 3))
    for a in range(dims):
        pos[:, a] = grids[a].ravel()
    kind = GeometryKind.LATTICE2D if dims == 2 else GeometryKind.LATTICE3D
    return EmitterConfig(pos, kind, None, {"counts": counts, "spacing": spacing})


def sample_ball(n: int, diameter: float, seed: int) -> EmitterConfig:
    """Uniform density inside a ball of the given *diameter* centred at the origin.

    Radius ``R u^(1/3)`` with ``u`` uniform, direction from a normalized
    Gaussian triple. Same ``(n, diameter, seed)`` gives bit-identical output.
    """
    if int(n) < 1:
        raise InvalidArgumentError("n must be >= 1")
    if not diameter > 0:
        raise InvalidArgumentError("diameter must be > 0")
    n = int(n)
    rng = make_rng(seed)
    g = rng.standard_normal((n, 3))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian triple has probability zero; keep the draw count fixed anyway
    norms[norms == 0.0] = 1.0
    u = rng.random(n)
    r = 0.5 * diameter * np.cbrt(u)
    pos = g / norms[:, None] * r[:, None]
    return EmitterConfig(pos, GeometryKind.BALL, int(seed), {"n": n, "diameter": float(diameter)})


# {{{ persistence


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_config(config: EmitterConfig) -> str:
    head = {
        "kind": config.kind.value,
        "seed": config.seed,
        "params": config.params,
    }
    rows = ",\n    ".join("[" + ", ".join(_fmt(v) for v in p) + "]" for p in config.positions)
    body = json.dumps(head, indent=2, sort_keys=True)[:-2]
    return body + ',\n  "positions": [\n    ' + rows + "\n  ]\n}\n"


def save_config(config: EmitterConfig, path) -> None:
    Path(path).write_text(dumps_config(config))


def loads_config(text: str) -> EmitterConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigParseError("top-level value must be an object")
    if "positions" not in doc:
        raise ConfigParseError('missing field "positions"')
    rows = doc["positions"]
    if not isinstance(rows, list) or not rows:
        raise ConfigParseError('field "positions" must be a non-empty list')
    for i, row in enumerate(rows):
        if (
            not isinstance(row, list)
            or len(row) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row)
            or not all(math.isfinite(v) for v in row)
        ):
            raise ConfigParseError(f'field "positions"[{i}] must be three finite numbers')
    kind = doc.get("kind", "custom")
    try:
        kind = GeometryKind(kind)
    except ValueError as exc:
        raise ConfigParseError(f'field "kind": unknown geometry kind {kind!r}') from exc
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigParseError('field "seed" must be a non-negative integer or null')
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigParseError('field "params" must be an object')
    return EmitterConfig(np.array(rows, dtype=np.float64), kind, seed, params)


def load_config(path) -> EmitterConfig:
    return loads_config(Path(path).read_text())


# }}}
