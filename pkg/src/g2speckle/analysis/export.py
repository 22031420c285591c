"""CSV/JSON writers with a '#' metadata preamble.

Floats are written with ``repr``-exact ``.17g`` so files round-trip and
compare byte-for-byte between runs.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np

from .. import __version__
from .._backend import BACKEND
from ..geometry import RNG_ALGORITHM
from .fitting import FitResult
from .grid import MapData

MAP_COLUMNS = ("theta", "phi", "S_re", "S_im", "S_abs2", "g1_norm", "g2", "one_minus_exp_neg_g2")
TABLE_COLUMNS = ("control", "mean", "stderr", "n_realizations")


def _f(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def metadata_lines(config: dict | None = None, master_seed=None, extra: dict | None = None) -> list[str]:
    lines = [
        f"# g2speckle {__version__}",
        "# config: " + json.dumps(_jsonable(config or {}), sort_keys=True),
        f"# master_seed: {master_seed if master_seed is not None else ''}",
        f"# rng: {RNG_ALGORITHM}",
        f"# backend: {BACKEND}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}")
    return lines


def map_csv(md: MapData, **meta) -> str:
    orders = sorted(md.gm)
    out = io.StringIO()
    for line in metadata_lines(**meta):
        out.write(line + "\n")
    out.write(",".join(MAP_COLUMNS + tuple(f"gm_{m}" for m in orders)) + "\n")
    cols = [
        md.theta,
        md.phi,
        md.S.real,
        md.S.imag,
        md.s_abs2,
        md.g1_normalized,
        md.g2,
        md.one_minus_exp_neg_g2,
    ] + [md.gm[m] for m in orders]
    for row in zip(*(np.asarray(c, float).tolist() for c in cols)):
        out.write(",".join(_f(v) for v in row) + "\n")
    return out.getvalue()


def table_csv(table, **meta) -> str:
    out = io.StringIO()
    extra = dict(meta.pop("extra", None) or {})
    extra.setdefault("statistic", table.statistic)
    extra.setdefault("control_name", table.control_name)
    for line in metadata_lines(extra=extra, **meta):
        out.write(line + "\n")
    out.write(",".join(TABLE_COLUMNS) + "\n")
    for r in table.rows:
        out.write(f"{_f(r.control)},{_f(r.mean)},{_f(r.stderr)},{int(r.n_realizations)}\n")
    return out.getvalue()


def fit_json(fit: FitResult, **extra) -> str:
    d = fit.to_json_dict()
    d.update(_jsonable(extra))
    return json.dumps(d, indent=2, sort_keys=True) + "\n"


def read_csv(text: str):
    """Parse one of our CSV files into ``(meta lines, header, float rows)``."""
    meta, rows, header = [], [], None
    for line in text.splitlines():
        if line.startswith("#"):
            meta.append(line)
        elif header is None:
            header = line.split(",")
        elif line.strip():
            rows.append([float(v) for v in line.split(",")])
    return meta, header, np.array(rows, dtype=float).reshape(len(rows), len(header or ()))


def data_rows(text: str) -> list[str]:
    """Non-metadata lines (header included) of a CSV file."""
    return [line for line in text.splitlines() if not line.startswith("#")]
