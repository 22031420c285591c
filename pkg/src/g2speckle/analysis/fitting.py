"""Pearson correlation and power-law fits."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from ..errors import DegenerateInputError, InvalidArgumentError


@dataclass(frozen=True)
class FitResult:
    a: float
    b: float
    residual: float
    converged: bool = True
    message: str = ""

    def to_json_dict(self) -> dict:
        d = asdict(self)
        return {
            "a": d["a"],
            "b": d["b"],
            "rms_log_residual": d["residual"],
            "converged": d["converged"],
            "message": d["message"],
        }


def pearson(x, y) -> float:
    """Pearson r with population normalization (the 1/n factors cancel)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape or x.size < 2:
        raise InvalidArgumentError("pearson needs two samples of equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.mean(dx * dx))
    sy = np.sqrt(np.mean(dy * dy))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("pearson is undefined for a zero-variance sample")
    return float(np.mean(dx * dy) / (sx * sy))


def _positive(xs, ys):
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.shape != ys.shape or xs.size < 2:
        raise InvalidArgumentError("fit needs >= 2 (x, y) pairs of equal length")
    if np.any(~np.isfinite(xs)) or np.any(~np.isfinite(ys)) or np.any(xs <= 0) or np.any(ys <= 0):
        raise InvalidArgumentError("power-law fit needs finite, strictly positive data")
    return xs, ys


def power_law_fit(xs, ys) -> FitResult:
    """Least squares of ``log y = log a + b log x``."""
    xs, ys = _positive(xs, ys)
    lx, ly = np.log(xs), np.log(ys)
    A = np.column_stack([np.ones_like(lx), lx])
    (c0, b), *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = ly - (c0 + b * lx)
    return FitResult(float(np.exp(c0)), float(b), float(np.sqrt(np.mean(res**2))))


def composite_model(x, a, b):
    """``(1 + a x^b) / (a x^b)^2``: the expected scaling of ``(1+|S|^2)/|S|^4``
    when ``|S|^2`` grows like ``a x^b``."""
    u = a * np.asarray(x, dtype=float) ** b
    return (1.0 + u) / u**2


def composite_fit(xs, ys, p0=(1.0, 0.5)) -> FitResult:
    """Fit :func:`composite_model` over ``(a, b)``, least squares in log space.

    Log space weights each control value evenly across decades; ``a`` is
    kept positive by fitting ``log a``.
    """
    xs, ys = _positive(xs, ys)
    if xs.size < 3:
        raise InvalidArgumentError("composite fit needs >= 3 points")
    lx, ly = np.log(xs), np.log(ys)

    def resid(p):
        la, b = p
        lu = la + b * lx
        return np.log1p(np.exp(lu)) - 2.0 * lu - ly

    sol = optimize.least_squares(resid, x0=[np.log(p0[0]), p0[1]], method="lm", xtol=1e-14, ftol=1e-14)
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    return FitResult(
        float(np.exp(sol.x[0])), float(sol.x[1]), rms, bool(sol.success), str(sol.message)
    )
