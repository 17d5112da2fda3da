"""Scaling fits shared by every dimension-type estimate.

A profile value(eps) is summarised by the extremes of value / log(1/eps) over
the two smallest scales and by the least-squares slope of value against
log(1/eps) over the small-eps end of the sweep.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData


@dataclass(frozen=True)
class DimensionEstimate:
    upper: float
    lower: float
    slope: float
    residual: float
    n_fit: int

    def as_dict(self):
        return {"upper": self.upper, "lower": self.lower, "slope": self.slope,
                "residual": self.residual}


def fit_indices(eps) -> np.ndarray:
    """Indices of the smallest ceil(len/2) scales, widened to three when available."""
    eps = np.asarray(eps, dtype=float)
    k = max(math.ceil(len(eps) / 2), min(3, len(eps)))
    return np.argsort(eps)[:k]


def linear_fit(x, y):
    """Least-squares slope, intercept and RMS residual."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise InsufficientData("a slope needs at least two points")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2)))


def dimension_estimate(eps, values, min_points: int = 3) -> DimensionEstimate:
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(eps) < min_points:
        raise InsufficientData(f"need at least {min_points} scales, got {len(eps)}")
    if np.any(eps <= 0) or np.any(eps >= 1):
        raise ValueError("scales must lie in (0, 1)")
    order = np.argsort(eps)
    smallest = order[:2]
    ratios = values[smallest] / np.log(1.0 / eps[smallest])
    idx = fit_indices(eps)
    slope, _, resid = linear_fit(np.log(1.0 / eps[idx]), values[idx])
    return DimensionEstimate(float(np.max(ratios)), float(np.min(ratios)), slope, resid, len(idx))


def running_slopes(eps, values) -> list:
    """Slope of value against log(1/eps) using all scales down to each row (nan for the first)."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(-eps)
    out = [math.nan] * len(eps)
    for k in range(1, len(order)):
        sel = order[:k + 1]
        out[order[k]] = linear_fit(np.log(1.0 / eps[sel]), values[sel])[0]
    return out
