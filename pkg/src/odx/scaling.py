"""Power-law fits ``value ~ A * N**slope`` on log-log axes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ScalingRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ScalingFit:
    pairs: tuple
    slope: float
    intercept: float
    r2: float


def fit_power_law(Ns, values, min_points=5, min_decades=2.0):
    """Least-squares line through ``(log N, log value)``.

    Requires at least ``min_points`` samples spanning ``min_decades`` decades.
    """
    N = np.asarray(Ns, dtype=float)
    v = np.asarray(values, dtype=float)
    if N.size < min_points:
        raise ScalingRangeError(f"need >= {min_points} N values, got {N.size}")
    if np.log10(N.max() / N.min()) < min_decades - 1e-12:
        raise ScalingRangeError(f"N range must span >= {min_decades:g} decades")
    if np.any(v <= 0):
        raise ScalingRangeError("values must be positive for a log-log fit")
    x, y = np.log(N), np.log(v)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    sxy = np.sum((x - xm) * (y - ym))
    syy = np.sum((y - ym) ** 2)
    slope = sxy / sxx
    intercept = ym - slope * xm
    r2 = 1.0 if syy == 0 else min(1.0, max(0.0, sxy * sxy / (sxx * syy)))
    return ScalingFit(tuple(zip(N.tolist(), v.tolist())), float(slope), float(intercept), float(r2))
