"""Classical three-step moving-average seasonal-trend decomposition.

1. Estimate the trend with a centred moving average of size ``q``.
2. Average the detrended series per phase ``k = 1..q`` to get the seasonal
   profile.
3. Refit a least-squares polynomial trend to ``y - seasonal``.

This is the baseline; it only recovers the seasonal profile when ``q``
equals the true period.
"""

from __future__ import annotations

import numpy as np

from .core import (
    InsufficientDataError,
    SeasonalBlock,
    TrendSegment,
    as_series,
    build_model,
)


def ma_weights(q: int) -> np.ndarray:
    """Filter coefficients before division by ``q``.

    Odd ``q`` gives ``q`` ones; even ``q`` gives ``[0.5, 1, ..., 1, 0.5]`` of
    length ``q + 1``.
    """
    if q < 1:
        raise ValueError(f"filter size must be >= 1, got {q}")
    if q % 2:
        return np.ones(q)
    w = np.ones(q + 1)
    w[0] = w[-1] = 0.5
    return w


def moving_average(y, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Centred moving average, emitted only where the full window fits.

    Returns
    -------
    t : ndarray of int
        1-based indices ``floor(q/2)+1 .. T-floor(q/2)``.
    values : ndarray
        The smoothed values at those indices.
    """
    values = as_series(y).require_complete()
    w = ma_weights(q)
    T = values.size
    if q > T or w.size > T:
        raise InsufficientDataError(f"moving average of size {q} needs more than {T} points")
    half = q // 2
    smoothed = np.convolve(values, w[::-1], mode="valid") / q
    t = np.arange(half + 1, T - half + 1)
    return t, smoothed


def seasonal_averages(t, values, q: int, center: bool = True) -> np.ndarray:
    """Per-phase means ``s_1..s_q`` of the points ``(t, values)``.

    Phase of index ``t`` is ``((t - 1) mod q) + 1``. With ``center`` the
    profile is shifted to sum to zero.
    """
    t = np.asarray(t, dtype=int)
    values = np.asarray(values, dtype=float)
    if q < 1:
        raise ValueError(f"period must be >= 1, got {q}")
    if t.size == 0:
        raise InsufficientDataError("no points to average")
    phase = (t - 1) % q
    counts = np.bincount(phase, minlength=q)
    if np.any(counts == 0):
        missing = [int(k) + 1 for k in np.flatnonzero(counts == 0)]
        raise InsufficientDataError(f"no samples for seasonal phases {missing}")
    s = np.bincount(phase, weights=values, minlength=q) / counts
    if center:
        s = s - s.mean()
    return s


def refit_trend(y, degree: int = 1) -> np.ndarray:
    """Least-squares polynomial in ``t``; coefficients highest power first.

    With ``degree=1`` this is ``(a, b)`` of ``a*t + b``.
    """
    values = as_series(y).require_complete()
    if degree < 0:
        raise ValueError("degree must be >= 0")
    T = values.size
    if T < degree + 1:
        raise InsufficientDataError(f"degree-{degree} fit needs at least {degree + 1} points, got {T}")
    t = np.arange(1, T + 1, dtype=float)
    vander = np.vander(t, degree + 1)
    coef, *_ = np.linalg.lstsq(vander, values, rcond=None)
    return coef


def classical_decompose(y, q: int, degree: int = 1, literal: bool = False):
    """Run the three-step baseline and return a :class:`DecompositionModel`.

    ``literal=True`` averages raw ``y`` per phase, without detrending or
    centring, for comparison experiments.
    """
    series = as_series(y)
    values = series.require_complete()
    if degree > 1:
        raise ValueError("only degree 0 or 1 trends can be represented as linear segments")
    T = values.size
    if literal:
        s = seasonal_averages(np.arange(1, T + 1), values, q, center=False)
    else:
        t_ma, trend_ma = moving_average(series, q)
        s = seasonal_averages(t_ma, values[t_ma - 1] - trend_ma, q)
    block = SeasonalBlock(1, T, q, tuple(s))
    deseasonalized = values - block(np.arange(1, T + 1))
    coef = refit_trend(deseasonalized, degree)
    a, b = (coef[0], coef[1]) if degree == 1 else (0.0, coef[0])
    return build_model(series, [TrendSegment(1, T, float(a), float(b))], [block])
