"""Trend breaks in a seasonal series by alternating decomposition.

Starting from a zero trend, each sweep

1. runs the period search on ``y - trend`` to get the seasonal part, then
2. runs the break search on ``y - seasonal`` to update the trend,

until the break set repeats and the trend stops moving. The score of a
sweep is ``||y - trend - seasonal||_2 + lam * (2*m + p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    DecompositionModel,
    SeasonalBlock,
    TrendSegment,
    as_series,
    build_model,
    segments_of,
    validate_partition,
)
from .regdecomp import fit_period, min_norm_least_squares, penalized_objective, search_period
from .trend_breaks import select_num_breaks

# Slack on the sweep-to-sweep objective comparison.
MONOTONE_SLACK = 1e-9


def build_joint_design(
    trend_boundaries: Sequence[int],
    seasonal_blocks: Sequence[tuple[int, int, int]] = (),
) -> np.ndarray:
    """Concatenate the block-diagonal trend and seasonal designs.

    Parameters
    ----------
    trend_boundaries : sequence of int
        Partition ``0 = t_0 < ... < t_m = T``. Each segment contributes the
        columns ``(t, 1)`` on its rows and zeros elsewhere.
    seasonal_blocks : sequence of (start, end, d)
        Inclusive 1-based blocks tiling ``1..T``; each contributes ``d``
        phase-indicator columns cycling from the block start. ``d = 0``
        contributes nothing. An empty sequence means no seasonal part.

    Returns
    -------
    ndarray of shape (T, 2*m + sum(d))
    """
    bounds = tuple(int(x) for x in trend_boundaries)
    T = bounds[-1]
    validate_partition(bounds, T)
    blocks = [tuple(int(v) for v in blk) for blk in seasonal_blocks]
    expected = 1
    for start, end, d in blocks:
        if start != expected or end < start:
            raise ValueError(f"seasonal blocks do not tile 1..{T}")
        if not 0 <= d <= end - start + 1:
            raise ValueError(f"period {d} invalid for block {start}..{end}")
        expected = end + 1
    if blocks and expected != T + 1:
        raise ValueError(f"seasonal blocks cover 1..{expected - 1}, trend partition covers 1..{T}")

    m = len(bounds) - 1
    n_seasonal = sum(d for _, _, d in blocks)
    Q = np.zeros((T, 2 * m + n_seasonal))
    for k, (start, end) in enumerate(segments_of(bounds)):
        t = np.arange(start, end + 1)
        Q[start - 1 : end, 2 * k] = t
        Q[start - 1 : end, 2 * k + 1] = 1.0
    col = 2 * m
    for start, end, d in blocks:
        if d:
            t = np.arange(start, end + 1)
            Q[t - 1, col + (t - start) % d] = 1.0
        col += d
    return Q


def joint_objective(y, Q, delta, lam: float) -> float:
    """``||y - Q delta||_2 + lam * (2*m + sum(d))``, the column count of ``Q``."""
    return penalized_objective(y, Q, delta, lam)


@dataclass(frozen=True)
class JointConfig:
    lam: float
    max_iters: int = 50
    trend_tol: float = 1e-6
    p_max: int | None = None
    m_max: int | None = None
    h_min: int = 2
    fixed_period: int | None = None

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.max_iters < 1 or self.trend_tol <= 0 or self.h_min < 2:
            raise ValueError("max_iters >= 1, trend_tol > 0 and h_min >= 2 are required")
        for name in ("p_max", "m_max", "fixed_period"):
            v = getattr(self, name)
            if v is not None and v < (0 if name == "p_max" else 1):
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SweepRecord:
    iteration: int
    breaks: tuple[int, ...]
    period: int
    objective: float
    trend_change: float


@dataclass(frozen=True)
class JointModel:
    model: DecompositionModel
    iterations: int
    converged: bool
    objective: float
    history: tuple[SweepRecord, ...] = field(default=())

    @property
    def breaks(self) -> tuple[int, ...]:
        return self.model.breaks

    @property
    def m(self) -> int:
        return len(self.model.trend)

    @property
    def period(self) -> int:
        return self.model.period


def seasonal_step(residual: np.ndarray, config: JointConfig) -> tuple[int, np.ndarray]:
    """Step 1: period and zero-mean seasonal profile of ``residual``."""
    if config.fixed_period is not None:
        result = fit_period(residual, config.fixed_period, config.lam)
    else:
        result = search_period(residual, config.lam, config.p_max)
    return result.p_star, result.seasonal_profile()


def sweep(values: np.ndarray, trend: np.ndarray, config: JointConfig):
    """One Step 1 + Step 2 pass from the current trend estimate.

    Returns the swept :class:`DecompositionModel` and its break solution.
    """
    T = values.size
    period, profile = seasonal_step(values - trend, config)
    seasonal = profile[np.arange(T) % period] if period else np.zeros(T)
    solution = select_num_breaks(values - seasonal, config.lam, config.m_max, config.h_min)
    blocks = [SeasonalBlock(1, T, period, tuple(profile))] if period else []
    model = build_model(values, solution.segments, blocks, lam=config.lam)
    return model, solution


def iterative_detect(y, config: JointConfig) -> JointModel:
    """Alternate seasonal and trend-break estimation until the breaks settle.

    Convergence means the break set repeats and the fitted trend moves by at
    most ``trend_tol`` (sup norm) between sweeps. If a sweep raises the
    objective by more than ``1e-9`` the loop stops and the last improving
    sweep is returned unconverged; hitting ``max_iters`` also returns
    unconverged.
    """
    values = as_series(y).require_complete()
    trend = np.zeros(values.size)
    history = []
    best = None
    prev_breaks = None
    converged = False
    for it in range(1, config.max_iters + 1):
        model, solution = sweep(values, trend, config)
        new_trend = solution.trend_values()
        change = float(np.max(np.abs(new_trend - trend)))
        history.append(SweepRecord(it, solution.breaks, model.period, model.objective, change))
        if best is not None and model.objective > best[0].objective + MONOTONE_SLACK:
            break
        best = (model, it)
        if solution.breaks == prev_breaks and change <= config.trend_tol:
            converged = True
            break
        prev_breaks = solution.breaks
        trend = new_trend
    model, iterations = best
    return JointModel(model, iterations, converged, model.objective, tuple(history))


def refit_joint(y, boundaries: Sequence[int], period: int, lam: float) -> tuple[DecompositionModel, float]:
    """Joint least-squares fit for a fixed break set and period.

    Returns the model (trend intercepts absorb the seasonal mean) and its
    objective ``||y - Q delta||_2 + lam * (2*m + period)``.
    """
    values = as_series(y).require_complete()
    T = values.size
    blocks = [(1, T, period)] if period else []
    Q = build_joint_design(boundaries, blocks)
    delta = min_norm_least_squares(Q, values)
    objective = joint_objective(values, Q, delta, lam)
    return _model_from_delta(values, boundaries, period, delta, lam, objective), objective


def _model_from_delta(values, boundaries, period, delta, lam, objective) -> DecompositionModel:
    m = len(boundaries) - 1
    s = np.asarray(delta[2 * m :])
    shift = float(s.mean()) if s.size else 0.0
    trend = [
        TrendSegment(start, end, float(delta[2 * k]), float(delta[2 * k + 1]) + shift)
        for k, (start, end) in enumerate(segments_of(boundaries))
    ]
    blocks = [SeasonalBlock(1, values.size, period, tuple(s - shift))] if period else []
    return build_model(values, trend, blocks, lam=lam, objective=objective)
