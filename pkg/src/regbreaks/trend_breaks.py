"""Structural breaks in a piecewise-linear trend.

``SSR(i, j)`` is the minimal sum of squared residuals of a single line
fitted to ``y_i..y_j``. All admissible entries are filled in ``O(T^2)``
with recursive residuals: extending a segment by one point adds
``w_j^2 = (y_j - yhat_j)^2 / f_j`` to its SSR, where ``yhat_j`` is the
prediction of the fit on ``i..j-1`` and ``f_j`` its variance inflation.
The optimal partition into ``m`` segments is then found by dynamic
programming, and ``m`` is chosen by minimizing ``sqrt(SSR) + 2*m*lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import (
    InfeasibleError,
    InsufficientDataError,
    TrendSegment,
    as_series,
    build_model,
    segments_of,
)

# Relative width of the band inside which DP candidates count as tied.
TIE_RTOL = 1e-12


def segment_ssr(y, i: int, j: int) -> tuple[float, float, float]:
    """Closed-form line fit over ``t = i..j`` (1-based, inclusive).

    Returns ``(ssr, a, b)`` with fitted values ``a*t + b``.
    """
    values = as_series(y).require_complete()
    if j - i + 1 < 2:
        raise InsufficientDataError(f"segment {i}..{j} has fewer than 2 points")
    if i < 1 or j > values.size:
        raise IndexError(f"segment {i}..{j} outside 1..{values.size}")
    t = np.arange(i, j + 1, dtype=float)
    seg = values[i - 1 : j]
    tc = t - t.mean()
    yc = seg - seg.mean()
    a = float(tc @ yc / (tc @ tc))
    b = float(seg.mean() - a * t.mean())
    r = seg - (a * t + b)
    return float(r @ r), a, b


@numba.njit(cache=True, nogil=True)
def _fill_ssr(y, h_min, out):
    T = y.shape[0]
    for i in range(T - 1):
        # exact two-point fit, then one recursive residual per added point
        t0 = i + 1.0
        t1 = i + 2.0
        n = 2.0
        mt = 0.5 * (t0 + t1)
        my = 0.5 * (y[i] + y[i + 1])
        ctt = 0.5 * (t1 - t0) * (t1 - t0)
        cty = 0.5 * (t1 - t0) * (y[i + 1] - y[i])
        ssr = 0.0
        if h_min <= 2:
            out[i + 1, i + 2] = 0.0
        for j in range(i + 2, T):
            tj = j + 1.0
            yj = y[j]
            et = tj - mt
            w = yj - (my + cty / ctt * et)
            ssr += w * w / (1.0 + 1.0 / n + et * et / ctt)
            n += 1.0
            ey = yj - my
            mt += et / n
            my += ey / n
            ctt += et * (tj - mt)
            cty += et * (yj - my)
            if j - i + 1 >= h_min:
                out[i + 1, j + 1] = ssr


@dataclass(frozen=True)
class SsrTable:
    """``ssr[i, j]`` for 1-based ``i <= j``; ``inf`` where ``j - i + 1 < h_min``.

    Row 0 and column 0 are unused padding so indices match ``t``.
    """

    ssr: np.ndarray
    h_min: int
    values: np.ndarray

    @property
    def T(self) -> int:
        return self.values.size

    @property
    def scale(self) -> float:
        """Centred total sum of squares of the series; sets the tie tolerance."""
        c = self.values - self.values.mean()
        return float(c @ c)

    def __call__(self, i: int, j: int) -> float:
        return float(self.ssr[i, j])


def build_ssr_table(y, h_min: int = 2) -> SsrTable:
    """Fill every admissible ``SSR(i, j)`` in ``O(T^2)`` time."""
    values = np.ascontiguousarray(as_series(y).require_complete())
    if h_min < 2:
        raise ValueError("h_min must be >= 2 (two points determine a line)")
    T = values.size
    ssr = np.full((T + 1, T + 1), np.inf)
    _fill_ssr(values, h_min, ssr)
    ssr.setflags(write=False)
    values.setflags(write=False)
    return SsrTable(ssr, h_min, values)


@dataclass(frozen=True)
class BreakSolution:
    """Optimal ``m``-segment fit.

    ``boundaries`` is the partition ``0 = t_0 < ... < t_m = T``; the
    interior entries are the break points.
    """

    m: int
    boundaries: tuple[int, ...]
    ssr_total: float
    segments: tuple[TrendSegment, ...]
    objective: float
    lam: float

    @property
    def breaks(self) -> tuple[int, ...]:
        return self.boundaries[1:-1]

    def trend_values(self) -> np.ndarray:
        out = np.empty(self.boundaries[-1])
        for seg in self.segments:
            out[seg.start - 1 : seg.end] = seg(np.arange(seg.start, seg.end + 1))
        return out

    def to_model(self, y):
        return build_model(y, self.segments, (), lam=self.lam, objective=self.objective)


def break_objective(ssr_total: float, m: int, lam: float) -> float:
    return math.sqrt(max(ssr_total, 0.0)) + 2 * m * lam


def make_solution(y, boundaries, ssr_total: float, lam: float = 0.0) -> BreakSolution:
    """Fit each segment of a partition and package the result."""
    values = as_series(y).require_complete()
    segments = []
    for start, end in segments_of(boundaries):
        _, a, b = segment_ssr(values, start, end)
        segments.append(TrendSegment(start, end, a, b))
    m = len(segments)
    return BreakSolution(
        m=m,
        boundaries=tuple(int(x) for x in boundaries),
        ssr_total=float(ssr_total),
        segments=tuple(segments),
        objective=break_objective(ssr_total, m, lam),
        lam=float(lam),
    )


class _Dp:
    """Forward DP over ``SSR({tau; k})`` with backpointers, grown one ``k`` at a time."""

    def __init__(self, table: SsrTable):
        self.table = table
        self.tol = TIE_RTOL * table.scale
        self.cost = [None, table.ssr[1].copy()]
        self.back = [None, np.zeros(table.T + 1, dtype=int)]
        self.cost[1][0] = np.inf

    def extend(self) -> None:
        prev = self.cost[-1]
        # cand[j, tau] = SSR({j; k-1}) + SSR(j+1, tau), j = 0..T-1
        cand = prev[:-1, None] + self.table.ssr[1:, :]
        best = cand.min(axis=0)
        # smallest j within the tie band
        back = np.argmax(cand <= best + self.tol, axis=0)
        self.cost.append(best)
        self.back.append(back)

    def cost_of(self, m: int) -> float:
        while len(self.cost) <= m:
            self.extend()
        return float(self.cost[m][self.table.T])

    def boundaries(self, m: int) -> tuple[int, ...]:
        self.cost_of(m)
        bounds = [self.table.T]
        tau = self.table.T
        for k in range(m, 1, -1):
            tau = int(self.back[k][tau])
            bounds.append(tau)
        bounds.append(0)
        return tuple(reversed(bounds))


def _check_m(m: int, T: int, h_min: int) -> None:
    if not 1 <= m <= T // h_min:
        raise InfeasibleError(f"cannot split T={T} into m={m} segments of length >= {h_min}")


def dp_optimal_breaks(table: SsrTable, m: int, lam: float = 0.0) -> BreakSolution:
    """Globally optimal partition into exactly ``m`` segments.

    Ties within a relative band of ``1e-12`` of the series' centred sum of
    squares go to the smallest last-break index.
    """
    _check_m(m, table.T, table.h_min)
    dp = _Dp(table)
    return _solution(table, dp, m, lam)


def _solution(table: SsrTable, dp: _Dp, m: int, lam: float) -> BreakSolution:
    ssr_total = dp.cost_of(m)
    if not np.isfinite(ssr_total):
        raise InfeasibleError(f"no admissible partition into {m} segments")
    return make_solution(table.values, dp.boundaries(m), ssr_total, lam)


def default_m_max(T: int, h_min: int) -> int:
    return max(1, min(T // h_min, T // 2))


def select_num_breaks(
    y,
    lam: float,
    m_max: int | None = None,
    h_min: int = 2,
    table: SsrTable | None = None,
) -> BreakSolution:
    """Choose ``m`` minimizing ``sqrt(SSR({T; m})) + 2*m*lam``.

    Since the objective is at least ``2*m*lam``, the scan over ``m`` stops
    as soon as that bound reaches the best value found; the result equals
    the full scan over ``1..m_max``. Ties go to the smaller ``m``.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if table is None:
        table = build_ssr_table(y, h_min)
    T = table.T
    if m_max is None:
        m_max = default_m_max(T, h_min)
    if m_max < 1 or m_max > T // h_min or m_max > max(1, T // 2):
        raise InfeasibleError(f"m_max={m_max} not in 1..min(T/h_min, T/2) for T={T}, h_min={h_min}")
    dp = _Dp(table)
    best_m, best_obj = 1, break_objective(dp.cost_of(1), 1, lam)
    for m in range(2, m_max + 1):
        if 2 * m * lam >= best_obj:
            break
        obj = break_objective(dp.cost_of(m), m, lam)
        if obj < best_obj:
            best_m, best_obj = m, obj
    return _solution(table, dp, best_m, lam)


def ssr_path(table: SsrTable, m_max: int) -> np.ndarray:
    """``SSR({T; m})`` for ``m = 1..m_max`` (index 0 unused)."""
    dp = _Dp(table)
    out = np.full(m_max + 1, np.nan)
    for m in range(1, m_max + 1):
        out[m] = dp.cost_of(m)
    return out
