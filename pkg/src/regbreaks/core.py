"""Domain types shared by every solver.

Time is a 1-based integer index ``t = 1..T``. A model is a set of linear
trend segments and seasonal blocks, each tiling ``1..T``, plus the stored
residuals ``y - trend - seasonal``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class RegbreaksError(ValueError):
    """Base class for input and solver errors raised by this package."""


class InsufficientDataError(RegbreaksError):
    pass


class InfeasibleError(RegbreaksError):
    pass


class PreconditionError(RegbreaksError):
    pass


class GuardError(RegbreaksError):
    """A brute-force search would exceed its combinatorial budget."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Real-valued observations ``Y_1..Y_T`` with an optional missing mask.

    ``mask[t-1]`` is True when observation ``t`` is missing. Missing slots
    hold NaN in ``values``.
    """

    values: np.ndarray
    mask: np.ndarray | None = None
    label: str | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size < 1:
            raise InsufficientDataError("time series must contain at least one value")
        mask = None
        if self.mask is not None:
            mask = np.array(self.mask, dtype=bool).ravel()
            if mask.shape != values.shape:
                raise ValueError(
                    f"mask length {mask.size} does not match series length {values.size}"
                )
            values[mask] = np.nan
            if not mask.any():
                mask = None
        observed = values if mask is None else values[~mask]
        if not np.all(np.isfinite(observed)):
            raise ValueError("non-missing values must be finite")
        values.setflags(write=False)
        if mask is not None:
            mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    def __len__(self) -> int:
        return self.values.size

    @property
    def T(self) -> int:
        return self.values.size

    @property
    def has_missing(self) -> bool:
        return self.mask is not None

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.T + 1, dtype=float)

    def require_complete(self) -> np.ndarray:
        """Return the values, raising if any are missing."""
        if self.has_missing:
            name = f" {self.label!r}" if self.label else ""
            raise PreconditionError(
                f"series{name} has {int(self.mask.sum())} missing values; impute first"
            )
        return self.values


def as_series(y) -> TimeSeries:
    return y if isinstance(y, TimeSeries) else TimeSeries(y)


def validate_partition(boundaries: Sequence[int], T: int, h_min: int = 1) -> tuple[int, ...]:
    """Check ``0 = t_0 < t_1 < ... < t_m = T`` with segments of length >= h_min.

    Returns the boundaries as a tuple of ints.
    """
    b = tuple(int(x) for x in boundaries)
    if len(b) < 2 or b[0] != 0 or b[-1] != T:
        raise ValueError(f"partition must start at 0 and end at T={T}, got {b}")
    for lo, hi in zip(b, b[1:]):
        if hi - lo < max(h_min, 1):
            raise ValueError(
                f"segment ({lo}, {hi}] shorter than minimum length {max(h_min, 1)}"
            )
    return b


def segments_of(boundaries: Sequence[int]) -> list[tuple[int, int]]:
    """Inclusive 1-based (start, end) pairs for each segment of a partition."""
    return [(lo + 1, hi) for lo, hi in zip(boundaries, boundaries[1:])]


@dataclass(frozen=True)
class TrendSegment:
    start: int
    end: int
    a: float
    b: float

    def __call__(self, t):
        return self.a * np.asarray(t, dtype=float) + self.b


@dataclass(frozen=True)
class SeasonalBlock:
    """One seasonal regime; phase restarts at the block's first sample."""

    start: int
    end: int
    d: int
    s: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        if self.d < 1 or len(self.s) != self.d:
            raise ValueError(f"seasonal block needs d >= 1 values, got d={self.d}, {len(self.s)} values")
        if self.d > self.end - self.start + 1:
            raise ValueError("seasonal period exceeds block length")

    def phase(self, t):
        return (np.asarray(t, dtype=int) - self.start) % self.d

    def __call__(self, t):
        return np.asarray(self.s)[self.phase(t)]


def _check_tiling(pieces, T: int, what: str) -> None:
    expected = 1
    for piece in pieces:
        if piece.start != expected or piece.end < piece.start:
            raise ValueError(f"{what} do not tile 1..{T}: gap or overlap at t={expected}")
        expected = piece.end + 1
    if expected != T + 1:
        raise ValueError(f"{what} do not tile 1..{T}: coverage ends at t={expected - 1}")


@dataclass(frozen=True)
class DecompositionModel:
    """A fitted trend + seasonal model with its residuals.

    ``seasonal`` may be empty, meaning a zero seasonal component.
    """

    trend: tuple[TrendSegment, ...]
    seasonal: tuple[SeasonalBlock, ...]
    residuals: np.ndarray
    objective: float
    lam: float
    param_count: int = field(default=-1)

    def __post_init__(self):
        object.__setattr__(self, "trend", tuple(self.trend))
        object.__setattr__(self, "seasonal", tuple(self.seasonal))
        object.__setattr__(self, "residuals", _frozen(self.residuals))
        T = self.T
        _check_tiling(self.trend, T, "trend segments")
        if self.seasonal:
            _check_tiling(self.seasonal, T, "seasonal blocks")
        count = 2 * len(self.trend) + sum(blk.d for blk in self.seasonal)
        if self.param_count < 0:
            object.__setattr__(self, "param_count", count)
        elif self.param_count != count:
            raise ValueError(f"param_count {self.param_count} != {count}")

    @property
    def T(self) -> int:
        return self.residuals.size

    @property
    def breaks(self) -> tuple[int, ...]:
        """Interior trend break points t*_1..t*_{m-1} (last index of each segment)."""
        return tuple(seg.end for seg in self.trend[:-1])

    @property
    def boundaries(self) -> tuple[int, ...]:
        return (0,) + tuple(seg.end for seg in self.trend)

    @property
    def period(self) -> int:
        return self.seasonal[0].d if len(self.seasonal) == 1 else 0

    def trend_values(self) -> np.ndarray:
        out = np.empty(self.T)
        for seg in self.trend:
            t = np.arange(seg.start, seg.end + 1)
            out[seg.start - 1 : seg.end] = seg(t)
        return out

    def seasonal_values(self) -> np.ndarray:
        out = np.zeros(self.T)
        for blk in self.seasonal:
            t = np.arange(blk.start, blk.end + 1)
            out[blk.start - 1 : blk.end] = blk(t)
        return out

    def fitted(self) -> np.ndarray:
        return self.trend_values() + self.seasonal_values()


def build_model(
    y,
    trend: Sequence[TrendSegment],
    seasonal: Sequence[SeasonalBlock] = (),
    lam: float = 0.0,
    objective: float | None = None,
) -> DecompositionModel:
    """Assemble a model, computing residuals and (by default) the objective.

    The default objective is ``||residuals||_2 + lam * param_count``.
    """
    values = as_series(y).require_complete()
    proto = DecompositionModel(tuple(trend), tuple(seasonal), np.zeros(values.size), 0.0, lam)
    residuals = values - proto.trend_values() - proto.seasonal_values()
    if objective is None:
        objective = float(np.linalg.norm(residuals)) + lam * proto.param_count
    return DecompositionModel(proto.trend, proto.seasonal, residuals, float(objective), float(lam))


def evaluate_model(model: DecompositionModel, t: int) -> float:
    """Fitted value trend(t) + seasonal(t) at a single 1-based index."""
    if not 1 <= t <= model.T:
        raise IndexError(f"t={t} outside 1..{model.T}")
    value = 0.0
    for seg in model.trend:
        if seg.start <= t <= seg.end:
            value += seg.a * t + seg.b
            break
    for blk in model.seasonal:
        if blk.start <= t <= blk.end:
            value += blk.s[(t - blk.start) % blk.d]
            break
    return value


def residual_norm(y, model: DecompositionModel) -> float:
    """Euclidean norm (not squared) of ``y - fitted`` over t = 1..T."""
    values = as_series(y).require_complete()
    if values.size != model.T:
        raise ValueError(f"series length {values.size} != model length {model.T}")
    return float(np.linalg.norm(values - model.fitted()))
