"""Seeded synthetic series and brute-force reference solvers.

Noise comes from numpy's ``Generator(PCG64)``; Gaussian variates use its
ziggurat transform of uniform draws. The same spec and seed always give
the same series.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import GuardError, TimeSeries, as_series, segments_of
from .joint import JointModel, SweepRecord, refit_joint
from .trend_breaks import TIE_RTOL, BreakSolution, make_solution, segment_ssr

RNG_ALGORITHM = "numpy.random.Generator(PCG64), standard_normal (ziggurat)"

BRUTE_FORCE_LIMIT = 10**7


@dataclass(frozen=True)
class SeasonalSpec:
    """``amplitude * sin(2*pi*(t + phase)/d)``, or explicit ``values`` cycling from t=1."""

    d: int
    amplitude: float = 1.0
    phase: float = 0.0
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class GeneratorSpec:
    T: int
    trend_pieces: tuple[tuple[int, int, float, float], ...]
    seasonal: SeasonalSpec | None = None
    sigma: float = 0.0
    seed: int = 0
    label: str = "y"

    def __post_init__(self):
        pieces = tuple(
            (int(s), int(e), float(a), float(b)) for s, e, a, b in self.trend_pieces
        )
        object.__setattr__(self, "trend_pieces", pieces)
        if isinstance(self.seasonal, dict):
            object.__setattr__(self, "seasonal", SeasonalSpec(**self.seasonal))
        expected = 1
        for start, end, _, _ in pieces:
            if start != expected or end < start:
                raise ValueError(f"trend pieces do not tile 1..{self.T} at t={expected}")
            expected = end + 1
        if expected != self.T + 1:
            raise ValueError(f"trend pieces cover 1..{expected - 1}, expected 1..{self.T}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.seasonal is not None and self.seasonal.values is not None:
            if len(self.seasonal.values) != self.seasonal.d:
                raise ValueError("explicit seasonal values must have length d")

    @classmethod
    def from_dict(cls, data: dict) -> GeneratorSpec:
        data = dict(data)
        if data.get("seasonal") is not None:
            seasonal = dict(data["seasonal"])
            if seasonal.get("values") is not None:
                seasonal["values"] = tuple(seasonal["values"])
            data["seasonal"] = SeasonalSpec(**seasonal)
        data["trend_pieces"] = tuple(tuple(p) for p in data["trend_pieces"])
        return cls(**data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["trend_pieces"] = [list(p) for p in self.trend_pieces]
        return out

    def trend(self) -> np.ndarray:
        out = np.empty(self.T)
        for start, end, a, b in self.trend_pieces:
            t = np.arange(start, end + 1, dtype=float)
            out[start - 1 : end] = a * t + b
        return out

    def seasonal_component(self) -> np.ndarray:
        if self.seasonal is None:
            return np.zeros(self.T)
        spec = self.seasonal
        t = np.arange(1, self.T + 1)
        if spec.values is not None:
            return np.asarray(spec.values, dtype=float)[(t - 1) % spec.d]
        return spec.amplitude * np.sin(2 * np.pi * (t + spec.phase) / spec.d)

    def deterministic(self) -> np.ndarray:
        return self.trend() + self.seasonal_component()

    def noise(self) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(self.seed))
        return self.sigma * rng.standard_normal(self.T)


def gen_series(spec: GeneratorSpec) -> TimeSeries:
    """Trend + seasonal + i.i.d. Gaussian(0, sigma^2) noise."""
    return TimeSeries(spec.deterministic() + spec.noise(), label=spec.label)


def fig2_spec(seed: int = 0, T: int = 100, sigma: float = 0.1) -> GeneratorSpec:
    """``0.03 t - 0.5 + sin(2 pi t / 10) + noise``."""
    return GeneratorSpec(
        T=T,
        trend_pieces=((1, T, 0.03, -0.5),),
        seasonal=SeasonalSpec(d=10),
        sigma=sigma,
        seed=seed,
        label="fig2",
    )


def two_regime_spec(seed: int = 0, sigma: float = 0.1, T: int = 30, break_at: int = 12) -> GeneratorSpec:
    """Season-free series rising until ``break_at`` then falling after a drop.

    A stand-in for an annual abundance record with a single regime change.
    """
    level = 0.5 * break_at + 1.0
    return GeneratorSpec(
        T=T,
        trend_pieces=((1, break_at, 0.5, 1.0), (break_at + 1, T, -0.3, level - 2.0 + 0.3 * break_at)),
        sigma=sigma,
        seed=seed,
        label="two_regime",
    )


def sst_like_spec(
    seed: int = 0,
    T: int = 336,
    break_at: int = 244,
    d: int = 12,
    amplitude: float = 1.5,
    rise: float = 0.003,
    fall: float = -0.04,
    sigma: float = 0.1,
) -> GeneratorSpec:
    """Monthly-like series: annual cycle, slow warming, then cooling after ``break_at``.

    The trend is continuous at the break; only the slope changes sign.
    """
    base = -0.4
    level = rise * break_at + base
    return GeneratorSpec(
        T=T,
        trend_pieces=((1, break_at, rise, base), (break_at + 1, T, fall, level - fall * break_at)),
        seasonal=SeasonalSpec(d=d, amplitude=amplitude),
        sigma=sigma,
        seed=seed,
        label="sst_like",
    )


def small_joint_spec(seed: int = 0, T: int = 36, d: int = 6, break_at: int = 18, sigma: float = 0.05) -> GeneratorSpec:
    """Short seasonal series with one slope break, sized for exhaustive search."""
    rise, fall = 0.08, -0.08
    level = rise * break_at
    return GeneratorSpec(
        T=T,
        trend_pieces=((1, break_at, rise, 0.0), (break_at + 1, T, fall, level - fall * break_at)),
        seasonal=SeasonalSpec(d=d),
        sigma=sigma,
        seed=seed,
        label="small_joint",
    )


def _partitions(T: int, m: int, h_min: int):
    """All ``(0, t_1, ..., t_{m-1}, T)`` with segment lengths >= h_min."""
    for inner in itertools.combinations(range(h_min, T - h_min + 1), m - 1):
        bounds = (0, *inner, T)
        if all(hi - lo >= h_min for lo, hi in zip(bounds, bounds[1:])):
            yield bounds


def count_partitions(T: int, m: int, h_min: int) -> int:
    """Number of admissible partitions (stars and bars on the slack)."""
    slack = T - m * h_min
    if slack < 0:
        return 0
    return math.comb(slack + m - 1, m - 1)


def brute_force_breaks(y, m: int, h_min: int = 2, limit: int = BRUTE_FORCE_LIMIT) -> BreakSolution:
    """Exhaustive search for the ``m``-segment partition with least total SSR.

    Every segment is fitted from scratch. Among partitions within the same
    tie band the DP uses, the one whose breaks compare smallest from the
    last break backwards wins, mirroring the DP's backtracking order.
    """
    values = as_series(y).require_complete()
    T = values.size
    n = count_partitions(T, m, h_min)
    if n == 0:
        raise ValueError(f"no partition of T={T} into {m} segments of length >= {h_min}")
    if n > limit:
        raise GuardError(f"{n} partitions exceed the brute-force limit of {limit}")
    cache: dict[tuple[int, int], float] = {}

    def ssr(i, j):
        if (i, j) not in cache:
            cache[(i, j)] = segment_ssr(values, i, j)[0]
        return cache[(i, j)]

    scored = []
    for bounds in _partitions(T, m, h_min):
        total = 0.0
        for start, end in segments_of(bounds):
            total += ssr(start, end)
        scored.append((total, bounds))
    c = values - values.mean()
    tol = TIE_RTOL * float(c @ c)
    best = min(total for total, _ in scored)
    tied = [bounds for total, bounds in scored if total <= best + tol]
    bounds = min(tied, key=lambda b: b[::-1])
    total = next(t for t, b in scored if b == bounds)
    return make_solution(values, bounds, total)


def brute_force_joint(
    y,
    lam: float,
    m_max: int = 2,
    p_max: int = 12,
    h_min: int = 2,
) -> JointModel:
    """Global minimizer of ``||y - Q delta|| + lam*(2m + p)`` by enumeration.

    Searches every break set with ``m <= m_max`` segments and every single
    seasonal period ``p <= p_max`` (``p = 0`` meaning none), solving the
    joint least-squares problem for each. Refuses instances with
    ``T > 40``, ``m_max > 2`` or ``p_max > 12``.
    """
    values = as_series(y).require_complete()
    T = values.size
    if T > 40 or m_max > 2 or p_max > 12:
        raise GuardError("brute_force_joint is limited to T <= 40, m <= 2, p <= 12")
    best = None
    for m in range(1, m_max + 1):
        for bounds in _partitions(T, m, h_min):
            for p in range(0, min(p_max, T) + 1):
                model, objective = refit_joint(values, bounds, p, lam)
                if best is None or objective < best[0]:
                    best = (objective, model, bounds, p)
    objective, model, bounds, p = best
    record = SweepRecord(1, tuple(bounds[1:-1]), p, objective, 0.0)
    return JointModel(model, 1, True, objective, (record,))
