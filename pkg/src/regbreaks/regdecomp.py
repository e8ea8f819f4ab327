"""Seasonal-trend decomposition by penalized least squares.

For each candidate period ``p`` the series is regressed on
``[t, 1, e_k(t)]`` where ``e_k`` is the phase indicator of ``t``. The
unpenalized fit is the minimum-norm least-squares solution; the period is
then chosen by minimizing ``||y - Q delta||_2 + lam * (p + 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SeasonalBlock, TrendSegment, as_series, build_model

RTOL = 1e-10


def build_design_matrix(T: int, p: int) -> np.ndarray:
    """``T x (p + 2)`` matrix with rows ``[t, 1, e_k]``, ``k = ((t-1) mod p) + 1``.

    ``p = 0`` gives the two trend columns only.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0 <= p <= T:
        raise IndexError(f"period p={p} outside 0..{T}")
    Q = np.zeros((T, p + 2))
    t = np.arange(1, T + 1)
    Q[:, 0] = t
    Q[:, 1] = 1.0
    if p:
        Q[t - 1, 2 + (t - 1) % p] = 1.0
    return Q


def min_norm_least_squares(Q, y, rtol: float = RTOL) -> np.ndarray:
    """Minimum-norm minimizer of ``||y - Q delta||_2`` via truncated SVD.

    Singular values below ``rtol * sigma_max`` are treated as zero, so the
    structural collinearity of the intercept and seasonal columns is
    resolved to the smallest-norm representative.
    """
    Q = np.asarray(Q, dtype=float)
    values = as_series(y).require_complete()
    if Q.ndim != 2 or Q.shape[0] != values.size:
        raise ValueError(f"design {Q.shape} does not match series length {values.size}")
    if Q.shape[1] == 0:
        return np.zeros(0)
    U, sv, Vt = np.linalg.svd(Q, full_matrices=False)
    keep = sv > rtol * sv[0]
    coef = (U[:, keep].T @ values) / sv[keep]
    return Vt[keep].T @ coef


def penalized_objective(y, Q, delta, lam: float) -> float:
    """``||y - Q delta||_2 + lam * (number of columns of Q)``."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    values = as_series(y).require_complete()
    Q = np.asarray(Q, dtype=float)
    return float(np.linalg.norm(values - Q @ np.asarray(delta))) + lam * Q.shape[1]


@dataclass(frozen=True)
class PeriodSearchResult:
    """Outcome of the period search.

    ``objective_curve[p]`` and ``residual_norms[p]`` are indexed by the
    candidate period ``p = 0..p_max``. ``delta`` is the raw minimum-norm
    vector ``(a, b, s_1..s_p)`` at ``p_star``.
    """

    p_star: int
    delta: np.ndarray
    objective_curve: np.ndarray
    residual_norms: np.ndarray
    lam: float

    @property
    def objective(self) -> float:
        return float(self.objective_curve[self.p_star])

    def seasonal_profile(self) -> np.ndarray:
        """Seasonal values ``s_1..s_p`` shifted to zero mean (gauge-fixed)."""
        s = self.delta[2:]
        return s - s.mean() if s.size else s

    def seasonal_values(self, T: int) -> np.ndarray:
        if self.p_star == 0:
            return np.zeros(T)
        return self.seasonal_profile()[np.arange(T) % self.p_star]


def fit_period(y, p: int, lam: float = 0.0) -> PeriodSearchResult:
    """Solve the unpenalized problem for one known period.

    The returned curves are indexed by period like :func:`search_period`,
    with NaN for candidates that were not evaluated.
    """
    values = as_series(y).require_complete()
    Q = build_design_matrix(values.size, p)
    delta = min_norm_least_squares(Q, values)
    norms = np.full(p + 1, np.nan)
    norms[p] = np.linalg.norm(values - Q @ delta)
    curve = norms + lam * (np.arange(p + 1) + 2)
    return PeriodSearchResult(p, delta, curve, norms, float(lam))


def search_period(y, lam: float, p_max: int | None = None) -> PeriodSearchResult:
    """Pick the period minimizing the penalized objective over ``p = 0..p_max``.

    Parameters
    ----------
    y : TimeSeries or array-like
        Complete series.
    lam : float
        Penalty per model parameter (``lam >= 0``).
    p_max : int, optional
        Largest candidate period; defaults to ``T // 2``.

    Returns
    -------
    PeriodSearchResult
        Ties in the objective go to the smaller period.
    """
    values = as_series(y).require_complete()
    T = values.size
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if p_max is None:
        p_max = T // 2
    if not 0 <= p_max <= T:
        raise ValueError(f"p_max={p_max} outside 0..{T}")
    norms = np.empty(p_max + 1)
    deltas = []
    for p in range(p_max + 1):
        Q = build_design_matrix(T, p)
        delta = min_norm_least_squares(Q, values)
        norms[p] = np.linalg.norm(values - Q @ delta)
        deltas.append(delta)
    curve = norms + lam * (np.arange(p_max + 1) + 2)
    p_star = int(np.argmin(curve))
    return PeriodSearchResult(p_star, deltas[p_star], curve, norms, float(lam))


def result_to_model(y, result: PeriodSearchResult):
    """Single-segment :class:`DecompositionModel` with a zero-mean seasonal profile."""
    series = as_series(y)
    T = series.T
    a, b = result.delta[:2]
    blocks = []
    if result.p_star:
        s = result.delta[2:]
        b = b + s.mean()
        blocks.append(SeasonalBlock(1, T, result.p_star, tuple(result.seasonal_profile())))
    return build_model(
        series,
        [TrendSegment(1, T, float(a), float(b))],
        blocks,
        lam=result.lam,
        objective=result.objective,
    )


def regularized_decompose(y, lam: float, p_max: int | None = None):
    """Period search followed by conversion to a :class:`DecompositionModel`."""
    result = search_period(y, lam, p_max)
    return result, result_to_model(y, result)
