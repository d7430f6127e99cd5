"""Two-regime power-law fits of persistence decay curves.

Persistence curves decay as value = beta * tau ** alpha in two regimes: a
fast initial decay and a slower plateau. Both regimes are fitted by ordinary
least squares in log-log space; the transition lag tau_plat is the candidate
minimizing the unweighted average of the two segments' mean squared errors,
with ties resolved toward the smallest transition lag.

Lag 0 and lags with zero persistence have no log image; they are dropped
from the fit domain and counted in ``dropped_lags``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DecayFit:
    """Two-regime power-law parameters and per-regime log-space MSE."""

    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    tau_plat: int
    mse1: float
    mse2: float
    n1: int
    n2: int
    dropped_lags: int


def power_law_fit(lags, values) -> tuple[float, float, float]:
    """OLS fit of log(value) on log(lag): returns (alpha, beta, mse).

    Requires at least two points with distinct positive lags and strictly
    positive values; mse is the mean squared residual in log space.
    """
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    if lags.shape != values.shape or lags.ndim != 1:
        raise ValueError("lags and values must be 1-d arrays of equal length")
    if lags.size < 2:
        raise ValueError("need at least 2 points for a power-law fit")
    if np.any(lags <= 0.0):
        raise ValueError("lags must be strictly positive")
    if np.any(values <= 0.0):
        raise ValueError("values must be strictly positive")
    x = np.log(lags)
    y = np.log(values)
    sxx = np.sum((x - x.mean()) ** 2)
    if sxx == 0.0:
        raise ValueError("degenerate fit: all lags identical")
    alpha = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - alpha * x.mean())
    residuals = y - (intercept + alpha * x)
    mse = float(np.mean(residuals**2))
    return alpha, float(np.exp(intercept)), mse


def two_regime_fit(
    lags,
    values,
    min_segment: int = 5,
    candidate_range: tuple[int, int] | None = None,
) -> DecayFit:
    """Fit fast and plateau power-law regimes with an MSE-optimal breakpoint.

    ``lags``/``values`` may include lag 0 and zero values; those points are
    dropped (and counted) before fitting. Every surviving lag is tried as
    the transition point tau_plat: the fast regime covers lags < tau_plat,
    the plateau regime lags >= tau_plat, each with at least ``min_segment``
    points. ``candidate_range`` optionally bounds tau_plat (inclusive).

    The chosen fit minimizes (mse1 + mse2) / 2; exact ties pick the smallest
    tau_plat, making the result deterministic.
    """
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    if lags.shape != values.shape or lags.ndim != 1:
        raise ValueError("lags and values must be 1-d arrays of equal length")
    if min_segment < 2:
        raise ValueError("min_segment must be >= 2")

    keep = (lags > 0.0) & (values > 0.0) & np.isfinite(values)
    dropped = int(lags.size - keep.sum())
    kept_lags = lags[keep]
    kept_values = values[keep]
    order = np.argsort(kept_lags)
    kept_lags = kept_lags[order]
    kept_values = kept_values[order]

    n = kept_lags.size
    if n < 2 * min_segment:
        raise ValueError(
            f"need at least {2 * min_segment} positive points for a two-regime fit, got {n}"
        )

    best = None
    for split in range(min_segment, n - min_segment + 1):
        tau_plat = kept_lags[split]
        if candidate_range is not None and not (candidate_range[0] <= tau_plat <= candidate_range[1]):
            continue
        a1, b1, m1 = power_law_fit(kept_lags[:split], kept_values[:split])
        a2, b2, m2 = power_law_fit(kept_lags[split:], kept_values[split:])
        score = 0.5 * (m1 + m2)
        key = (score, tau_plat)
        if best is None or key < best[0]:
            best = (
                key,
                DecayFit(
                    alpha1=a1, beta1=b1, alpha2=a2, beta2=b2,
                    tau_plat=int(tau_plat), mse1=m1, mse2=m2,
                    n1=split, n2=n - split, dropped_lags=dropped,
                ),
            )
    if best is None:
        raise ValueError("no feasible transition point in the candidate range")
    return best[1]


def fit_curve(curve, min_segment: int = 5, candidate_range: tuple[int, int] | None = None) -> DecayFit:
    """Two-regime fit of a :class:`~persistnet.persistence.PersistenceCurve`."""
    return two_regime_fit(curve.lags, curve.values, min_segment=min_segment, candidate_range=candidate_range)
