"""Exponentially weighted Kendall correlation over rolling windows.

A window of ``delta`` trading days gets weights ``w_t ~ exp((t - delta) / theta)``
(t = 1..delta, normalized to sum 1), so the most recent observation is the
heaviest. The weighted Kendall statistic for a pair (x, y) is

    tau_w = sum_{i<j} w_i w_j sign(x_i - x_j) sign(y_i - y_j)
            / sum_{i<j} w_i w_j

with sign(0) = 0 in the numerator and all pairs kept in the denominator,
so that under uniform weights it degrades to the classical tie-adjusted
tau-a. Whole layers are computed in one matrix product: stacking the
root-weighted pair signs of every asset gives tau_w for all asset pairs
at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import ReturnMatrix


@dataclass(frozen=True)
class ExpWeights:
    """Normalized, strictly increasing exponential window weights."""

    window: int
    theta: float
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.window,):
            raise ValueError("weights length must equal window")
        if np.any(w <= 0.0) or np.any(np.diff(w) <= 0.0):
            raise ValueError("weights must be strictly positive and increasing")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


def exp_weights(window: int, theta: float) -> ExpWeights:
    """Build exponential window weights for a ``window``-day rolling window."""
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    t = np.arange(1, window + 1, dtype=float)
    w = np.exp((t - window) / float(theta))
    w /= w.sum()
    return ExpWeights(int(window), float(theta), w)


def _as_weight_array(weights) -> np.ndarray:
    if isinstance(weights, ExpWeights):
        return weights.weights
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or np.any(w < 0.0):
        raise ValueError("weights must be a 1-d non-negative array")
    return w


def weighted_kendall(x, y, weights) -> float:
    """Exponentially weighted Kendall correlation of two equal-length series.

    ``weights`` may be an :class:`ExpWeights` or any non-negative 1-d array
    (uniform weights recover classical tau-a). Complexity is O(n^2) in the
    series length by direct pair expansion.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = _as_weight_array(weights)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.shape != w.shape:
        raise ValueError("weights length must match series length")
    i, j = np.triu_indices(x.size, k=1)
    ww = w[i] * w[j]
    concordance = np.sign(x[i] - x[j]) * np.sign(y[i] - y[j])
    return float((ww * concordance).sum() / ww.sum())


def weighted_pearson(x, y, weights) -> float:
    """Pearson correlation with the same window weighting applied to moments.

    Returns 0.0 when either series has zero weighted variance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = _as_weight_array(weights)
    w = w / w.sum()
    mx, my = w @ x, w @ y
    xc, yc = x - mx, y - my
    cov = w @ (xc * yc)
    vx, vy = w @ (xc * xc), w @ (yc * yc)
    if vx <= 0.0 or vy <= 0.0:
        return 0.0
    return float(cov / np.sqrt(vx * vy))


@dataclass(frozen=True)
class CorrelationLayer:
    """One N x N correlation matrix anchored at a window-end date index."""

    anchor: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("correlation matrix must be square")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(m), 1.0, atol=1e-12):
            raise ValueError("correlation matrix must have unit diagonal")
        if np.any(np.abs(m) > 1.0 + 1e-12):
            raise ValueError("correlation values must lie in [-1, 1]")

    @property
    def n_assets(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class LayerSequence:
    """Correlation layers at consecutive anchors (stride one trading day)."""

    layers: tuple[CorrelationLayer, ...]
    provenance: str
    window: int
    theta: float
    assets: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        anchors = [layer.anchor for layer in self.layers]
        if any(b - a != 1 for a, b in zip(anchors, anchors[1:])):
            raise ValueError("layer anchors must increase by exactly 1")

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def anchors(self) -> tuple[int, ...]:
        return tuple(layer.anchor for layer in self.layers)


def _returns_array(returns) -> np.ndarray:
    if isinstance(returns, ReturnMatrix):
        return returns.returns
    r = np.asarray(returns, dtype=float)
    if r.ndim != 2:
        raise ValueError("returns must be a 2-d (assets x dates) array")
    return r


class _KendallLayerEngine:
    """Reusable pair-index/weight buffers for computing many layers."""

    def __init__(self, weights: ExpWeights):
        self.weights = weights
        delta = weights.window
        self.i, self.j = np.triu_indices(delta, k=1)
        pair_w = weights.weights[self.i] * weights.weights[self.j]
        self.total = pair_w.sum()
        self.root_w = np.sqrt(pair_w)

    def matrix(self, window: np.ndarray) -> np.ndarray:
        # window: (n_assets, delta) slice ending at the anchor
        signs = np.sign(window[:, self.i] - window[:, self.j])
        signs *= self.root_w
        corr = (signs @ signs.T) / self.total
        np.clip(corr, -1.0, 1.0, out=corr)
        np.fill_diagonal(corr, 1.0)
        # matmul round-off can leave the matrix asymmetric in the last ulp
        return 0.5 * (corr + corr.T)


def correlation_layer(returns, anchor: int, weights: ExpWeights, method: str = "kendall") -> CorrelationLayer:
    """Correlation matrix over the window of ``weights.window`` days ending at ``anchor``.

    ``anchor`` indexes the window's last observation (0-based into the return
    dates). ``method`` is ``"kendall"`` (default) or ``"pearson"``; the
    Pearson variant applies the same weights to means and covariances.
    """
    r = _returns_array(returns)
    delta = weights.window
    if anchor < delta - 1:
        raise ValueError(f"anchor {anchor} needs at least {delta} days of history")
    if anchor >= r.shape[1]:
        raise ValueError(f"anchor {anchor} beyond last return index {r.shape[1] - 1}")
    window = r[:, anchor - delta + 1 : anchor + 1]
    if method == "kendall":
        matrix = _KendallLayerEngine(weights).matrix(window)
    elif method == "pearson":
        matrix = _pearson_matrix(window, weights.weights)
    else:
        raise ValueError(f"unknown correlation method {method!r}")
    return CorrelationLayer(anchor=int(anchor), matrix=matrix)


def _pearson_matrix(window: np.ndarray, w: np.ndarray) -> np.ndarray:
    means = window @ w
    centered = window - means[:, None]
    cov = (centered * w) @ centered.T
    sd = np.sqrt(np.diag(cov).copy())
    denom = np.outer(sd, sd)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(denom > 0.0, cov / denom, 0.0)
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return 0.5 * (corr + corr.T)


def layer_sequence(
    returns,
    window: int,
    theta: float,
    start: int,
    count: int,
    method: str = "kendall",
    provenance: str = "real",
) -> LayerSequence:
    """Compute ``count`` correlation layers at consecutive anchors from ``start``.

    ``start`` must leave a full window of history (start >= window - 1) and
    ``start + count - 1`` must not run past the last return date.
    """
    r = _returns_array(returns)
    if count < 1:
        raise ValueError("count must be >= 1")
    weights = exp_weights(window, theta)
    if start < window - 1:
        raise ValueError(f"start anchor {start} needs {window} days of history")
    if start + count - 1 >= r.shape[1]:
        raise ValueError(
            f"not enough history: last anchor {start + count - 1} beyond {r.shape[1] - 1}"
        )
    assets = returns.assets if isinstance(returns, ReturnMatrix) else None
    layers = []
    if method == "kendall":
        engine = _KendallLayerEngine(weights)
        for anchor in range(start, start + count):
            matrix = engine.matrix(r[:, anchor - window + 1 : anchor + 1])
            layers.append(CorrelationLayer(anchor=anchor, matrix=matrix))
    else:
        for anchor in range(start, start + count):
            layers.append(correlation_layer(r, anchor, weights, method=method))
    return LayerSequence(tuple(layers), provenance, window, float(theta), assets)
