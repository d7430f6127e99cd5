"""Surrogate return generators under four generative null hypotheses.

Each generator preserves progressively more structure of the source panel:

* ``shuffle``: independent random permutation of each asset's series;
  keeps per-asset value multisets, destroys all temporal and cross structure.
* ``rolling_univariate_gaussian``: per-asset draws from a Gaussian with the
  rolling window mean and standard deviation of the source.
* ``stable_multivariate_gaussian``: i.i.d. draws from one multivariate
  Gaussian with the source's full-sample mean vector and covariance.
* ``rolling_multivariate_gaussian``: per-day draws from the multivariate
  Gaussian with the rolling window mean vector and covariance.

Seeding: every generator accepts an integer seed or a sequence of integers
(entropy words). Ensemble member k uses entropy ``[master_seed, model_code,
k]`` and the shuffle generator further appends the asset index per stream,
so results are bit-reproducible regardless of scheduling or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericError
from .panel import ReturnMatrix

MODEL_KINDS = (
    "shuffle",
    "rolling_univariate_gaussian",
    "stable_multivariate_gaussian",
    "rolling_multivariate_gaussian",
)

_MODEL_CODES = {kind: code for code, kind in enumerate(MODEL_KINDS, start=1)}

_ROLLING_KINDS = ("rolling_univariate_gaussian", "rolling_multivariate_gaussian")

# relative tolerance for clipping / rejecting negative covariance eigenvalues
_EIG_TOL = 1e-10


@dataclass(frozen=True)
class NullModelSpec:
    """Configuration of one surrogate ensemble."""

    kind: str
    window: int = 126
    realisations: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.kind in _ROLLING_KINDS and self.window < 2:
            raise ValueError(f"rolling window must be >= 2, got {self.window}")
        if self.realisations < 1:
            raise ValueError(f"realisations must be >= 1, got {self.realisations}")


@dataclass(frozen=True)
class SurrogateEnsemble:
    """Members generated from one source under one null-model spec."""

    spec: NullModelSpec
    members: tuple[ReturnMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        shapes = {m.returns.shape for m in self.members}
        if len(shapes) > 1:
            raise ValueError(f"ensemble members disagree on shape: {shapes}")


def _entropy(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed)))


def member_entropy(spec: NullModelSpec, realisation: int) -> list[int]:
    """Entropy words for ensemble member ``realisation`` (deterministic mixing)."""
    return [int(spec.seed), _MODEL_CODES[spec.kind], int(realisation)]


def shuffle_returns(source: ReturnMatrix, seed) -> ReturnMatrix:
    """Independently permute each asset's return series along time.

    Each asset gets its own substream (seed entropy + asset index), so the
    permutation of asset i does not depend on how many assets precede it.
    """
    if source.n_dates == 0 or source.n_assets == 0:
        raise ValueError("source must be non-empty")
    base = _entropy(seed)
    out = np.empty_like(source.returns)
    for i in range(source.n_assets):
        rng = _rng(base + [i])
        out[i] = source.returns[i, rng.permutation(source.n_dates)]
    return replace(source, returns=out)


def _rolling_slices(n_dates: int, window: int) -> np.ndarray:
    """Map each time index t to its rolling-window index (first full window
    statistics are reused for the warm-up points t < window)."""
    idx = np.maximum(np.arange(n_dates), window - 1)
    return idx - (window - 1)


def rolling_univariate_gaussian(source: ReturnMatrix, window: int, seed) -> ReturnMatrix:
    """Per-asset Gaussian surrogates with rolling mean and standard deviation.

    Window statistics are computed on the trailing ``window`` observations of
    the source ending at (and including) each time index; the first
    ``window`` points reuse the first complete window's statistics so the
    surrogate matches the source length.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if source.n_dates <= window:
        raise ValueError(
            f"source length {source.n_dates} must exceed the window {window}"
        )
    sliding = np.lib.stride_tricks.sliding_window_view(source.returns, window, axis=1)
    means = sliding.mean(axis=2)
    stds = sliding.std(axis=2, ddof=1)
    sel = _rolling_slices(source.n_dates, window)
    rng = _rng(seed)
    z = rng.standard_normal(source.returns.shape)
    out = means[:, sel] + stds[:, sel] * z
    return replace(source, returns=out)


def _psd_factor(cov: np.ndarray, strict: bool) -> np.ndarray:
    """Factor A with A A^T = cov via eigendecomposition.

    Negative eigenvalues below -tol * max_eig raise when ``strict`` (a sample
    covariance should be PSD up to round-off); otherwise they are clipped to
    zero, which handles the rank deficiency of short-window covariances.
    """
    sym = 0.5 * (cov + cov.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    scale = max(float(eigvals.max()), 0.0)
    tol = _EIG_TOL * scale
    if strict and eigvals.min() < -max(tol, _EIG_TOL):
        raise NumericError(
            f"covariance not positive semidefinite after symmetrization "
            f"(min eigenvalue {eigvals.min():.3e})"
        )
    clipped = np.where(eigvals > tol, eigvals, 0.0)
    return eigvecs * np.sqrt(clipped)


def stable_multivariate_gaussian(source: ReturnMatrix, seed) -> ReturnMatrix:
    """I.i.d. draws from the full-sample multivariate Gaussian of the source."""
    if source.n_dates < 2:
        raise ValueError("source needs at least 2 dates")
    mu = source.returns.mean(axis=1)
    cov = np.cov(source.returns, ddof=1)
    cov = np.atleast_2d(cov)
    factor = _psd_factor(cov, strict=True)
    rng = _rng(seed)
    z = rng.standard_normal(source.returns.shape)
    out = mu[:, None] + factor @ z
    return replace(source, returns=out)


def rolling_multivariate_gaussian(source: ReturnMatrix, window: int, seed) -> ReturnMatrix:
    """Per-day draws from the rolling-window multivariate Gaussian of the source.

    Windowed covariances of N assets over fewer than N days are rank
    deficient; sampling uses the eigendecomposition with negative
    eigenvalues clipped to zero.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    if source.n_dates <= window:
        raise ValueError(
            f"source length {source.n_dates} must exceed the window {window}"
        )
    n_windows = source.n_dates - window + 1
    mus = np.empty((n_windows, source.n_assets))
    factors = np.empty((n_windows, source.n_assets, source.n_assets))
    for s in range(n_windows):
        chunk = source.returns[:, s : s + window]
        mus[s] = chunk.mean(axis=1)
        factors[s] = _psd_factor(np.atleast_2d(np.cov(chunk, ddof=1)), strict=False)
    sel = _rolling_slices(source.n_dates, window)
    rng = _rng(seed)
    z = rng.standard_normal(source.returns.shape)
    out = np.empty_like(source.returns)
    for t in range(source.n_dates):
        out[:, t] = mus[sel[t]] + factors[sel[t]] @ z[:, t]
    return replace(source, returns=out)


def generate_member(source: ReturnMatrix, spec: NullModelSpec, realisation: int) -> ReturnMatrix:
    """Generate one ensemble member with its deterministic sub-seed."""
    seed = member_entropy(spec, realisation)
    if spec.kind == "shuffle":
        return shuffle_returns(source, seed)
    if spec.kind == "rolling_univariate_gaussian":
        return rolling_univariate_gaussian(source, spec.window, seed)
    if spec.kind == "stable_multivariate_gaussian":
        return stable_multivariate_gaussian(source, seed)
    if spec.kind == "rolling_multivariate_gaussian":
        return rolling_multivariate_gaussian(source, spec.window, seed)
    raise ValueError(f"unknown null-model kind {spec.kind!r}")


def generate_ensemble(source: ReturnMatrix, spec: NullModelSpec) -> SurrogateEnsemble:
    """Generate all members of a surrogate ensemble.

    Members are independent across realisation indices and reproducible
    bit-exactly from (source, spec): member k always uses the sub-seed
    derived from (spec.seed, model code, k).
    """
    members = tuple(generate_member(source, spec, k) for k in range(spec.realisations))
    return SurrogateEnsemble(spec=spec, members=members)
