"""Downstream analyses of persistent motifs.

Covers the ranking of motifs by plateau persistence, sector purity of the
top motifs, their overlap with the most-correlated raw triplets, the
relation between persistence and correlation strength, and the volatility
of the motif portfolio against random same-size portfolios.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .correlation import LayerSequence, weighted_kendall
from .panel import UNKNOWN_SECTOR, ReturnMatrix
from .persistence import MotifPersistenceTable

TRADING_DAYS_PER_YEAR = 252


@dataclass(frozen=True)
class RankedMotifs:
    """Top motifs by plateau persistence, ties broken by vertex tuple."""

    motif_class: str
    items: tuple[tuple[tuple, float], ...]
    k: int
    short: bool = False

    def vertices(self) -> tuple:
        """Deduplicated, sorted union of all ranked motifs' vertices."""
        seen = set()
        for key, _ in self.items:
            seen.update(key)
        return tuple(sorted(seen))


@dataclass(frozen=True)
class PortfolioReport:
    """Motif-portfolio volatility against a random-portfolio distribution."""

    motif_volatility: float
    n_stocks: int
    n_samples: int
    random_mean: float
    random_std: float
    z_score: float
    random_sample: np.ndarray
    window: tuple[int, int]
    seed: int


def map_table_to_indices(table: MotifPersistenceTable, assets) -> MotifPersistenceTable:
    """Re-key a ticker-labelled persistence table into asset-index space."""
    index = {a: i for i, a in enumerate(assets)}
    try:
        values = {
            tuple(sorted(index[v] for v in key)): value
            for key, value in table.values.items()
        }
    except KeyError as exc:
        raise ValueError(f"motif vertex {exc} not among the assets") from exc
    return MotifPersistenceTable(
        motif_class=table.motif_class,
        tau_plat=table.tau_plat,
        max_lag=table.max_lag,
        n_starts=table.n_starts,
        values=values,
    )


def rank_persistent_motifs(table: MotifPersistenceTable, k: int) -> RankedMotifs:
    """Top-k motifs by plateau persistence (descending, deterministic ties).

    If the table holds fewer than k motifs, all are returned and the result
    is flagged ``short``.
    """
    if not table.values:
        raise ValueError("empty persistence table")
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(table.values.items(), key=lambda item: (-item[1], item[0]))
    short = len(ranked) < k
    return RankedMotifs(
        motif_class=table.motif_class,
        items=tuple(ranked[:k]),
        k=k,
        short=short,
    )


def sector_purity(motifs: RankedMotifs, sectors) -> tuple[float, list[tuple[tuple, str | None]]]:
    """Fraction of motifs whose vertices all share one known sector label.

    ``sectors`` maps a vertex (asset index or id) to its sector label; a
    sequence is treated as an index-based mapping. Motifs containing an
    UNKNOWN sector never count as pure. Returns the fraction plus a
    per-motif breakdown of the shared label (None when impure).
    """
    if not isinstance(sectors, dict):
        sectors = {i: s for i, s in enumerate(sectors)}
    breakdown: list[tuple[tuple, str | None]] = []
    pure = 0
    for key, _ in motifs.items:
        labels = {sectors.get(v, UNKNOWN_SECTOR) for v in key}
        if len(labels) == 1 and UNKNOWN_SECTOR not in labels:
            pure += 1
            breakdown.append((key, labels.pop()))
        else:
            breakdown.append((key, None))
    fraction = pure / len(motifs.items) if motifs.items else 0.0
    return fraction, breakdown


def top_triplets(matrix: np.ndarray, k: int) -> tuple[tuple[int, int, int], ...]:
    """The k vertex triples with the highest mean pairwise correlation.

    Ties are broken lexicographically by vertex tuple so the result is
    deterministic.
    """
    n = matrix.shape[0]
    triples = np.array(list(combinations(range(n), 3)))
    scores = (
        matrix[triples[:, 0], triples[:, 1]]
        + matrix[triples[:, 0], triples[:, 2]]
        + matrix[triples[:, 1], triples[:, 2]]
    ) / 3.0
    order = np.lexsort((triples[:, 2], triples[:, 1], triples[:, 0], -scores))
    return tuple(tuple(int(v) for v in triples[i]) for i in order[:k])


def triplet_overlap(motifs: RankedMotifs, layers: LayerSequence, k: int | None = None) -> list[int]:
    """Per-layer overlap between top persistent triangles and top raw triplets.

    For each correlation layer, counts how many of the ranked motifs appear
    among the k most-correlated vertex triples of the unfiltered matrix
    (triplet score = mean of the three pairwise correlations).
    """
    if k is None:
        k = len(motifs.items)
    ranked_keys = {key for key, _ in motifs.items}
    return [
        len(ranked_keys & set(top_triplets(layer.matrix, k)))
        for layer in layers.layers
    ]


def persistence_vs_strength(
    table: MotifPersistenceTable, layers: LayerSequence
) -> tuple[float, float, float]:
    """Relation between per-motif persistence and mean edge correlation.

    Strength of a motif is its layer-averaged mean pairwise correlation over
    the motif's component edges. Returns (Pearson r, Kendall tau, R^2) of
    persistence against strength over all motifs in the table.
    """
    keys = sorted(table.values)
    if len(keys) < 3:
        raise ValueError("need at least 3 motifs to correlate")
    stack = np.mean([layer.matrix for layer in layers.layers], axis=0)
    strengths = np.array([
        np.mean([stack[u, v] for u, v in combinations(key, 2)]) for key in keys
    ])
    persistences = np.array([table.values[key] for key in keys])

    if persistences.std() == 0.0 or strengths.std() == 0.0:
        pearson = 0.0
    else:
        pearson = float(np.corrcoef(persistences, strengths)[0, 1])
    uniform = np.full(len(keys), 1.0 / len(keys))
    kendall = weighted_kendall(persistences, strengths, uniform)
    return pearson, kendall, pearson**2


def _window_slice(returns: ReturnMatrix, window: tuple[int, int]) -> np.ndarray:
    start, stop = window
    if not 0 <= start < stop <= returns.n_dates:
        raise ValueError(f"window {window} out of range for {returns.n_dates} dates")
    return returns.returns[:, start:stop]


def motif_portfolio_volatility(
    returns: ReturnMatrix, motifs: RankedMotifs, window: tuple[int, int]
) -> float:
    """Annualized volatility of the equal-weight portfolio of motif stocks.

    The portfolio holds the deduplicated union of all ranked motifs'
    vertices, equally weighted, over the (start, stop) date-index window;
    daily portfolio returns are averaged across members and the standard
    deviation is annualized by sqrt(252).
    """
    vertices = motifs.vertices()
    if not vertices:
        raise ValueError("ranked motifs have no vertices")
    if isinstance(vertices[0], str):
        index = {a: i for i, a in enumerate(returns.assets)}
        rows = [index[v] for v in vertices]
    else:
        rows = list(vertices)
    chunk = _window_slice(returns, window)
    if chunk.shape[1] < 2:
        raise ValueError("window must contain at least 2 dates")
    daily = chunk[rows].mean(axis=0)
    return float(daily.std(ddof=1) * np.sqrt(TRADING_DAYS_PER_YEAR))


def random_portfolio_test(
    returns: ReturnMatrix,
    motif_volatility: float,
    n_stocks: int,
    n_samples: int,
    seed: int,
    window: tuple[int, int],
) -> PortfolioReport:
    """Volatility of random equal-weight portfolios versus the motif portfolio.

    Draws ``n_samples`` uniform random subsets of ``n_stocks`` assets,
    computes each subset's annualized volatility over the window, and
    reports the motif portfolio's z-score against that distribution.
    Bit-reproducible under (seed, n_samples).
    """
    n = returns.n_assets
    if not 1 <= n_stocks <= n:
        raise ValueError(f"n_stocks must be in [1, {n}], got {n_stocks}")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    chunk = _window_slice(returns, window)
    if chunk.shape[1] < 2:
        raise ValueError("window must contain at least 2 dates")

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 417]))
    vols = np.empty(n_samples)
    batch = max(1, min(n_samples, 20_000))
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        # uniform random n_stocks-subsets: the n_stocks smallest of n uniforms
        picks = np.argpartition(rng.random((m, n)), n_stocks - 1, axis=1)[:, :n_stocks]
        selector = np.zeros((n, m))
        rows = picks.ravel()
        cols = np.repeat(np.arange(m), n_stocks)
        selector[rows, cols] = 1.0 / n_stocks
        daily = chunk.T @ selector  # (days, m)
        vols[done : done + m] = daily.std(axis=0, ddof=1) * np.sqrt(TRADING_DAYS_PER_YEAR)
        done += m
        del daily, selector
    mean = float(vols.mean())
    std = float(vols.std(ddof=1))
    z = (motif_volatility - mean) / std if std > 0 else float("inf")
    return PortfolioReport(
        motif_volatility=float(motif_volatility),
        n_stocks=int(n_stocks),
        n_samples=int(n_samples),
        random_mean=mean,
        random_std=std,
        z_score=float(z),
        random_sample=vols,
        window=(int(window[0]), int(window[1])),
        seed=int(seed),
    )
