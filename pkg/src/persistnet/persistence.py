"""Soft persistence of motifs across temporal graph layers.

A motif (canonical sorted vertex tuple) is soft-persistent at lag tau from
starting layer t when it is present at both t and t + tau, regardless of
what happens in between. Three aggregations are provided:

* class curves: the per-start fraction of starting motifs that persist,
  averaged over starting points, as a function of tau;
* plateau tables: per-motif persistence averaged over all starting points
  and all lags at or beyond the plateau transition;
* per-motif curves: per-motif persistence conditional on presence at the
  starting layer, the building block for the edge-independence null
  (a motif made of k mutually independent edges would persist with the
  product of its k component-edge persistences).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

MOTIF_CLASSES = ("edge", "triangle", "separator", "face_triangle", "tetrahedron")

CLASS_VERTEX_COUNT = {
    "edge": 2,
    "triangle": 3,
    "separator": 3,
    "face_triangle": 3,
    "tetrahedron": 4,
}


def canonical_key(vertices: Iterable) -> tuple:
    """Sorted vertex tuple; motif identity is the vertex set only."""
    return tuple(sorted(vertices))


def soft_persistence(motifs_at_start: Iterable, motifs_at_lag: Iterable) -> dict[tuple, int]:
    """Binary persistence indicator for every motif of the starting set.

    Keys are the starting motifs (canonicalized); the value is 1 when the
    motif is also present at the lagged layer, else 0.
    """
    later = {canonical_key(m) for m in motifs_at_lag}
    return {canonical_key(m): int(canonical_key(m) in later) for m in motifs_at_start}


@dataclass(frozen=True)
class PersistenceCurve:
    """Class-averaged soft persistence as a function of lag.

    ``lags`` runs 0..max_lag (the tau = 0 diagnostic value is exactly 1);
    ``start_counts`` holds each starting layer's motif count |C_t|;
    ``per_start`` is the (n_starts x n_lags) matrix of per-start fractions
    (NaN rows mark starting layers with an empty motif set, which are
    excluded from the average).
    """

    motif_class: str
    lags: np.ndarray
    values: np.ndarray
    n_starts: int
    start_counts: np.ndarray
    per_start: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lags", np.asarray(self.lags, dtype=int))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.lags.shape != self.values.shape:
            raise ValueError("lags and values must align")
        if np.any((self.values < -1e-12) | (self.values > 1.0 + 1e-12)):
            raise ValueError("persistence values must lie in [0, 1]")
        if self.lags.size and self.lags[0] == 0 and self.values[0] != 1.0:
            raise ValueError("persistence at lag 0 must be exactly 1")

    @property
    def n_starts_used(self) -> int:
        return int(np.sum(self.start_counts > 0))

    def standard_errors(self) -> np.ndarray:
        """Per-lag standard error of the mean over starting points."""
        used = self.per_start[self.start_counts > 0]
        n = used.shape[0]
        if n < 2:
            return np.full(self.values.shape, np.nan)
        return used.std(axis=0, ddof=1) / np.sqrt(n)


@dataclass(frozen=True)
class MotifPersistenceTable:
    """Per-motif persistence averaged over starts and plateau lags."""

    motif_class: str
    tau_plat: int
    max_lag: int
    n_starts: int
    values: dict[tuple, float]

    def __post_init__(self):
        if not all(0.0 <= v <= 1.0 + 1e-12 for v in self.values.values()):
            raise ValueError("plateau persistence values must lie in [0, 1]")


def _motif_sets(layers: Sequence, motif_class: str) -> list[set]:
    """Canonical motif sets per layer.

    A layer may be a MotifInventory, a mapping from class name to a motif
    collection, or (when only one class is ever asked for) a plain motif
    collection.
    """
    sets = []
    for layer in layers:
        if hasattr(layer, "motifs"):
            motifs = layer.motifs(motif_class)
        elif isinstance(layer, Mapping):
            motifs = layer.get(motif_class, ())
        else:
            motifs = layer
        sets.append({canonical_key(m) for m in motifs})
    return sets


def _membership(layer_sets: list[set]) -> tuple[dict, np.ndarray]:
    """Index motifs and build the boolean (layer x motif) presence matrix."""
    ids: dict[tuple, int] = {}
    for layer in layer_sets:
        for key in sorted(layer):
            if key not in ids:
                ids[key] = len(ids)
    present = np.zeros((len(layer_sets), len(ids)), dtype=bool)
    for row, layer in enumerate(layer_sets):
        for key in layer:
            present[row, ids[key]] = True
    return ids, present


def _check_length(n_layers: int, n_starts: int, max_lag: int) -> None:
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    needed = n_starts + max_lag
    if n_layers < needed:
        raise ValueError(
            f"need at least n_starts + max_lag = {needed} layers, got {n_layers}"
        )


def persistence_curve(layers: Sequence, motif_class: str, n_starts: int, max_lag: int) -> PersistenceCurve:
    """Average soft persistence of a motif class over ``n_starts`` starting layers.

    ``layers`` is a sequence of :class:`~persistnet.filtering.MotifInventory`
    (or raw motif collections) covering at least ``n_starts + max_lag``
    consecutive layers. For each starting layer t the persisting fraction of
    its own motif set is computed at every lag, then averaged across starting
    layers; starting layers with no motifs of the class are skipped.
    """
    _check_length(len(layers), n_starts, max_lag)
    sets = _motif_sets(layers[: n_starts + max_lag], motif_class)
    _, present = _membership(sets)

    starts = present[:n_starts]
    start_counts = starts.sum(axis=1)
    if not np.any(start_counts > 0):
        raise ValueError(f"no motifs of class {motif_class!r} in any starting layer")

    per_start = np.full((n_starts, max_lag + 1), np.nan)
    valid = start_counts > 0
    per_start[valid, 0] = 1.0
    for tau in range(1, max_lag + 1):
        joint = (starts & present[tau : tau + n_starts]).sum(axis=1)
        per_start[valid, tau] = joint[valid] / start_counts[valid]

    values = np.nanmean(per_start, axis=0)
    return PersistenceCurve(
        motif_class=motif_class,
        lags=np.arange(max_lag + 1),
        values=values,
        n_starts=n_starts,
        start_counts=start_counts,
        per_start=per_start,
    )


def plateau_persistence(
    layers: Sequence, motif_class: str, tau_plat: int, max_lag: int, n_starts: int
) -> MotifPersistenceTable:
    """Per-motif persistence averaged over starts and lags in [tau_plat, max_lag].

    Every (start, lag) cell counts: a motif absent from a starting layer
    contributes zeros there. Only motifs present in at least one starting
    layer appear in the table.
    """
    if tau_plat >= max_lag:
        raise ValueError(f"tau_plat ({tau_plat}) must be < max_lag ({max_lag})")
    if tau_plat < 0:
        raise ValueError("tau_plat must be >= 0")
    _check_length(len(layers), n_starts, max_lag)
    sets = _motif_sets(layers[: n_starts + max_lag], motif_class)
    ids, present = _membership(sets)

    counts = present.astype(np.int64)
    cum = np.vstack([np.zeros((1, counts.shape[1]), dtype=np.int64), np.cumsum(counts, axis=0)])
    total = np.zeros(counts.shape[1], dtype=np.int64)
    for t in range(n_starts):
        # motifs persisting from start t, summed over tau in [tau_plat, max_lag]
        window = cum[t + max_lag + 1] - cum[t + tau_plat]
        total += counts[t] * window

    n_lags = max_lag - tau_plat + 1
    denom = float(n_starts * n_lags)
    seen_at_start = counts[:n_starts].sum(axis=0) > 0
    values = {
        key: float(total[col] / denom)
        for key, col in ids.items()
        if seen_at_start[col]
    }
    return MotifPersistenceTable(
        motif_class=motif_class,
        tau_plat=int(tau_plat),
        max_lag=int(max_lag),
        n_starts=int(n_starts),
        values=values,
    )


def per_motif_curves(layers: Sequence, motif_class: str, n_starts: int, max_lag: int) -> dict[tuple, np.ndarray]:
    """Per-motif persistence curves conditional on presence at the start.

    For each motif present in at least one starting layer, value(tau) is the
    fraction of its starting occurrences that are still present tau layers
    later. value(0) is exactly 1.
    """
    _check_length(len(layers), n_starts, max_lag)
    sets = _motif_sets(layers[: n_starts + max_lag], motif_class)
    ids, present = _membership(sets)

    starts = present[:n_starts]
    appearances = starts.sum(axis=0)
    curves = np.zeros((len(ids), max_lag + 1))
    curves[:, 0] = 1.0
    for tau in range(1, max_lag + 1):
        joint = (starts & present[tau : tau + n_starts]).sum(axis=0)
        with np.errstate(invalid="ignore"):
            curves[:, tau] = np.where(appearances > 0, joint / np.maximum(appearances, 1), 0.0)
    return {key: curves[col] for key, col in ids.items() if appearances[col] > 0}


def motif_component_edges(key: tuple) -> tuple[tuple, ...]:
    """The component edges of a motif key, as canonical 2-tuples."""
    return tuple(combinations(sorted(key), 2))


def edge_independence_null(edge_curves: Sequence[np.ndarray]) -> np.ndarray:
    """Expected motif persistence if its component edges persisted independently.

    Takes the k = 3 (triangle) or k = 6 (tetrahedron) component-edge
    persistence curves and returns their pointwise product.
    """
    if len(edge_curves) not in (3, 6):
        raise ValueError(f"expected 3 or 6 component-edge curves, got {len(edge_curves)}")
    arrays = []
    for curve in edge_curves:
        if curve is None:
            raise ValueError("missing component-edge persistence curve")
        arrays.append(np.asarray(curve, dtype=float))
    if any(a.shape != arrays[0].shape for a in arrays):
        raise ValueError("component-edge curves must share one lag grid")
    product = arrays[0].copy()
    for a in arrays[1:]:
        product *= a
    return product


def class_independence_null(layers: Sequence, motif_class: str, n_starts: int, max_lag: int) -> np.ndarray:
    """Class-level independence null curve, aggregated like the observed curve.

    Builds per-edge conditional curves, forms each motif's product null, and
    averages with the same per-start weighting as :func:`persistence_curve`.
    """
    if CLASS_VERTEX_COUNT.get(motif_class, 2) < 3:
        raise ValueError("independence null applies to 3- and 4-vertex motifs")
    edge_curves = per_motif_curves(layers, "edge", n_starts, max_lag)
    motif_sets = _motif_sets(layers[:n_starts], motif_class)

    per_start_null = []
    for start_set in motif_sets:
        if not start_set:
            continue
        nulls = [
            edge_independence_null([edge_curves[e] for e in motif_component_edges(key)])
            for key in sorted(start_set)
        ]
        per_start_null.append(np.mean(nulls, axis=0))
    if not per_start_null:
        raise ValueError(f"no motifs of class {motif_class!r} in any starting layer")
    return np.mean(per_start_null, axis=0)


def independence_adjusted_exponent(alpha: float, edge_multiplicity: int) -> float:
    """Per-edge-equivalent decay exponent of a k-edge motif.

    Under edge independence a motif's decay exponent would be k times the
    edge exponent, so dividing by the edge multiplicity makes it directly
    comparable: an adjusted value smaller in modulus than the observed edge
    exponent rejects the independence hypothesis.
    """
    if edge_multiplicity < 2:
        raise ValueError("edge multiplicity must be >= 2")
    return float(alpha) / float(edge_multiplicity)
