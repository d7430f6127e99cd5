"""CSV/JSON wire formats shared by the pipeline stages and the CLI.

Every float is written as ``repr(float(x))``, which round-trips exactly, so
a stage chain that passes through files reproduces in-memory results
bit-for-bit. All writers emit LF line endings and deterministic row order.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .correlation import CorrelationLayer, LayerSequence
from .decay import DecayFit
from .errors import DataError
from .filtering import FilteredGraph, MotifInventory
from .panel import ReturnMatrix
from .persistence import MotifPersistenceTable, PersistenceCurve

VERTEX_SEP = "|"


def _fmt(x) -> str:
    return repr(float(x))


def _writer(handle):
    return csv.writer(handle, lineterminator="\n")


# ----------------------------------------------------------------- prices

def write_prices(path, panel) -> None:
    """Wide CSV ``date,<ticker...>`` of close prices."""
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["date", *panel.assets])
        for t, date in enumerate(panel.dates):
            w.writerow([date, *(_fmt(v) for v in panel.values[:, t])])


def write_metadata(path, sectors: dict) -> None:
    """Two-column CSV ``ticker,sector``."""
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["ticker", "sector"])
        for ticker, sector in sectors.items():
            w.writerow([ticker, sector])


# ---------------------------------------------------------------- returns

def write_returns(path, returns: ReturnMatrix) -> None:
    """Wide CSV ``date,<ticker...>`` of log-returns."""
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["date", *returns.assets])
        for t, date in enumerate(returns.dates):
            w.writerow([date, *(_fmt(v) for v in returns.returns[:, t])])


def read_returns(path) -> ReturnMatrix:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][:1] != ["date"]:
        raise DataError(f"{path}: expected a 'date,<tickers...>' header")
    assets = tuple(rows[0][1:])
    dates = tuple(r[0] for r in rows[1:])
    try:
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).T
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric return value ({exc})") from exc
    return ReturnMatrix(dates, assets, values)


# ----------------------------------------------------------------- layers

def layer_filename(anchor: int) -> str:
    return f"layer_{anchor:05d}.csv"


def write_layer(path, layer: CorrelationLayer, assets) -> None:
    """One N x N layer as CSV with a header row of tickers."""
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(list(assets))
        for row in layer.matrix:
            w.writerow([_fmt(v) for v in row])


def read_layer(path, anchor: int | None = None) -> tuple[CorrelationLayer, tuple[str, ...]]:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 2:
        raise DataError(f"{path}: empty layer file")
    assets = tuple(rows[0])
    matrix = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if anchor is None:
        stem = Path(path).stem
        anchor = int(stem.rsplit("_", 1)[-1]) if "_" in stem else 0
    return CorrelationLayer(anchor=anchor, matrix=matrix), assets


def write_layer_sequence(directory, sequence: LayerSequence) -> list[Path]:
    """Write one CSV per layer plus a ``layers_meta.json`` sidecar."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    assets = sequence.assets or tuple(
        str(i) for i in range(sequence.layers[0].n_assets)
    )
    paths = []
    for layer in sequence.layers:
        path = directory / layer_filename(layer.anchor)
        write_layer(path, layer, assets)
        paths.append(path)
    meta = {
        "provenance": sequence.provenance,
        "window": sequence.window,
        "theta": sequence.theta,
        "assets": list(assets),
        "anchors": list(sequence.anchors),
    }
    meta_path = directory / "layers_meta.json"
    meta_path.write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    paths.append(meta_path)
    return paths


def read_layer_sequence(directory) -> LayerSequence:
    directory = Path(directory)
    meta_path = directory / "layers_meta.json"
    if not meta_path.exists():
        raise DataError(f"{directory}: missing layers_meta.json")
    meta = json.loads(meta_path.read_text())
    layers = []
    for anchor in meta["anchors"]:
        layer, _ = read_layer(directory / layer_filename(anchor), anchor)
        layers.append(layer)
    return LayerSequence(
        tuple(layers), meta["provenance"], meta["window"], meta["theta"],
        tuple(meta["assets"]),
    )


# ----------------------------------------------------------------- graphs

def write_edges(path, graph: FilteredGraph, assets=None) -> None:
    """Edge list CSV ``u,v,weight`` (tickers when assets are given)."""
    name = (lambda i: assets[i]) if assets else (lambda i: str(i))
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["u", "v", "weight"])
        for (u, v), weight in zip(graph.edges, graph.weights):
            w.writerow([name(u), name(v), _fmt(weight)])


def write_inventory(path, inventory: MotifInventory, assets=None) -> None:
    """Motif inventory CSV ``motif_class,v1,v2,v3,v4``."""
    name = (lambda i: assets[i]) if assets else (lambda i: str(i))
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["motif_class", "v1", "v2", "v3", "v4"])
        classes = ["edge", "triangle"]
        if inventory.separators is not None:
            classes += ["separator", "face_triangle", "tetrahedron"]
        for motif_class in classes:
            for key in inventory.motifs(motif_class):
                padded = [name(v) for v in key] + [""] * (4 - len(key))
                w.writerow([motif_class, *padded])


def read_inventory(path) -> dict[str, set[tuple]]:
    """Motif sets keyed by class; vertices stay as written (string labels)."""
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][0] != "motif_class":
        raise DataError(f"{path}: expected a motif inventory header")
    sets: dict[str, set[tuple]] = {}
    for row in rows[1:]:
        motif_class = row[0]
        key = tuple(sorted(v for v in row[1:] if v))
        sets.setdefault(motif_class, set()).add(key)
    return sets


class InventoryFolder:
    """Lazy view over per-layer inventory CSVs for one motif class."""

    def __init__(self, sets: list[dict[str, set[tuple]]], motif_class: str):
        self._sets = sets
        self._class = motif_class

    def __len__(self) -> int:
        return len(self._sets)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return [
                layer.get(self._class, set()) for layer in self._sets[index]
            ]
        return self._sets[index].get(self._class, set())


def read_inventory_folder(directory) -> list[dict[str, set[tuple]]]:
    """All per-layer inventories in a directory, ordered by filename."""
    directory = Path(directory)
    paths = sorted(directory.glob("inventory_*.csv"))
    if not paths:
        raise DataError(f"{directory}: no inventory_*.csv files")
    return [read_inventory(p) for p in paths]


# ----------------------------------------------------------------- curves

def write_curves(path, curves: list[PersistenceCurve]) -> None:
    """Persistence curves CSV ``class,tau,persistence,T,C`` (class-major).

    ``C`` is the mean starting-layer motif count (constant for TMFG
    classes, averaged for thresholded graphs).
    """
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["class", "tau", "persistence", "T", "C"])
        for curve in curves:
            mean_count = _fmt(np.mean(curve.start_counts))
            for tau, value in zip(curve.lags, curve.values):
                w.writerow([curve.motif_class, int(tau), _fmt(value), curve.n_starts, mean_count])


def read_curves(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Curves keyed by class: (lags, values)."""
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][0] != "class":
        raise DataError(f"{path}: expected a persistence-curve header")
    data: dict[str, list[tuple[int, float]]] = {}
    for row in rows[1:]:
        data.setdefault(row[0], []).append((int(row[1]), float(row[2])))
    out = {}
    for motif_class, pairs in data.items():
        pairs.sort()
        lags = np.array([p[0] for p in pairs])
        values = np.array([p[1] for p in pairs])
        out[motif_class] = (lags, values)
    return out


def write_motif_table(path, table: MotifPersistenceTable) -> None:
    """Motif table CSV ``class,vertices,plateau_persistence``."""
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["class", "vertices", "plateau_persistence", "tau_plat"])
        for key in sorted(table.values):
            vertices = VERTEX_SEP.join(str(v) for v in key)
            w.writerow([table.motif_class, vertices, _fmt(table.values[key]), table.tau_plat])


def read_motif_table(path) -> MotifPersistenceTable:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][0] != "class":
        raise DataError(f"{path}: expected a motif-table header")
    if len(rows) < 2:
        raise DataError(f"{path}: empty motif table")
    motif_class = rows[1][0]
    tau_plat = int(rows[1][3])
    values = {}
    for row in rows[1:]:
        key = tuple(sorted(row[1].split(VERTEX_SEP)))
        values[key] = float(row[2])
    return MotifPersistenceTable(
        motif_class=motif_class, tau_plat=tau_plat, max_lag=tau_plat + 1,
        n_starts=0, values=values,
    )


# ------------------------------------------------------------------- fits

FIT_HEADER = [
    "curve_id", "class", "alpha1", "beta1", "alpha2", "beta2",
    "tau_plat", "mse1", "mse2", "dropped_lags",
]


def write_fit_report(path, rows: list[tuple[str, str, DecayFit]]) -> None:
    """Fit report CSV; one row per (curve id, motif class, fit)."""
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(FIT_HEADER)
        for curve_id, motif_class, fit in rows:
            w.writerow([
                curve_id, motif_class,
                _fmt(fit.alpha1), _fmt(fit.beta1), _fmt(fit.alpha2), _fmt(fit.beta2),
                fit.tau_plat, _fmt(fit.mse1), _fmt(fit.mse2), fit.dropped_lags,
            ])


def read_fit_report(path) -> list[dict]:
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != FIT_HEADER:
        raise DataError(f"{path}: expected a fit-report header")
    out = []
    for row in rows[1:]:
        rec = dict(zip(FIT_HEADER, row))
        for field in ("alpha1", "beta1", "alpha2", "beta2", "mse1", "mse2"):
            rec[field] = float(rec[field])
        rec["tau_plat"] = int(rec["tau_plat"])
        rec["dropped_lags"] = int(rec["dropped_lags"])
        out.append(rec)
    return out


# ------------------------------------------------------------- histograms

def write_histogram(path, sample: np.ndarray, marker: float, bins: int = 50) -> None:
    """Plot-ready histogram CSV of the random-portfolio volatilities.

    The motif-portfolio volatility is written as a trailing marker row with
    empty bin bounds.
    """
    counts, edges = np.histogram(sample, bins=bins)
    with open(path, "w", newline="") as handle:
        w = _writer(handle)
        w.writerow(["bin_left", "bin_right", "count"])
        for i, count in enumerate(counts):
            w.writerow([_fmt(edges[i]), _fmt(edges[i + 1]), int(count)])
        w.writerow(["motif_volatility", "", _fmt(marker)])


# ----------------------------------------------------------------- hashes

def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
