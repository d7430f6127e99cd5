"""End-to-end pipeline: ingest -> ensembles -> layers -> filters -> persistence
-> decay fits -> analytics -> reports.

A run is driven by one :class:`RunConfig` (a single JSON document). Outputs
land in the configured directory::

    manifest.json               config echo, versions, file checksums
    input/                      prices/metadata written by the bundled generator
    sources/real/               curves + fit reports (per filter)
    sources/<model>/member_k/   the same for every ensemble member
    ensembles/<model>/          ensemble-mean curves and their fits
    analytics/                  ranked-motif report JSON + volatility histogram

Determinism: every ensemble member derives its own seed from (master seed,
model code, member index), worker results are aggregated in task order, and
all floats are written with exact round-trip formatting, so identical
configs produce byte-identical numeric outputs at any worker count.
"""

from __future__ import annotations

import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import (
    motif_portfolio_volatility,
    persistence_vs_strength,
    random_portfolio_test,
    rank_persistent_motifs,
    sector_purity,
    triplet_overlap,
)
from .correlation import layer_sequence
from .decay import fit_curve
from .errors import ConfigError, NumericError, StageError
from .filtering import matching_edge_count, motif_inventory, quantile_threshold, tmfg
from .nullmodels import MODEL_KINDS, NullModelSpec, generate_member
from .panel import attach_metadata, compute_log_returns, load_metadata, load_prices
from .persistence import persistence_curve, plateau_persistence
from .storage import (
    file_sha256,
    write_curves,
    write_edges,
    write_fit_report,
    write_histogram,
    write_inventory,
    write_layer_sequence,
    write_metadata,
    write_motif_table,
    write_prices,
)
from .synthetic import synthetic_panel

logger = logging.getLogger(__name__)

FILTER_KINDS = ("tmfg", "quantile")

CLASSES_BY_FILTER = {
    "tmfg": ("edge", "triangle", "separator", "face_triangle", "tetrahedron"),
    "quantile": ("edge", "triangle"),
}


@dataclass
class RunConfig:
    """Single-document configuration of a full pipeline run.

    Defaults follow the reference parameterization: 126-day windows with a
    46-day smoothing factor, 200 starting points, lags up to 900, ten
    realisations per null model, top-10 motifs, and 10^5 random portfolios.
    """

    output_dir: str
    prices_csv: str | None = None
    metadata_csv: str | None = None
    synthetic: dict | None = None
    window: int = 126
    theta: float = 46.0
    n_starts: int = 200
    max_lag: int = 900
    filters: tuple[str, ...] = ("tmfg", "quantile")
    weight_transform: str = "absolute"
    null_models: tuple[NullModelSpec, ...] = ()
    realisations: int = 10
    top_k: int = 10
    n_random_portfolios: int = 100_000
    split_fraction: float = 0.8
    min_segment: int = 5
    master_seed: int = 0
    workers: int = 1
    export_layers: bool = False
    export_graphs: bool = False
    allow_ill_conditioned: bool = False
    run_analytics: bool = True

    def __post_init__(self):
        self.filters = tuple(self.filters)
        self.null_models = tuple(
            spec if isinstance(spec, NullModelSpec) else NullModelSpec(**spec)
            for spec in self.null_models
        )
        self.validate()

    def validate(self) -> None:
        if (self.prices_csv is None) == (self.synthetic is None):
            raise ConfigError("exactly one of prices_csv or synthetic must be set")
        if self.window < 2:
            raise ConfigError(f"window must be >= 2, got {self.window}")
        if self.theta <= 0:
            raise ConfigError(f"theta must be positive, got {self.theta}")
        if self.n_starts < 1 or self.max_lag < 1:
            raise ConfigError("n_starts and max_lag must be >= 1")
        unknown = set(self.filters) - set(FILTER_KINDS)
        if unknown or not self.filters:
            raise ConfigError(f"filters must be a non-empty subset of {FILTER_KINDS}")
        if self.weight_transform not in ("absolute", "signed"):
            raise ConfigError("weight_transform must be 'absolute' or 'signed'")
        if not 0.0 < self.split_fraction <= 1.0:
            raise ConfigError("split_fraction must be in (0, 1]")
        if self.top_k < 1 or self.n_random_portfolios < 2:
            raise ConfigError("top_k must be >= 1 and n_random_portfolios >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.realisations < 1:
            raise ConfigError("realisations must be >= 1")

    def resolved_null_models(self) -> tuple[NullModelSpec, ...]:
        """Null-model specs, defaulting to all four kinds at the run's window
        length, realisation count, and master seed."""
        if self.null_models:
            return self.null_models
        return tuple(
            NullModelSpec(
                kind=kind,
                window=self.window,
                realisations=self.realisations,
                seed=self.master_seed,
            )
            for kind in MODEL_KINDS
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data["filters"] = list(self.filters)
        data["null_models"] = [asdict(spec) for spec in self.resolved_null_models()]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path!r} must hold a JSON object")
        try:
            return cls.from_dict(data)
        except TypeError as exc:
            raise ConfigError(f"config {path!r}: {exc}") from exc


def desk_preset(output_dir: str, master_seed: int = 0) -> RunConfig:
    """Desk-scale preset: a small synthetic market sized so the full
    pipeline (ensembles included) completes in minutes."""
    return RunConfig(
        output_dir=output_dir,
        synthetic={"n_assets": 30, "n_dates": 460, "n_sectors": 3, "seed": master_seed},
        n_starts=50,
        max_lag=250,
        realisations=5,
        n_random_portfolios=10_000,
        master_seed=master_seed,
        split_fraction=1.0,
        run_analytics=False,
    )


@dataclass
class SourceResult:
    """Curves and fits of one data source (real or one ensemble member)."""

    source_id: str
    curves: dict  # (filter_kind, motif_class) -> PersistenceCurve
    fits: dict    # (filter_kind, motif_class) -> DecayFit | None


def _source_inventories(returns, config: RunConfig, provenance: str):
    seq = layer_sequence(
        returns,
        config.window,
        config.theta,
        start=config.window - 1,
        count=config.n_starts + config.max_lag,
        provenance=provenance,
    )
    inventories = {}
    for kind in config.filters:
        per_layer = []
        for layer in seq.layers:
            if kind == "tmfg":
                graph, tree = tmfg(layer, config.weight_transform)
                per_layer.append(motif_inventory(graph, tree))
            else:
                graph = quantile_threshold(
                    layer, matching_edge_count(layer.n_assets), config.weight_transform
                )
                per_layer.append(motif_inventory(graph))
        inventories[kind] = per_layer
    return seq, inventories


def _curves_and_fits(inventories, config: RunConfig, source_id: str) -> SourceResult:
    curves, fits = {}, {}
    for kind, per_layer in inventories.items():
        for motif_class in CLASSES_BY_FILTER[kind]:
            try:
                curve = persistence_curve(
                    per_layer, motif_class, config.n_starts, config.max_lag
                )
            except ValueError:
                logger.warning("%s/%s/%s: no motifs, curve skipped", source_id, kind, motif_class)
                continue
            curves[(kind, motif_class)] = curve
            try:
                fits[(kind, motif_class)] = fit_curve(curve, min_segment=config.min_segment)
            except ValueError:
                logger.warning("%s/%s/%s: two-regime fit infeasible", source_id, kind, motif_class)
                fits[(kind, motif_class)] = None
    return SourceResult(source_id=source_id, curves=curves, fits=fits)


def _member_job(args) -> SourceResult:
    source, config_dict, source_id = args
    config = RunConfig.from_dict(config_dict)
    _, inventories = _source_inventories(source, config, source_id)
    return _curves_and_fits(inventories, config, source_id)


def _write_source_outputs(directory: Path, result: SourceResult, config: RunConfig) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for kind in config.filters:
        curves = [
            result.curves[(kind, c)]
            for c in CLASSES_BY_FILTER[kind]
            if (kind, c) in result.curves
        ]
        if curves:
            write_curves(directory / f"curves_{kind}.csv", curves)
    rows = [
        (f"{result.source_id}/{kind}/{motif_class}", motif_class, fit)
        for (kind, motif_class), fit in sorted(result.fits.items())
        if fit is not None
    ]
    write_fit_report(directory / "fits.csv", rows)


def _load_real_source(config: RunConfig, input_dir: Path):
    if config.synthetic is not None:
        panel, sectors = synthetic_panel(**config.synthetic)
        input_dir.mkdir(parents=True, exist_ok=True)
        write_prices(input_dir / "prices.csv", panel)
        write_metadata(input_dir / "metadata.csv", sectors)
    else:
        panel = load_prices(config.prices_csv)
        sectors = load_metadata(config.metadata_csv) if config.metadata_csv else {}
    returns = attach_metadata(compute_log_returns(panel), sectors)
    return returns


def _check_geometry(config: RunConfig, returns) -> int:
    n_returns = returns.n_dates
    if returns.n_assets >= config.window and not config.allow_ill_conditioned:
        raise ConfigError(
            f"N={returns.n_assets} >= window={config.window} gives an "
            "ill-conditioned correlation estimate; set allow_ill_conditioned "
            "to override"
        )
    est_end = int(np.floor(config.split_fraction * n_returns)) if config.run_analytics else n_returns
    needed = config.window - 1 + config.n_starts + config.max_lag
    if needed > est_end:
        raise ConfigError(
            f"need {needed} return dates inside the estimation region "
            f"(got {est_end}); shrink n_starts/max_lag or provide more data"
        )
    if config.run_analytics and n_returns - est_end < 2:
        raise ConfigError(
            "out-of-sample window needs at least 2 dates; lower split_fraction"
        )
    return est_end


def _analytics_stage(config, returns, seq, inventories, real_result, out_dir: Path) -> dict:
    est_end = int(np.floor(config.split_fraction * returns.n_dates))
    kind = "tmfg" if "tmfg" in config.filters else config.filters[0]
    fit = real_result.fits.get((kind, "triangle"))
    if fit is None:
        raise NumericError("triangle-curve fit unavailable; cannot place the plateau")
    tau_plat = max(1, min(fit.tau_plat, config.max_lag - 1))
    table = plateau_persistence(
        inventories[kind], "triangle", tau_plat, config.max_lag, config.n_starts
    )
    ranked = rank_persistent_motifs(table, config.top_k)
    sectors = returns.sectors or tuple("UNKNOWN" for _ in returns.assets)
    purity, breakdown = sector_purity(ranked, dict(enumerate(sectors)))
    overlaps = triplet_overlap(ranked, seq, config.top_k)
    try:
        pearson, kendall, r_squared = persistence_vs_strength(table, seq)
    except ValueError:
        pearson = kendall = r_squared = float("nan")

    window = (est_end, returns.n_dates)
    volatility = motif_portfolio_volatility(returns, ranked, window)
    report = random_portfolio_test(
        returns,
        volatility,
        n_stocks=len(ranked.vertices()),
        n_samples=config.n_random_portfolios,
        seed=config.master_seed,
        window=window,
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    write_motif_table(out_dir / "motif_table.csv", table)
    write_histogram(out_dir / "volatility_histogram.csv", report.random_sample, report.motif_volatility)
    payload = {
        "motif_class": table.motif_class,
        "tau_plat": tau_plat,
        "top_motifs": [
            {
                "vertices": [returns.assets[v] for v in key],
                "sectors": sorted({sectors[v] for v in key}),
                "plateau_persistence": value,
            }
            for key, value in ranked.items
        ],
        "sector_purity": purity,
        "pure_sector_labels": [label for _, label in breakdown],
        "triplet_overlap": {
            "k": config.top_k,
            "per_layer": overlaps,
            "max": max(overlaps) if overlaps else 0,
        },
        "persistence_vs_strength": {
            "pearson_r": pearson,
            "kendall_tau": kendall,
            "r_squared": r_squared,
        },
        "portfolio": {
            "motif_volatility": report.motif_volatility,
            "n_stocks": report.n_stocks,
            "n_samples": report.n_samples,
            "random_mean": report.random_mean,
            "random_std": report.random_std,
            "z_score": report.z_score,
            "out_of_sample_window": list(report.window),
        },
    }
    (out_dir / "report.json").write_text(
        json.dumps(payload, indent=1, sort_keys=True) + "\n"
    )
    return payload


def run(config: RunConfig) -> dict:
    """Execute the full pipeline; returns the manifest dictionary.

    Any stage failure writes a FAILED marker (stage-tagged) into the output
    directory, keeps partial outputs, and re-raises as :class:`StageError`.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage = "config"
    try:
        (out / "config.json").write_text(
            json.dumps(config.to_dict(), indent=1, sort_keys=True) + "\n"
        )

        stage = "ingest"
        returns = _load_real_source(config, out / "input")
        _check_geometry(config, returns)

        stage = "correlate"
        real_seq, real_inventories = _source_inventories(returns, config, "real")
        real_result = _curves_and_fits(real_inventories, config, "real")
        _write_source_outputs(out / "sources" / "real", real_result, config)
        if config.export_layers:
            write_layer_sequence(out / "sources" / "real" / "layers", real_seq)
        if config.export_graphs:
            _export_graphs(out / "sources" / "real" / "graphs", returns, config)

        stage = "simulate"
        specs = config.resolved_null_models()
        tasks = []
        for spec in specs:
            for k in range(spec.realisations):
                member = generate_member(returns, spec, k)
                tasks.append((member, config.to_dict(), f"{spec.kind}/member_{k:03d}"))

        stage = "persist"
        if config.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                member_results = list(pool.map(_member_job, tasks, chunksize=1))
        else:
            member_results = [_member_job(task) for task in tasks]

        stage = "fit"
        index = 0
        for spec in specs:
            members = member_results[index : index + spec.realisations]
            index += spec.realisations
            for result in members:
                _write_source_outputs(out / "sources" / result.source_id, result, config)
            _write_ensemble_means(out / "ensembles" / spec.kind, spec, members, config)

        stage = "analyze"
        analytics_payload = None
        if config.run_analytics:
            analytics_payload = _analytics_stage(
                config, returns, real_seq, real_inventories, real_result, out / "analytics"
            )

        stage = "manifest"
        manifest = _write_manifest(out, config)
        if analytics_payload is not None:
            manifest["analytics"] = analytics_payload
        return manifest
    except Exception as exc:
        (out / "FAILED").write_text(f"{stage}: {exc}\n")
        raise StageError(stage, exc) from exc


def _export_graphs(directory: Path, returns, config: RunConfig) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    seq = layer_sequence(
        returns, config.window, config.theta,
        start=config.window - 1, count=config.n_starts + config.max_lag,
    )
    for layer in seq.layers:
        for kind in config.filters:
            if kind == "tmfg":
                graph, tree = tmfg(layer, config.weight_transform)
                inventory = motif_inventory(graph, tree)
            else:
                graph = quantile_threshold(
                    layer, matching_edge_count(layer.n_assets), config.weight_transform
                )
                inventory = motif_inventory(graph)
            write_edges(directory / f"edges_{kind}_{layer.anchor:05d}.csv", graph, returns.assets)
            write_inventory(directory / f"inventory_{kind}_{layer.anchor:05d}.csv", inventory, returns.assets)


def _write_ensemble_means(directory: Path, spec, members, config: RunConfig) -> None:
    from .persistence import PersistenceCurve

    directory.mkdir(parents=True, exist_ok=True)
    for kind in config.filters:
        mean_curves = []
        fit_rows = []
        for motif_class in CLASSES_BY_FILTER[kind]:
            stack = [
                m.curves[(kind, motif_class)]
                for m in members
                if (kind, motif_class) in m.curves
            ]
            if not stack:
                continue
            values = np.mean([c.values for c in stack], axis=0)
            per_start = np.mean([c.per_start for c in stack], axis=0)
            counts = np.mean([c.start_counts for c in stack], axis=0)
            mean_curve = PersistenceCurve(
                motif_class=motif_class,
                lags=stack[0].lags,
                values=values,
                n_starts=stack[0].n_starts,
                start_counts=counts,
                per_start=per_start,
            )
            mean_curves.append(mean_curve)
            try:
                fit = fit_curve(mean_curve, min_segment=config.min_segment)
                fit_rows.append((f"{spec.kind}/mean/{kind}/{motif_class}", motif_class, fit))
            except ValueError:
                logger.warning("%s mean %s/%s: fit infeasible", spec.kind, kind, motif_class)
        if mean_curves:
            write_curves(directory / f"mean_curves_{kind}.csv", mean_curves)
        write_fit_report(directory / f"mean_fits_{kind}.csv", fit_rows)


def _write_manifest(out: Path, config: RunConfig) -> dict:
    files = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name not in ("manifest.json", "FAILED"):
            files[str(path.relative_to(out))] = file_sha256(path)
    manifest = {
        "config": config.to_dict(),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "persistnet": __version__,
        },
        "files": files,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n"
    )
    return manifest
