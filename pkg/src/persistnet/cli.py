"""Command-line interface.

Each pipeline stage is individually runnable and composable through the
declared CSV/JSON formats; ``run`` is their composition driven by a single
JSON config. Exit codes: 0 success, 1 config error, 2 data error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analytics import (
    map_table_to_indices,
    motif_portfolio_volatility,
    persistence_vs_strength,
    random_portfolio_test,
    rank_persistent_motifs,
    sector_purity,
    triplet_overlap,
)
from .correlation import layer_sequence
from .decay import two_regime_fit
from .errors import ConfigError, DataError, NumericError, PersistnetError, StageError
from .filtering import matching_edge_count, motif_inventory, quantile_threshold, tmfg
from .nullmodels import MODEL_KINDS, NullModelSpec, generate_ensemble
from .panel import attach_metadata, compute_log_returns, load_metadata, load_prices
from .persistence import MOTIF_CLASSES, persistence_curve, plateau_persistence
from .pipeline import RunConfig, desk_preset, run
from .storage import (
    InventoryFolder,
    read_curves,
    read_inventory_folder,
    read_layer,
    read_layer_sequence,
    read_motif_table,
    read_returns,
    write_curves,
    write_edges,
    write_fit_report,
    write_histogram,
    write_inventory,
    write_layer_sequence,
    write_metadata,
    write_motif_table,
    write_prices,
    write_returns,
)
from .synthetic import synthetic_panel

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the CLI contract reserves
    # 2 for data errors, so route usage problems through ConfigError instead
    def error(self, message):
        raise ConfigError(message)


def _cmd_synth(args) -> None:
    kwargs = dict(
        n_assets=args.n_assets, n_dates=args.n_dates, n_sectors=args.n_sectors,
        seed=args.seed,
    )
    if args.hot_sector is not None:
        kwargs["hot_sector"] = args.hot_sector
    panel, sectors = synthetic_panel(**kwargs)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_prices(out / "prices.csv", panel)
    write_metadata(out / "metadata.csv", sectors)
    print(f"wrote {out / 'prices.csv'} ({panel.n_assets} assets x {panel.n_dates} dates)")


def _cmd_ingest(args) -> None:
    panel = load_prices(args.prices)
    returns = compute_log_returns(panel)
    if args.meta:
        returns = attach_metadata(returns, load_metadata(args.meta))
    write_returns(args.out, returns)
    print(
        f"wrote {args.out}: {returns.n_assets} assets x {returns.n_dates} return dates "
        f"({panel.dropped_dates} input rows dropped)"
    )


def _cmd_simulate(args) -> None:
    source = read_returns(args.returns)
    spec = NullModelSpec(
        kind=args.kind, window=args.window, realisations=args.realisations, seed=args.seed
    )
    ensemble = generate_ensemble(source, spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, member in enumerate(ensemble.members):
        write_returns(out / f"member_{k:03d}.csv", member)
    print(f"wrote {spec.realisations} {spec.kind} members to {out}")


def _cmd_correlate(args) -> None:
    returns = read_returns(args.returns)
    start = args.start if args.start is not None else args.window - 1
    count = args.count if args.count is not None else returns.n_dates - start
    seq = layer_sequence(
        returns, args.window, args.theta, start=start, count=count,
        provenance=args.provenance,
    )
    write_layer_sequence(args.out_dir, seq)
    print(f"wrote {len(seq)} layers to {args.out_dir}")


def _cmd_filter(args) -> None:
    layer, assets = read_layer(args.layer)
    if args.method == "tmfg":
        graph, tree = tmfg(layer, args.transform)
        inventory = motif_inventory(graph, tree)
    else:
        n_edges = args.edges if args.edges is not None else matching_edge_count(layer.n_assets)
        graph = quantile_threshold(layer, n_edges, args.transform)
        inventory = motif_inventory(graph)
    write_edges(args.out_edges, graph, assets)
    write_inventory(args.out_inventory, inventory, assets)
    print(f"wrote {len(graph.edges)} edges and {len(inventory.triangles)} triangles")


def _cmd_persist(args) -> None:
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    bad = set(classes) - set(MOTIF_CLASSES)
    if bad:
        raise ConfigError(f"unknown motif classes: {sorted(bad)}")
    folders = read_inventory_folder(args.inventories)
    curves = []
    for motif_class in classes:
        view = InventoryFolder(folders, motif_class)
        curves.append(persistence_curve(view, motif_class, args.n_starts, args.max_lag))
    write_curves(args.out_curves, curves)
    print(f"wrote {len(curves)} curves to {args.out_curves}")
    if args.out_table:
        if args.tau_plat is None:
            raise ConfigError("--tau-plat is required with --out-table")
        view = InventoryFolder(folders, args.table_class)
        table = plateau_persistence(
            view, args.table_class, args.tau_plat, args.max_lag, args.n_starts
        )
        write_motif_table(args.out_table, table)
        print(f"wrote {len(table.values)} motif rows to {args.out_table}")


def _cmd_fit(args) -> None:
    curves = read_curves(args.curves)
    curve_id = args.curve_id or Path(args.curves).stem
    rows = []
    for motif_class in sorted(curves):
        lags, values = curves[motif_class]
        try:
            fit = two_regime_fit(lags, values, min_segment=args.min_segment)
        except ValueError as exc:
            logger.warning("%s/%s: %s", curve_id, motif_class, exc)
            continue
        rows.append((f"{curve_id}/{motif_class}", motif_class, fit))
    if not rows:
        raise NumericError(f"no fittable curves in {args.curves}")
    write_fit_report(args.out, rows)
    print(f"wrote {len(rows)} fits to {args.out}")


def _cmd_analyze(args) -> None:
    returns = read_returns(args.returns)
    sectors = load_metadata(args.meta) if args.meta else {}
    returns = attach_metadata(returns, sectors)
    table = map_table_to_indices(read_motif_table(args.table), returns.assets)
    seq = read_layer_sequence(args.layers)

    ranked = rank_persistent_motifs(table, args.k)
    labels = dict(enumerate(returns.sectors))
    purity, _ = sector_purity(ranked, labels)
    overlaps = triplet_overlap(ranked, seq, args.k)
    try:
        pearson, kendall, r_squared = persistence_vs_strength(table, seq)
    except ValueError:
        pearson = kendall = r_squared = float("nan")

    split = int(np.floor(args.split * returns.n_dates))
    window = (split, returns.n_dates)
    volatility = motif_portfolio_volatility(returns, ranked, window)
    report = random_portfolio_test(
        returns, volatility, n_stocks=len(ranked.vertices()),
        n_samples=args.n_samples, seed=args.seed, window=window,
    )

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_histogram(out / "volatility_histogram.csv", report.random_sample, report.motif_volatility)
    payload = {
        "top_motifs": [
            {
                "vertices": [returns.assets[v] for v in key],
                "sectors": sorted({returns.sectors[v] for v in key}),
                "plateau_persistence": value,
            }
            for key, value in ranked.items
        ],
        "sector_purity": purity,
        "triplet_overlap": {"k": args.k, "per_layer": overlaps},
        "persistence_vs_strength": {
            "pearson_r": pearson, "kendall_tau": kendall, "r_squared": r_squared,
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
    (out / "report.json").write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print(f"wrote analytics to {out} (portfolio z-score {report.z_score:.2f})")


def _cmd_run(args) -> None:
    if args.config:
        config = RunConfig.from_json(args.config)
    elif args.preset == "desk":
        if not args.output:
            raise ConfigError("--output is required with --preset")
        config = desk_preset(args.output, master_seed=args.seed or 0)
    else:
        raise ConfigError("either --config or --preset desk is required")
    overrides = {}
    if args.output:
        overrides["output_dir"] = args.output
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        data = config.to_dict()
        data.update(overrides)
        config = RunConfig.from_dict(data)
    manifest = run(config)
    print(f"run complete: {len(manifest['files'])} files in {config.output_dir}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="persistnet",
        description="Soft persistence of motifs in filtered correlation networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic price panel")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-assets", type=int, default=30)
    p.add_argument("--n-dates", type=int, default=460)
    p.add_argument("--n-sectors", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hot-sector", type=int, default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="load and clean a price CSV into returns")
    p.add_argument("--prices", required=True)
    p.add_argument("--meta")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("simulate", help="generate a null-model surrogate ensemble")
    p.add_argument("--returns", required=True)
    p.add_argument("--kind", choices=MODEL_KINDS, required=True)
    p.add_argument("--window", type=int, default=126)
    p.add_argument("--realisations", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("correlate", help="compute rolling weighted-Kendall layers")
    p.add_argument("--returns", required=True)
    p.add_argument("--window", type=int, default=126)
    p.add_argument("--theta", type=float, default=46.0)
    p.add_argument("--start", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--provenance", default="real")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("filter", help="filter one layer into a sparse graph")
    p.add_argument("--layer", required=True)
    p.add_argument("--method", choices=("tmfg", "quantile"), default="tmfg")
    p.add_argument("--transform", choices=("absolute", "signed"), default="absolute")
    p.add_argument("--edges", type=int, default=None,
                   help="edge count for quantile filtering (default 3N-6)")
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-inventory", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("persist", help="persistence curves from motif inventories")
    p.add_argument("--inventories", required=True)
    p.add_argument("--classes", default="edge,triangle")
    p.add_argument("--n-starts", type=int, required=True)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--out-curves", required=True)
    p.add_argument("--tau-plat", type=int, default=None)
    p.add_argument("--table-class", default="triangle")
    p.add_argument("--out-table", default=None)
    p.set_defaults(func=_cmd_persist)

    p = sub.add_parser("fit", help="two-regime power-law fit of exported curves")
    p.add_argument("--curves", required=True)
    p.add_argument("--min-segment", type=int, default=5)
    p.add_argument("--curve-id", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("analyze", help="ranked-motif analytics and portfolio test")
    p.add_argument("--returns", required=True)
    p.add_argument("--meta", default=None)
    p.add_argument("--table", required=True)
    p.add_argument("--layers", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("run", help="full pipeline from a JSON config")
    p.add_argument("--config", default=None)
    p.add_argument("--preset", choices=("desk",), default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        cause = exc.cause
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, ConfigError):
            return 1
        if isinstance(cause, DataError):
            return 2
        return 3
    except (NumericError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except PersistnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
