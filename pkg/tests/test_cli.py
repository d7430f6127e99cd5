from __future__ import annotations

import json
from pathlib import Path

import pytest

from persistnet.cli import main
from persistnet.pipeline import RunConfig, run


def invoke(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Synthetic prices + returns shared by the stage tests."""
    root = tmp_path_factory.mktemp("cli")
    assert invoke("synth", "--out-dir", root, "--n-assets", 10, "--n-dates", 120,
                  "--n-sectors", 2, "--seed", 11) == 0
    assert invoke("ingest", "--prices", root / "prices.csv", "--meta", root / "metadata.csv",
                  "--out", root / "returns.csv") == 0
    return root


class TestStageChain:
    def test_simulate(self, workspace):
        out = workspace / "surrogates"
        assert invoke("simulate", "--returns", workspace / "returns.csv",
                      "--kind", "shuffle", "--realisations", 2, "--seed", 3,
                      "--window", 30, "--out-dir", out) == 0
        assert (out / "member_000.csv").exists() and (out / "member_001.csv").exists()

    def test_correlate_filter_persist_fit(self, workspace):
        layers = workspace / "layers"
        assert invoke("correlate", "--returns", workspace / "returns.csv",
                      "--window", 30, "--theta", 12, "--start", 29, "--count", 20,
                      "--out-dir", layers) == 0
        layer_files = sorted(layers.glob("layer_*.csv"))
        assert len(layer_files) == 20

        inv_dir = workspace / "inventories"
        inv_dir.mkdir()
        for i, layer in enumerate(layer_files):
            assert invoke("filter", "--layer", layer, "--method", "tmfg",
                          "--out-edges", inv_dir / f"edges_{i:05d}.csv",
                          "--out-inventory", inv_dir / f"inventory_{i:05d}.csv") == 0
        edges = (inv_dir / "edges_00000.csv").read_text().splitlines()
        assert edges[0] == "u,v,weight"
        assert len(edges) == 1 + 3 * 10 - 6

        curves = workspace / "curves.csv"
        table = workspace / "table.csv"
        assert invoke("persist", "--inventories", inv_dir,
                      "--classes", "edge,triangle", "--n-starts", 5, "--max-lag", 15,
                      "--out-curves", curves,
                      "--tau-plat", 5, "--table-class", "triangle", "--out-table", table) == 0
        assert curves.exists() and table.exists()

        fits = workspace / "fits.csv"
        assert invoke("fit", "--curves", curves, "--min-segment", 3, "--out", fits) == 0
        header = fits.read_text().splitlines()[0]
        assert header.startswith("curve_id,class,alpha1")

    def test_analyze(self, workspace):
        out = workspace / "analytics"
        assert invoke("analyze", "--returns", workspace / "returns.csv",
                      "--meta", workspace / "metadata.csv",
                      "--table", workspace / "table.csv",
                      "--layers", workspace / "layers",
                      "--k", 3, "--n-samples", 200, "--seed", 1, "--split", 0.75,
                      "--out-dir", out) == 0
        report = json.loads((out / "report.json").read_text())
        assert "portfolio" in report and "sector_purity" in report


class TestExitCodes:
    def test_config_error_is_1(self):
        assert invoke("run") == 1
        assert invoke("nonsense-command") == 1
        assert invoke("persist", "--inventories", "x", "--n-starts", 2,
                      "--max-lag", 2, "--out-curves", "c.csv",
                      "--classes", "dodecahedron") == 1

    def test_data_error_is_2(self, tmp_path):
        assert invoke("ingest", "--prices", tmp_path / "missing.csv",
                      "--out", tmp_path / "r.csv") == 2

    def test_numeric_error_is_3(self, tmp_path):
        short = tmp_path / "short.csv"
        short.write_text("date,A,B\nd0,0.1,0.2\nd1,0.2,0.1\nd2,0.0,0.3\n")
        # window longer than the series is a numeric-stage failure
        assert invoke("correlate", "--returns", short, "--window", 30,
                      "--out-dir", tmp_path / "layers") == 3

    def test_run_config_error_via_stage(self, tmp_path):
        config = {
            "output_dir": str(tmp_path / "out"),
            "synthetic": {"n_assets": 50, "n_dates": 100, "n_sectors": 3, "seed": 0},
            "window": 40, "n_starts": 5, "max_lag": 10,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config))
        assert invoke("run", "--config", path) == 1


class TestComposition:
    def test_stage_chain_matches_run_bit_exactly(self, tmp_path):
        out = tmp_path / "run_out"
        config = RunConfig(
            output_dir=str(out),
            synthetic={"n_assets": 10, "n_dates": 150, "n_sectors": 2, "seed": 21},
            window=30, theta=12.0, n_starts=6, max_lag=24,
            realisations=1, master_seed=21, workers=1,
            run_analytics=False, split_fraction=1.0,
            null_models=[{"kind": "shuffle", "window": 30, "realisations": 1, "seed": 21}],
        )
        run(config)

        chain = tmp_path / "chain"
        chain.mkdir()
        assert invoke("ingest", "--prices", out / "input" / "prices.csv",
                      "--out", chain / "returns.csv") == 0
        assert invoke("correlate", "--returns", chain / "returns.csv",
                      "--window", 30, "--theta", 12.0, "--start", 29, "--count", 30,
                      "--out-dir", chain / "layers") == 0
        inv = chain / "inv"
        inv.mkdir()
        for i, layer in enumerate(sorted((chain / "layers").glob("layer_*.csv"))):
            assert invoke("filter", "--layer", layer, "--method", "tmfg",
                          "--out-edges", inv / f"edges_{i:05d}.csv",
                          "--out-inventory", inv / f"inventory_{i:05d}.csv") == 0
        assert invoke("persist", "--inventories", inv,
                      "--classes", "edge,triangle,separator,face_triangle,tetrahedron",
                      "--n-starts", 6, "--max-lag", 24,
                      "--out-curves", chain / "curves.csv") == 0

        run_curves = (out / "sources" / "real" / "curves_tmfg.csv").read_bytes()
        chain_curves = (chain / "curves.csv").read_bytes()
        assert chain_curves == run_curves

        assert invoke("fit", "--curves", chain / "curves.csv", "--min-segment", 5,
                      "--curve-id", "real/tmfg", "--out", chain / "fits.csv") == 0
        run_rows = {
            line.split(",")[0]: line
            for line in (out / "sources" / "real" / "fits.csv").read_text().splitlines()[1:]
            if line.split(",")[0].startswith("real/tmfg/")
        }
        chain_rows = {
            line.split(",")[0]: line
            for line in (chain / "fits.csv").read_text().splitlines()[1:]
        }
        assert run_rows == chain_rows
