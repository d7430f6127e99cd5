from __future__ import annotations

import math

import numpy as np
import pytest

from persistnet.errors import DataError
from persistnet.panel import (
    PricePanel,
    attach_metadata,
    compute_log_returns,
    load_metadata,
    load_prices,
)


def write_prices(path, dates, table):
    lines = ["date," + ",".join(table.keys())]
    for i, d in enumerate(dates):
        lines.append(d + "," + ",".join(str(col[i]) for col in table.values()))
    path.write_text("\n".join(lines) + "\n")


def test_load_nyse_shaped_panel(tmp_path):
    rng = np.random.default_rng(0)
    n_dates, n_assets = 1258, 100
    dates = [str(d) for d in np.datetime64("2014-01-03") + np.arange(n_dates)]
    table = {f"T{i:03d}": np.round(rng.uniform(10, 500, n_dates), 4) for i in range(n_assets)}
    path = tmp_path / "prices.csv"
    write_prices(path, dates, table)
    panel = load_prices(path)
    assert panel.n_dates == 1258
    assert panel.n_assets == 100
    assert panel.dropped_dates == 0


def test_minimal_two_date_panel(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,X\n2020-01-01,1.0\n2020-01-02,1.0\n")
    panel = load_prices(path)
    assert panel.n_dates == 2 and panel.assets == ("X",)


def test_zero_price_row_dropped(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text(
        "date,A,B\n2020-01-01,1.0,2.0\n2020-01-02,0.0,2.0\n2020-01-03,1.5,2.5\n"
    )
    panel = load_prices(path)
    assert panel.n_dates == 2
    assert panel.dropped_dates == 1


def test_unparseable_row_dropped_and_warned(tmp_path, caplog):
    path = tmp_path / "p.csv"
    path.write_text(
        "date,A\n2020-01-01,1.0\nnot-a-date,2.0\n2020-01-03,oops\n2020-01-04,3.0\n"
    )
    with caplog.at_level("WARNING"):
        panel = load_prices(path)
    assert panel.dropped_dates == 2
    assert panel.n_dates == 2
    assert any("dropped 2" in r.message for r in caplog.records)


def test_duplicate_tickers_rejected(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,A,A\n2020-01-01,1,2\n2020-01-02,2,3\n")
    with pytest.raises(DataError, match="duplicate"):
        load_prices(path)


def test_too_few_dates_rejected(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,A\n2020-01-01,1.0\n")
    with pytest.raises(DataError, match="fewer than 2"):
        load_prices(path)


def test_unreadable_file_rejected(tmp_path):
    with pytest.raises(DataError):
        load_prices(tmp_path / "missing.csv")


def test_log_returns_identity():
    e = math.e
    panel = PricePanel(("d1", "d2", "d3"), ("A",), np.array([[1.0, e, e]]))
    returns = compute_log_returns(panel)
    assert returns.n_dates == 2
    np.testing.assert_allclose(returns.returns, [[1.0, 0.0]], atol=1e-15)


def test_log_returns_constant_price():
    panel = PricePanel(("d1", "d2", "d3"), ("A",), np.array([[100.0, 100.0, 100.0]]))
    returns = compute_log_returns(panel)
    np.testing.assert_array_equal(returns.returns, [[0.0, 0.0]])


def test_log_returns_elementwise_oracle(rng):
    values = rng.uniform(5.0, 50.0, size=(4, 30))
    dates = tuple(f"2020-01-{i + 1:02d}" for i in range(30))
    panel = PricePanel(dates, ("A", "B", "C", "D"), values)
    returns = compute_log_returns(panel)
    for i in range(4):
        for t in range(29):
            expected = math.log(values[i, t + 1]) - math.log(values[i, t])
            assert returns.returns[i, t] == expected


def test_round_trip_prices(rng):
    values = rng.uniform(5.0, 50.0, size=(3, 40))
    dates = tuple(f"2020-02-{i + 1:02d}" for i in range(28)) + tuple(
        f"2020-03-{i + 1:02d}" for i in range(12)
    )
    panel = PricePanel(dates, ("A", "B", "C"), values)
    returns = compute_log_returns(panel)
    rebuilt = values[:, :1] * np.exp(np.cumsum(returns.returns, axis=1))
    np.testing.assert_allclose(rebuilt, values[:, 1:], rtol=1e-10)


def test_alignment_preserves_order(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("date,Z,A\n2020-01-01,1,2\n2020-01-02,2,3\n")
    panel = load_prices(path)
    assert panel.assets == ("Z", "A")


def test_panel_rejects_nonpositive_and_unordered():
    with pytest.raises(ValueError, match="positive"):
        PricePanel(("d1", "d2"), ("A",), np.array([[1.0, -2.0]]))
    with pytest.raises(ValueError, match="increasing"):
        PricePanel(("2020-01-02", "2020-01-01"), ("A",), np.array([[1.0, 2.0]]))


def test_attach_metadata_partial_coverage():
    returns = compute_log_returns(
        PricePanel(("d1", "d2"), ("A", "B", "C"), np.full((3, 2), 2.0))
    )
    tagged = attach_metadata(returns, {"A": "Tech", "B": "Oil"})
    assert tagged.sectors == ("Tech", "Oil", "UNKNOWN")


def test_attach_metadata_empty_and_full():
    returns = compute_log_returns(
        PricePanel(("d1", "d2"), ("A", "B"), np.full((2, 2), 3.0))
    )
    assert attach_metadata(returns, {}).sectors == ("UNKNOWN", "UNKNOWN")
    full = attach_metadata(returns, {"A": "S1", "B": "S2"})
    assert full.sectors == ("S1", "S2")


def test_load_metadata_duplicate_rejected(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("ticker,sector\nA,Tech\nA,Oil\n")
    with pytest.raises(DataError, match="duplicate"):
        load_metadata(path)


def test_load_metadata_ok(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("ticker,sector\nA,Tech\nB,Oil\n")
    assert load_metadata(path) == {"A": "Tech", "B": "Oil"}
