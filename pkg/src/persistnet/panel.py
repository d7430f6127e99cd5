"""Price panel ingestion: loading, cleaning, log-returns, sector metadata.

Input format is a wide CSV with header ``date,<ticker1>,<ticker2>,...`` and
ISO-8601 dates; sector metadata is a two-column CSV ``ticker,sector``.
Dates with any missing, unparseable, or non-positive price are dropped whole
so the panel stays cross-sectionally aligned, and the drop count is kept on
the panel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np
import pandas as pd

from .errors import DataError

logger = logging.getLogger(__name__)

UNKNOWN_SECTOR = "UNKNOWN"


@dataclass(frozen=True)
class PricePanel:
    """Aligned panel of strictly positive daily close prices.

    ``values`` has shape (n_assets, n_dates); ``dates`` are ISO-8601 strings
    in strictly increasing order. ``dropped_dates`` records how many input
    rows were removed during cleaning.
    """

    dates: tuple[str, ...]
    assets: tuple[str, ...]
    values: np.ndarray
    dropped_dates: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        if values.shape != (len(self.assets), len(self.dates)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.assets)} assets x {len(self.dates)} dates"
            )
        if len(set(self.assets)) != len(self.assets):
            raise ValueError("asset ids must be unique")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing (ISO-8601)")
        if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
            raise ValueError("prices must be finite and strictly positive")

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def n_dates(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnMatrix:
    """Panel of daily log-returns, shape (n_assets, n_dates).

    ``sectors`` is an optional per-asset sector label tuple aligned with
    ``assets``; it is attached by :func:`attach_metadata`.
    """

    dates: tuple[str, ...]
    assets: tuple[str, ...]
    returns: np.ndarray
    sectors: tuple[str, ...] | None = None

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        if returns.shape != (len(self.assets), len(self.dates)):
            raise ValueError(
                f"returns shape {returns.shape} does not match "
                f"{len(self.assets)} assets x {len(self.dates)} dates"
            )
        if len(set(self.assets)) != len(self.assets):
            raise ValueError("asset ids must be unique")
        if not np.all(np.isfinite(returns)):
            raise ValueError("returns must be finite")
        if self.sectors is not None:
            sectors = tuple(self.sectors)
            object.__setattr__(self, "sectors", sectors)
            if len(sectors) != len(self.assets):
                raise ValueError("sectors must align with assets")

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def n_dates(self) -> int:
        return len(self.dates)


def load_prices(path) -> PricePanel:
    """Load and clean a wide price CSV into a validated :class:`PricePanel`.

    Rows whose date cannot be parsed, or that contain any missing,
    unparseable, or non-positive price, are dropped and counted; a warning
    is logged when anything was dropped.

    Raises
    ------
    DataError
        If the file is unreadable, tickers are duplicated, or fewer than two
        dates survive cleaning.
    """
    try:
        with open(path, newline="") as handle:
            header = handle.readline()
        frame = pd.read_csv(path, dtype=str)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read price CSV {path!r}: {exc}") from exc
    if frame.shape[1] < 2:
        raise DataError(f"price CSV {path!r} needs a date column plus at least one ticker")

    # pandas mangles duplicate column names, so check the raw header
    tickers = [t.strip() for t in header.rstrip("\n").split(",")[1:]]
    if len(set(tickers)) != len(tickers):
        dupes = sorted({t for t in tickers if tickers.count(t) > 1})
        raise DataError(f"duplicate tickers in {path!r}: {dupes}")

    dates = pd.to_datetime(frame.iloc[:, 0], format="ISO8601", errors="coerce")
    values = frame.iloc[:, 1:].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)

    good = dates.notna().to_numpy() & np.all(np.isfinite(values) & (values > 0.0), axis=1)
    dropped = int((~good).sum())
    if dropped:
        logger.warning("load_prices: dropped %d of %d rows during cleaning", dropped, len(good))

    kept_dates = [d.date().isoformat() for d in dates[good]]
    kept_values = values[good].T  # (assets, dates)
    if len(kept_dates) < 2:
        raise DataError(f"fewer than 2 usable dates in {path!r} after cleaning")
    try:
        return PricePanel(tuple(kept_dates), tuple(tickers), kept_values, dropped_dates=dropped)
    except ValueError as exc:
        raise DataError(f"invalid price panel in {path!r}: {exc}") from exc


def compute_log_returns(panel: PricePanel) -> ReturnMatrix:
    """Exact per-asset log-differences of consecutive prices.

    The result has one fewer date than the panel: ``returns[:, t]`` is the
    return realised on ``panel.dates[t + 1]``.
    """
    if panel.n_dates < 2:
        raise ValueError("panel needs at least 2 dates to compute returns")
    logp = np.log(panel.values)
    returns = logp[:, 1:] - logp[:, :-1]
    return ReturnMatrix(panel.dates[1:], panel.assets, returns)


def load_metadata(path) -> dict[str, str]:
    """Load a ``ticker,sector`` CSV into a mapping; duplicate tickers are an error."""
    try:
        frame = pd.read_csv(path, dtype=str)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read metadata CSV {path!r}: {exc}") from exc
    if frame.shape[1] < 2:
        raise DataError(f"metadata CSV {path!r} needs 'ticker,sector' columns")
    meta: dict[str, str] = {}
    for ticker, sector in zip(frame.iloc[:, 0], frame.iloc[:, 1]):
        ticker = str(ticker)
        if ticker in meta:
            raise DataError(f"duplicate metadata rows for asset {ticker!r}")
        meta[ticker] = UNKNOWN_SECTOR if pd.isna(sector) else str(sector)
    return meta


def attach_metadata(returns: ReturnMatrix, meta: Mapping[str, str]) -> ReturnMatrix:
    """Return a copy of ``returns`` with per-asset sector labels attached.

    Assets without a metadata entry get sector ``UNKNOWN``.
    """
    sectors = tuple(meta.get(asset, UNKNOWN_SECTOR) for asset in returns.assets)
    return replace(returns, sectors=sectors)
