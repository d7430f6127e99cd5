"""Bundled synthetic market generator: a slowly drifting latent-position factor model.

Assets sit on a latent circle; smooth random factor fields (Fourier modes
with geometrically decaying amplitudes) give every pair a structural
correlation that falls off continuously with angular distance. That
continuum of pair strengths is what produces the smooth, power-law-like
persistence decays seen in real markets, rather than the sharp two-regime
exponential knee a plain block model yields.

On top of the field structure:

* positions diffuse slowly (per-asset random walk), so the dependency
  structure genuinely drifts on a multi-month horizon;
* one sector is a "macro cohort": its assets ride a slow, large mean wave
  (period longer than the correlation window) with reduced idiosyncratic
  and factor noise, so rolling means carry strong low-frequency
  co-movement, which is what separates surrogates that preserve rolling
  means from plain shuffling;
* sectors are contiguous arcs of the circle, so the strongest motifs are
  same-sector triples;
* optionally one "hot" sector is compressed into a tight cluster and given
  an extra common block factor, planting a high-correlation, high-volatility
  block whose motifs dominate persistence rankings (used by the portfolio
  analytics checks).

Prices are 100 * exp(cumulative returns), so log-returns recovered from the
panel reproduce the simulated returns exactly up to float round-trip.
"""

from __future__ import annotations

import numpy as np

from .panel import PricePanel

# fixed calendar origin for generated ISO dates (weekends skipped)
_EPOCH = np.datetime64("2014-01-03")


def trading_dates(n_dates: int) -> tuple[str, ...]:
    """Weekday (Mon-Fri) ISO dates starting at the fixed epoch."""
    days = np.arange(n_dates * 2 + 7)
    calendar = _EPOCH + days
    # the numpy datetime64 epoch (1970-01-01) was a Thursday (weekday 3)
    weekdays = calendar[((calendar.astype("datetime64[D]").view("int64") + 3) % 7) < 5]
    return tuple(str(d) for d in weekdays[:n_dates])


def synthetic_panel(
    n_assets: int = 30,
    n_dates: int = 460,
    n_sectors: int = 3,
    seed: int = 0,
    *,
    n_modes: int = 8,
    mode_decay: float = 1.0,
    structure_vol: float = 0.0065,
    market_vol: float = 0.003,
    idio_vol: float = 0.016,
    position_drift: float = 0.02,
    wave_amplitude: float = 0.05,
    wave_period: float = 504.0,
    wave_sector: int = -1,
    wave_background: float = 0.1,
    wave_phase_spread: float = 0.15,
    wave_idio_scale: float = 0.6,
    wave_structure_scale: float = 0.5,
    hot_sector: int | None = None,
    hot_compress: float = 0.25,
    hot_factor_vol: float = 0.022,
    hot_idio_scale: float = 1.0,
    start_price: float = 100.0,
) -> tuple[PricePanel, dict[str, str]]:
    """Generate a synthetic close-price panel plus its sector metadata.

    Tickers are ``A000``, ``A001``, ... and sectors ``SEC0``..``SEC{S-1}``,
    assigned as contiguous arcs of the latent circle. Deterministic under
    ``seed``.

    Parameters worth tuning: ``structure_vol`` vs ``idio_vol`` set how much
    of each return is shared structure; ``position_drift`` (radians per
    sqrt-day) sets how fast the structure drifts; ``wave_amplitude`` and
    ``wave_period`` shape the macro cohort's slow mean wave (``wave_sector``
    picks the cohort, negative meaning the last sector).
    """
    if n_assets < 1 or n_dates < 3:
        raise ValueError("need at least 1 asset and 3 dates")
    if not 1 <= n_sectors <= n_assets:
        raise ValueError("n_sectors must be in [1, n_assets]")
    if hot_sector is not None and not 0 <= hot_sector < n_sectors:
        raise ValueError(f"hot_sector must be in [0, {n_sectors})")
    if wave_sector < 0:
        wave_sector = n_sectors - 1
    if not 0 <= wave_sector < n_sectors:
        raise ValueError(f"wave_sector must be in [0, {n_sectors})")

    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 905]))
    n_returns = n_dates - 1

    sector_of = np.arange(n_assets) * n_sectors // n_assets
    theta0 = 2.0 * np.pi * (np.arange(n_assets) + rng.uniform(-0.2, 0.2, n_assets)) / n_assets
    idio = rng.uniform(0.85, 1.15, size=n_assets) * idio_vol
    structure_scale = np.ones(n_assets)
    cohort = sector_of == wave_sector
    idio[cohort] *= wave_idio_scale
    structure_scale[cohort] = wave_structure_scale
    if hot_sector is not None:
        hot = sector_of == hot_sector
        center = theta0[hot].mean()
        theta0[hot] = center + (theta0[hot] - center) * hot_compress
        idio[hot] *= hot_idio_scale

    # slowly diffusing latent positions
    steps = rng.normal(0.0, position_drift, size=(n_assets, n_returns))
    steps[:, 0] = 0.0
    theta = theta0[:, None] + np.cumsum(steps, axis=1)

    # smooth factor fields: mode amplitudes decay geometrically in frequency
    amp = np.arange(1, n_modes + 1, dtype=float) ** (-mode_decay)
    amp *= structure_vol / np.sqrt((amp**2).sum())
    cos_f = rng.normal(size=(n_modes, n_returns))
    sin_f = rng.normal(size=(n_modes, n_returns))
    structure = np.zeros((n_assets, n_returns))
    for m in range(n_modes):
        structure += amp[m] * (
            np.cos((m + 1) * theta) * cos_f[m][None, :]
            + np.sin((m + 1) * theta) * sin_f[m][None, :]
        )

    market = rng.normal(0.0, market_vol, size=n_returns)

    # macro cohort mean wave: a triangle wave slower than the correlation
    # window, so rolling means ride its ramps unattenuated and with constant
    # slope magnitude (no flat-top dead zones). Staggering per-asset phases
    # keeps within-window ramp slopes aligned (rolling means stay strongly
    # concordant) while decorrelating levels, so the wave inflates the
    # sample covariance far less than an in-phase wave would
    t = np.arange(n_returns, dtype=float)
    wave_gain = np.where(cohort, 1.0, wave_background)
    wave_phase = rng.uniform(0.0, wave_phase_spread, size=n_assets) + rng.uniform(0.0, 1.0)
    frac = np.mod(t[None, :] / wave_period + wave_phase[:, None], 1.0)
    triangle = np.where(frac < 0.5, 4.0 * frac - 1.0, 3.0 - 4.0 * frac)
    wave = (wave_amplitude * wave_gain)[:, None] * triangle

    returns = (
        wave
        + market[None, :]
        + structure * structure_scale[:, None]
        + rng.normal(size=(n_assets, n_returns)) * idio[:, None]
    )
    if hot_sector is not None:
        # block factor: lifts both the correlation and the volatility of the
        # hot sector, so its motif portfolio carries real systemic risk
        block = rng.normal(0.0, hot_factor_vol, size=n_returns)
        gains = rng.uniform(0.9, 1.1, size=n_assets) * hot
        returns += gains[:, None] * block[None, :]

    log_prices = np.log(start_price) + np.concatenate(
        [np.zeros((n_assets, 1)), np.cumsum(returns, axis=1)], axis=1
    )
    prices = np.exp(log_prices)

    assets = tuple(f"A{i:03d}" for i in range(n_assets))
    sectors = {assets[i]: f"SEC{sector_of[i]}" for i in range(n_assets)}
    panel = PricePanel(trading_dates(n_dates), assets, prices)
    return panel, sectors
