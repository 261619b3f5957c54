"""Factor-model price panels for demos and tests (no market data ships with the package)."""

from __future__ import annotations

from datetime import date, timedelta
from typing import Mapping

import numpy as np

from .marketdata import DEFAULT_REGIONS, AssetMeta, PricePanel, Region

# daily vol of the regional factor, loading on it, idiosyncratic vol
_REGION_PARAMS = {
    Region.BRAZIL: (0.015, 1.0, 0.015),
    Region.US: (0.010, 0.8, 0.012),
    Region.EUROPE: (0.008, 0.8, 0.010),
    Region.ASIA: (0.010, 0.7, 0.014),
}


def factor_panel(
    regions: Mapping[str, Region] = DEFAULT_REGIONS,
    n_days: int = 750,
    seed: int = 0,
    global_vol: float = 0.006,
    start: date = date(2015, 1, 2),
) -> PricePanel:
    """Simulate daily prices with a global factor plus one factor per region."""
    rng = np.random.default_rng(seed)
    tickers = sorted(regions)
    n = len(tickers)
    g = rng.normal(0.0, global_vol, n_days)
    factors = {r: rng.normal(0.0, p[0], n_days) for r, p in _REGION_PARAMS.items()}
    returns = np.empty((n_days, n))
    for i, t in enumerate(tickers):
        _, loading, idio = _REGION_PARAMS[Region(regions[t])]
        returns[:, i] = g + loading * factors[Region(regions[t])] + rng.normal(0.0, idio, n_days)
    p0 = rng.uniform(5.0, 200.0, n)
    prices = p0 * np.exp(np.vstack([np.zeros(n), np.cumsum(returns, axis=0)]))
    dates = tuple(start + timedelta(days=k) for k in range(n_days + 1))
    assets = tuple(AssetMeta(t, Region(regions[t]), float(prices[-1, i])) for i, t in enumerate(tickers))
    return PricePanel(dates, assets, prices)


def panel_to_csv(panel: PricePanel) -> bytes:
    lines = ["date," + ",".join(panel.tickers)]
    for d, row in zip(panel.dates, panel.prices):
        lines.append(d.isoformat() + "," + ",".join(repr(float(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("utf-8")
