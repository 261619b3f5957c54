"""Historical VaR and CVaR from the empirical return distribution.

Both are reported as return levels (negative for losses), not loss magnitudes.
The quantile is the lower order statistic at index floor((1 - alpha) * n),
without interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySample, InvalidAlpha
from .marketdata import ReturnPanel


def _prepare(returns, alpha: float) -> np.ndarray:
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    r = np.asarray(returns, dtype=float).ravel()
    if r.size == 0:
        raise EmptySample("cannot compute a quantile of an empty sample")
    return r


def _var_index(n: int, alpha: float) -> int:
    return min(max(math.floor((1.0 - alpha) * n), 0), n - 1)


def empirical_var(returns, alpha: float = 0.95) -> float:
    r = _prepare(returns, alpha)
    k = _var_index(r.size, alpha)
    return float(np.partition(r, k)[k])


def empirical_cvar(returns, alpha: float = 0.95) -> float:
    """Mean of every observation at or below the empirical VaR."""
    r = _prepare(returns, alpha)
    var = empirical_var(r, alpha)
    tail = r[r <= var]
    # var + mean(deviation) with deviations <= 0 keeps cvar <= var exactly in floating point
    return var + math.fsum((tail - var).tolist()) / tail.size


@dataclass(frozen=True)
class AssetRisk:
    var: float
    cvar: float


@dataclass(frozen=True)
class RiskReport:
    alpha: float
    per_asset: dict[str, AssetRisk]

    def rows(self):
        return [(t, r.var, r.cvar) for t, r in self.per_asset.items()]


def risk_report(returns: ReturnPanel, alpha: float = 0.95) -> RiskReport:
    out = {}
    for i, t in enumerate(returns.tickers):
        col = returns.returns[:, i]
        out[t] = AssetRisk(empirical_var(col, alpha), empirical_cvar(col, alpha))
    return RiskReport(alpha, out)
