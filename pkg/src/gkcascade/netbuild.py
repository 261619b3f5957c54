"""Correlation and exposure networks, thresholding, clustering and random benchmarks."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InsufficientData, ZeroVariance
from .marketdata import AssetMeta, Region, ReturnPanel


class FilterMode(str, Enum):
    """Which matrix the threshold is compared against.

    ``exposure`` thresholds the raw exposures E_ij (price units);
    ``correlation`` keeps E_ij wherever rho_ij clears the threshold.
    """

    EXPOSURE = "exposure"
    CORRELATION = "correlation"


def correlation_matrix(returns: ReturnPanel) -> np.ndarray:
    r = returns.returns
    if r.shape[0] < 2:
        raise InsufficientData("correlation needs at least 2 returns per asset")
    centered = r - r.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    for i, t in enumerate(returns.tickers):
        if not ss[i] > 0:
            raise ZeroVariance(t)
    rho = (centered.T @ centered) / np.sqrt(np.outer(ss, ss))
    rho = np.clip((rho + rho.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(rho, 1.0)
    return rho


def volatilities(returns: ReturnPanel) -> np.ndarray:
    """Sample standard deviation (n-1) of each return column."""
    r = returns.returns
    if r.shape[0] < 2:
        raise InsufficientData("volatility needs at least 2 returns per asset")
    return r.std(axis=0, ddof=1)


def exposure_matrix(rho, sigma, final_prices) -> np.ndarray:
    """E_ij = rho_ij * sigma_i * P_i off the diagonal; rows scale by the source asset."""
    rho = np.asarray(rho, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    prices = np.asarray(final_prices, dtype=float)
    n = rho.shape[0]
    if rho.shape != (n, n) or sigma.shape != (n,) or prices.shape != (n,):
        raise DimensionMismatch(
            f"rho {rho.shape}, sigma {sigma.shape}, prices {prices.shape} do not agree"
        )
    if np.any(prices <= 0):
        raise ValueError("final prices must be positive")
    e = rho * (sigma * prices)[:, None]
    np.fill_diagonal(e, 0.0)
    return e


def apply_threshold(matrix, theta: float) -> np.ndarray:
    """Keep entries >= theta, zero everything else including the diagonal.

    Negative entries never survive (theta >= 0); absolute values are not taken.
    """
    if theta < 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {m.shape}")
    out = np.where(m >= theta, m, 0.0)
    np.fill_diagonal(out, 0.0)
    return out


@dataclass(frozen=True, eq=False)
class ExposureNetwork:
    """Thresholded, possibly asymmetric weight matrix over a fixed ticker order."""

    exposures: np.ndarray
    theta: float
    mode: FilterMode
    tickers: tuple[str, ...]

    def __post_init__(self):
        e = np.array(self.exposures, dtype=float)
        n = len(self.tickers)
        if e.shape != (n, n):
            raise DimensionMismatch(f"exposures {e.shape} vs {n} tickers")
        if np.any(np.diag(e) != 0):
            raise ValueError("self-exposure must be zero")
        e.setflags(write=False)
        object.__setattr__(self, "exposures", e)
        object.__setattr__(self, "mode", FilterMode(self.mode))

    @property
    def adjacency(self) -> np.ndarray:
        return self.exposures > 0

    @property
    def n(self) -> int:
        return len(self.tickers)


def build_network(
    returns: ReturnPanel,
    theta: float,
    mode: FilterMode | str,
    final_prices=None,
) -> ExposureNetwork:
    """Exposure network filtered in the given mode."""
    mode = FilterMode(mode)
    rho = correlation_matrix(returns)
    sigma = volatilities(returns)
    if final_prices is None:
        final_prices = [a.final_price for a in returns.assets]
    e = exposure_matrix(rho, sigma, final_prices)
    if mode is FilterMode.EXPOSURE:
        filtered = apply_threshold(e, theta)
    else:
        keep = apply_threshold(rho, theta) > 0
        filtered = np.where(keep & (e > 0), e, 0.0)
    return ExposureNetwork(filtered, theta, mode, tuple(returns.tickers))


@dataclass(frozen=True)
class NodeMetrics:
    clustering: np.ndarray
    degree: np.ndarray
    triangles: np.ndarray


def clustering_coefficients(adjacency, symmetrize: bool = True) -> NodeMetrics:
    """Local clustering C_i = 2 T_i / (k_i (k_i - 1)); zero when k_i < 2.

    With ``symmetrize`` a directed adjacency becomes undirected (edge if either
    direction exists). Without it the input must already be symmetric.
    """
    a = np.asarray(adjacency) != 0
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square adjacency, got {a.shape}")
    if np.any(np.diag(a)):
        raise ValueError("adjacency must have a zero diagonal")
    if symmetrize:
        a = a | a.T
    elif not np.array_equal(a, a.T):
        raise ValueError("asymmetric adjacency; pass symmetrize=True")
    ai = a.astype(np.int64)
    degree = ai.sum(axis=1)
    triangles = np.einsum("ij,jk,ki->i", ai, ai, ai) // 2
    pairs = degree * (degree - 1)
    clustering = np.zeros(len(degree))
    ok = degree >= 2
    clustering[ok] = 2.0 * triangles[ok] / pairs[ok]
    return NodeMetrics(clustering, degree, triangles)


def erdos_renyi(n: int, p: float, seed: int) -> np.ndarray:
    """Undirected G(n, p) adjacency with a zero diagonal, reproducible per seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    iu, ju = np.triu_indices(n, k=1)
    present = rng.random(iu.size) < p
    adj = np.zeros((n, n), dtype=bool)
    adj[iu[present], ju[present]] = True
    return adj | adj.T


def group_degree_stats(adjacency, assets: Sequence[AssetMeta]) -> dict[Region, float]:
    """Mean undirected degree per region, for regions present in ``assets``."""
    a = np.asarray(adjacency) != 0
    if a.shape != (len(assets), len(assets)):
        raise DimensionMismatch(f"adjacency {a.shape} vs {len(assets)} assets")
    degree = (a | a.T).sum(axis=1)
    out: dict[Region, float] = {}
    for region in Region:
        idx = [i for i, m in enumerate(assets) if m.region is region]
        if idx:
            out[region] = float(degree[idx].mean())
    return out
