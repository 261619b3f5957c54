"""Price panel ingestion, log returns, normalized prices and descriptive statistics."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import BinaryIO, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateDate,
    EmptyPanel,
    InsufficientData,
    MalformedHeader,
    MalformedRow,
    UnknownTicker,
)


class Region(str, Enum):
    BRAZIL = "Brazil"
    US = "US"
    EUROPE = "Europe"
    ASIA = "Asia"


# Universe used in the original study; the CLI falls back to it when no
# region file is given.
DEFAULT_REGIONS: dict[str, Region] = {
    **{t: Region.BRAZIL for t in (
        "GOLL4.SA", "ABEV3.SA", "AMER3.SA", "BBAS3.SA", "BBDC4.SA",
        "BOVA11.SA", "BRFS3.SA", "CSNA3.SA", "ITUB4.SA", "MGLU3.SA",
        "PETR4.SA", "VALE3.SA", "WEGE3.SA",
    )},
    "AAPL": Region.US,
    "AMZN": Region.US,
    "JPM": Region.US,
    "SAP": Region.EUROPE,
    "NSRGY": Region.EUROPE,
    "BABA": Region.ASIA,
    "TM": Region.ASIA,
}


@dataclass(frozen=True)
class AssetMeta:
    ticker: str
    region: Region
    final_price: float

    def __post_init__(self):
        if not self.ticker:
            raise ValueError("ticker must be non-empty")
        if not self.final_price > 0:
            raise ValueError(f"final_price must be positive for {self.ticker}")


@dataclass(frozen=True, eq=False)
class PricePanel:
    dates: tuple[date, ...]
    assets: tuple[AssetMeta, ...]
    prices: np.ndarray  # dates x assets

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape != (len(self.dates), len(self.assets)):
            raise ValueError("prices shape does not match dates x assets")
        if len(self.dates) < 2:
            raise EmptyPanel("a price panel needs at least 2 dates")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise ValueError("prices must be finite and strictly positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        tickers = self.tickers
        if len(set(tickers)) != len(tickers):
            raise ValueError("tickers must be unique")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)

    @property
    def tickers(self) -> list[str]:
        return [a.ticker for a in self.assets]

    @property
    def final_prices(self) -> np.ndarray:
        return np.array([a.final_price for a in self.assets])


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    dates: tuple[date, ...]
    assets: tuple[AssetMeta, ...]
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        if returns.shape != (len(self.dates), len(self.assets)):
            raise ValueError("returns shape does not match dates x assets")
        if not np.all(np.isfinite(returns)):
            raise ValueError("returns must be finite")
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)

    @property
    def tickers(self) -> list[str]:
        return [a.ticker for a in self.assets]

    def column(self, ticker: str) -> np.ndarray:
        try:
            return self.returns[:, self.tickers.index(ticker)]
        except ValueError:
            raise UnknownTicker(ticker) from None


@dataclass(frozen=True)
class AssetStats:
    mean: float
    std_dev: float
    min: float
    max: float


DescriptiveStats = dict[str, AssetStats]


def load_region_map(source) -> dict[str, Region]:
    """Read a JSON object mapping ticker -> region name."""
    if hasattr(source, "read"):
        raw = json.load(source)
    else:
        with open(source, encoding="utf-8") as fh:
            raw = json.load(fh)
    if not isinstance(raw, dict):
        raise MalformedHeader("region mapping must be a JSON object")
    out = {}
    for ticker, name in raw.items():
        try:
            out[ticker] = Region(name)
        except ValueError:
            raise MalformedRow(f"unknown region {name!r} for {ticker!r}") from None
    return out


def _parse_price(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    if not math.isfinite(value) or value <= 0:
        return None
    return value


def load_prices(csv_source: BinaryIO | bytes | str, regions: Mapping[str, Region | str]) -> PricePanel:
    """Load a `date,TICKER1,...` CSV into a cleaned PricePanel.

    Any row with a missing, unparseable or non-positive price is dropped
    entirely (listwise deletion). Surviving rows are sorted by date.
    """
    if isinstance(csv_source, (bytes, bytearray)):
        text = csv_source.decode("utf-8-sig")
    elif isinstance(csv_source, str):
        with open(csv_source, "rb") as fh:
            text = fh.read().decode("utf-8-sig")
    else:
        text = csv_source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8-sig")

    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0].strip().lower() != "date" or len(header) < 2:
        raise MalformedHeader("expected header 'date,<ticker1>,<ticker2>,...'")
    tickers = [h.strip() for h in header[1:]]
    if any(not t for t in tickers) or len(set(tickers)) != len(tickers):
        raise MalformedHeader("tickers must be non-empty and unique")
    for t in tickers:
        if t not in regions:
            raise UnknownTicker(t)

    seen: set[date] = set()
    kept: list[tuple[date, list[float]]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            day = date.fromisoformat(row[0].strip())
        except ValueError:
            raise MalformedRow(f"line {lineno}: cannot parse date {row[0]!r}") from None
        if day in seen:
            raise DuplicateDate(f"line {lineno}: duplicate date {day.isoformat()}")
        seen.add(day)
        cells = row[1:]
        if len(cells) != len(tickers):
            continue
        values = [_parse_price(c) for c in cells]
        if any(v is None for v in values):
            continue
        kept.append((day, values))

    if len(kept) < 2:
        raise EmptyPanel(f"only {len(kept)} usable rows after cleaning; need at least 2")
    kept.sort(key=lambda item: item[0])
    prices = np.array([v for _, v in kept], dtype=float)
    assets = tuple(
        AssetMeta(t, Region(regions[t]), float(prices[-1, i])) for i, t in enumerate(tickers)
    )
    return PricePanel(tuple(d for d, _ in kept), assets, prices)


def compute_log_returns(panel: PricePanel) -> ReturnPanel:
    returns = np.log(panel.prices[1:] / panel.prices[:-1])
    return ReturnPanel(panel.dates[1:], panel.assets, returns)


def normalize_prices(panel: PricePanel) -> np.ndarray:
    """Each column divided by its first observation."""
    return panel.prices / panel.prices[0]


def descriptive_stats(returns: ReturnPanel) -> DescriptiveStats:
    r = returns.returns
    if r.shape[0] < 2:
        raise InsufficientData("descriptive statistics need at least 2 returns per asset")
    mean = r.mean(axis=0)
    std = r.std(axis=0, ddof=1)
    lo = r.min(axis=0)
    hi = r.max(axis=0)
    out = {}
    for i, t in enumerate(returns.tickers):
        # mean of a near-constant column can drift an ulp outside [min, max]
        m = float(min(max(mean[i], lo[i]), hi[i]))
        out[t] = AssetStats(m, float(std[i]), float(lo[i]), float(hi[i]))
    return out


def panel_from_arrays(
    prices: Sequence[Sequence[float]] | np.ndarray,
    tickers: Sequence[str],
    regions: Mapping[str, Region | str] | None = None,
    start: date = date(2015, 1, 1),
) -> PricePanel:
    """Build a panel from an in-memory matrix, with consecutive ordinal dates."""
    prices = np.asarray(prices, dtype=float)
    regions = regions or {}
    dates = tuple(date.fromordinal(start.toordinal() + k) for k in range(prices.shape[0]))
    assets = tuple(
        AssetMeta(t, Region(regions.get(t, Region.BRAZIL)), float(prices[-1, i]))
        for i, t in enumerate(tickers)
    )
    return PricePanel(dates, assets, prices)
