"""Monte Carlo default cascades on an exposure network.

Each asset starts with capital K = 0.2 P and fails once K < K_min = 0.1 P.
A shock debits s * P from the targeted assets. Every defaulted asset i then
transmits, exactly once, a loss L_ij = max(0, E_ij - (K_i - D_i)) to each
neighbour j with E_ij > 0, where D_i is the column sum of the exposure
matrix. Propagation runs in synchronous passes until no new default appears.

Reproducibility: simulation ``k`` draws from its own PCG64 stream seeded with
``splitmix64(master_seed ^ (k * SIM_STREAM_MULTIPLIER mod 2**64))``. Within a
simulation the target is drawn first (General mode: ``rng.integers(0, n)``),
then the magnitude (``rng.uniform(lo, hi)``). Results are reduced in
simulation order, so any worker count gives identical reports.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, UnknownTicker
from .marketdata import AssetMeta, Region
from .netbuild import ExposureNetwork, FilterMode, erdos_renyi

MASK64 = 0xFFFFFFFFFFFFFFFF
SIM_STREAM_MULTIPLIER = 0xD1B54A32D192ED03

INITIAL_CAPITAL_RATIO = 0.2
MIN_CAPITAL_RATIO = 0.1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def simulation_seed(master_seed: int, sim_index: int) -> int:
    mixed = (int(master_seed) & MASK64) ^ ((int(sim_index) * SIM_STREAM_MULTIPLIER) & MASK64)
    return splitmix64(mixed)


def simulation_rng(master_seed: int, sim_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(simulation_seed(master_seed, sim_index)))


# --- scenarios ---------------------------------------------------------------


class ShockMode(str, Enum):
    GENERAL = "general"
    SINGLE = "single"
    SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class UniformShock:
    lo: float = 0.1
    hi: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.lo <= self.hi < 1.0:
            raise ValueError(f"uniform shock needs 0 < lo <= hi < 1, got ({self.lo}, {self.hi})")

    def draw(self, rng: np.random.Generator) -> float:
        if self.lo == self.hi:
            return self.lo
        return float(rng.uniform(self.lo, self.hi))

    def label(self) -> str:
        return f"uniform:{self.lo:g}:{self.hi:g}"


@dataclass(frozen=True)
class FixedShock:
    s: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"fixed shock must lie in (0, 1), got {self.s}")

    def draw(self, rng: np.random.Generator) -> float:
        return self.s

    def label(self) -> str:
        return f"fixed:{self.s:g}"


def parse_magnitude(text: str) -> UniformShock | FixedShock:
    """``uniform``, ``uniform:LO:HI`` or ``fixed:S``."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "uniform" and len(parts) in (1, 3):
            return UniformShock() if len(parts) == 1 else UniformShock(float(parts[1]), float(parts[2]))
        if kind == "fixed" and len(parts) == 2:
            return FixedShock(float(parts[1]))
    except ValueError as exc:
        raise ValueError(f"bad shock magnitude {text!r}: {exc}") from None
    raise ValueError(f"bad shock magnitude {text!r}; use uniform[:lo:hi] or fixed:s")


@dataclass(frozen=True)
class ShockScenario:
    mode: ShockMode
    targets: tuple[str, ...] = ()
    magnitude: UniformShock | FixedShock = field(default_factory=UniformShock)

    def __post_init__(self):
        object.__setattr__(self, "mode", ShockMode(self.mode))
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.mode is ShockMode.GENERAL and self.targets:
            raise ValueError("general scenario takes no targets")
        if self.mode is ShockMode.SINGLE and len(self.targets) != 1:
            raise ValueError("single scenario takes exactly one target")
        if self.mode is ShockMode.SIMULTANEOUS and not self.targets:
            raise ValueError("simultaneous scenario needs at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate shock targets")

    @classmethod
    def parse(cls, text: str, magnitude: UniformShock | FixedShock | None = None) -> "ShockScenario":
        """``general``, ``single:TICKER`` or ``simultaneous:T1+T2[+...]``."""
        mode, _, rest = text.strip().partition(":")
        try:
            mode = ShockMode(mode.lower())
        except ValueError:
            raise ValueError(f"unknown scenario {text!r}") from None
        targets = tuple(t for t in rest.split("+") if t) if rest else ()
        return cls(mode, targets, magnitude or UniformShock())

    @property
    def label(self) -> str:
        if self.mode is ShockMode.GENERAL:
            return "General Simulation"
        if self.mode is ShockMode.SINGLE:
            return f"Single Shock ({self.targets[0]})"
        return f"Simultaneous Shock ({' + '.join(self.targets)})"

    @property
    def key(self) -> str:
        if self.mode is ShockMode.GENERAL:
            return "general"
        return f"{self.mode.value}:{'+'.join(self.targets)}"


@dataclass(frozen=True)
class McConfig:
    n_simulations: int = 1000
    theta: float | None = None
    filter_mode: FilterMode | None = None
    systemic_cutoff: int = 5
    master_seed: int = 0
    # D_i excludes exposures held by already-defaulted assets
    dynamic_liabilities: bool = False
    # clamp each transmitted loss at the edge exposure E_ij
    cap_losses: bool = False

    def __post_init__(self):
        if self.n_simulations < 1:
            raise ValueError("n_simulations must be at least 1")
        if self.systemic_cutoff < 0:
            raise ValueError("systemic_cutoff must be non-negative")
        if self.filter_mode is not None:
            object.__setattr__(self, "filter_mode", FilterMode(self.filter_mode))


# --- capital dynamics ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CapitalState:
    prices: np.ndarray
    capital: np.ndarray
    k_min: np.ndarray
    liabilities: np.ndarray
    defaulted: np.ndarray
    transmitted: np.ndarray
    losses: np.ndarray  # cumulative loss carried along each edge i -> j

    @property
    def n_failed(self) -> int:
        return int(self.defaulted.sum())


def init_capital(final_prices, exposures) -> CapitalState:
    p = np.asarray(final_prices, dtype=float)
    e = np.asarray(exposures, dtype=float)
    n = p.size
    if e.shape != (n, n):
        raise DimensionMismatch(f"{n} prices vs exposures {e.shape}")
    if np.any(p <= 0):
        raise ValueError("final prices must be positive")
    return CapitalState(
        prices=p,
        capital=INITIAL_CAPITAL_RATIO * p,
        k_min=MIN_CAPITAL_RATIO * p,
        liabilities=e.sum(axis=0),
        defaulted=np.zeros(n, dtype=bool),
        transmitted=np.zeros(n, dtype=bool),
        losses=np.zeros((n, n)),
    )


def apply_shock(state: CapitalState, targets, s: float) -> CapitalState:
    """Debit s * P from each target; flag those that fall below K_min."""
    idx = np.asarray(targets, dtype=int)
    capital = state.capital.copy()
    capital[idx] -= s * state.prices[idx]
    defaulted = state.defaulted | (capital < state.k_min)
    return dataclasses.replace(state, capital=capital, defaulted=defaulted)


def propagate_losses(
    state: CapitalState,
    exposures,
    dynamic_liabilities: bool = False,
    cap_losses: bool = False,
) -> CapitalState:
    e = np.asarray(exposures, dtype=float)
    edges = e > 0
    capital = state.capital.copy()
    defaulted = state.defaulted.copy()
    transmitted = state.transmitted.copy()
    losses = state.losses.copy()

    pending = defaulted & ~transmitted
    while pending.any():
        idx = np.flatnonzero(pending)
        if dynamic_liabilities:
            liabilities = np.where(defaulted[:, None], 0.0, e).sum(axis=0)
        else:
            liabilities = state.liabilities
        buffer = capital[idx] - liabilities[idx]
        rows = e[idx]
        loss = np.where(edges[idx], np.maximum(0.0, rows - buffer[:, None]), 0.0)
        if cap_losses:
            loss = np.minimum(loss, np.where(edges[idx], rows, 0.0))
        losses[idx] += loss
        capital -= loss.sum(axis=0)
        transmitted[idx] = True
        defaulted |= capital < state.k_min
        pending = defaulted & ~transmitted

    return dataclasses.replace(
        state, capital=capital, defaulted=defaulted, transmitted=transmitted, losses=losses
    )


# --- simulation ------------------------------------------------------------------


def resolve_targets(scenario: ShockScenario, tickers: Sequence[str]) -> np.ndarray:
    index = {t: i for i, t in enumerate(tickers)}
    out = []
    for t in scenario.targets:
        if t not in index:
            raise UnknownTicker(t)
        out.append(index[t])
    return np.array(out, dtype=int)


def draw_shock(scenario: ShockScenario, n_assets: int, fixed_targets, rng) -> tuple[np.ndarray, float]:
    """Target first (General draws one asset uniformly), then the magnitude."""
    if scenario.mode is ShockMode.GENERAL:
        targets = np.array([rng.integers(0, n_assets)], dtype=int)
    else:
        targets = fixed_targets
    return targets, scenario.magnitude.draw(rng)


@dataclass(frozen=True)
class SimulationOutcome:
    sim_index: int
    failed: np.ndarray
    targets: tuple[int, ...]
    magnitude: float

    @property
    def n_failed(self) -> int:
        return int(self.failed.sum())


def run_simulation(
    network: ExposureNetwork,
    final_prices,
    config: McConfig,
    scenario: ShockScenario,
    sim_index: int,
    _base: CapitalState | None = None,
    _targets=None,
) -> SimulationOutcome:
    base = _base if _base is not None else init_capital(final_prices, network.exposures)
    fixed = _targets if _targets is not None else resolve_targets(scenario, network.tickers)
    rng = simulation_rng(config.master_seed, sim_index)
    targets, s = draw_shock(scenario, network.n, fixed, rng)
    state = apply_shock(base, targets, s)
    state = propagate_losses(
        state, network.exposures, config.dynamic_liabilities, config.cap_losses
    )
    return SimulationOutcome(sim_index, state.defaulted, tuple(int(t) for t in targets), s)


@dataclass
class McReport:
    scenario: str
    scenario_label: str
    theta: float
    filter_mode: str
    n: int
    master_seed: int
    systemic_cutoff: int
    failure_probability: float
    avg_failed: float
    per_region_avg_failed: dict[str, float]
    counts: list[int]
    per_asset_failures: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "scenario_label": self.scenario_label,
            "theta": self.theta,
            "filter_mode": self.filter_mode,
            "n": self.n,
            "master_seed": self.master_seed,
            "systemic_cutoff": self.systemic_cutoff,
            "failure_probability": self.failure_probability,
            "avg_failed": self.avg_failed,
            "per_region": dict(self.per_region_avg_failed),
            "per_asset_failures": dict(self.per_asset_failures),
            "counts": list(self.counts),
        }


def _check_config(config: McConfig, network: ExposureNetwork):
    if config.theta is not None and config.theta != network.theta:
        raise ValueError(f"config theta {config.theta} != network theta {network.theta}")
    if config.filter_mode is not None and config.filter_mode is not network.mode:
        raise ValueError(f"config mode {config.filter_mode} != network mode {network.mode}")


def monte_carlo(
    config: McConfig,
    scenario: ShockScenario,
    network: ExposureNetwork,
    assets: Sequence[AssetMeta],
    workers: int = 1,
) -> McReport:
    _check_config(config, network)
    if [a.ticker for a in assets] != list(network.tickers):
        raise DimensionMismatch("asset list does not match network ticker order")
    prices = np.array([a.final_price for a in assets])
    base = init_capital(prices, network.exposures)
    fixed = resolve_targets(scenario, network.tickers)
    n_sims = config.n_simulations
    failed = np.zeros((n_sims, network.n), dtype=bool)

    def work(chunk: range):
        for k in chunk:
            failed[k] = run_simulation(network, prices, config, scenario, k, base, fixed).failed

    workers = max(1, int(workers))
    if workers == 1:
        work(range(n_sims))
    else:
        bounds = np.linspace(0, n_sims, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]))

    return summarize(failed, config, scenario, network, assets)


def summarize(failed: np.ndarray, config, scenario, network, assets) -> McReport:
    """Ordered reduction of per-simulation failure masks into a report."""
    n_sims = failed.shape[0]
    counts = failed.sum(axis=1).astype(int)
    per_region = {}
    for region in Region:
        cols = [i for i, a in enumerate(assets) if a.region is region]
        per_region[region.value] = float(failed[:, cols].sum()) / n_sims if cols else 0.0
    return McReport(
        scenario=scenario.key,
        scenario_label=scenario.label,
        theta=float(network.theta),
        filter_mode=network.mode.value,
        n=n_sims,
        master_seed=int(config.master_seed),
        systemic_cutoff=int(config.systemic_cutoff),
        failure_probability=float(np.count_nonzero(counts > config.systemic_cutoff)) / n_sims,
        avg_failed=float(counts.sum()) / n_sims,
        per_region_avg_failed=per_region,
        counts=counts.tolist(),
        per_asset_failures={t: int(c) for t, c in zip(network.tickers, failed.sum(axis=0))},
    )


# --- synthetic benchmark ---------------------------------------------------------


def matched_edge_probability(network: ExposureNetwork) -> float:
    """ER probability whose expected directed edge count matches the network."""
    n = network.n
    if n < 2:
        return 0.0
    return float(np.count_nonzero(network.adjacency)) / (n * (n - 1))


def synthetic_network(network: ExposureNetwork, p: float, seed: int) -> ExposureNetwork:
    """ER topology; every present edge carries the real network's mean non-zero exposure."""
    adj = erdos_renyi(network.n, p, seed)
    nz = network.exposures[network.exposures > 0]
    weight = float(nz.mean()) if nz.size else 0.0
    return ExposureNetwork(np.where(adj, weight, 0.0), network.theta, network.mode, network.tickers)


@dataclass
class SyntheticComparison:
    real: McReport
    synthetic: McReport
    er_p: float
    er_seed: int

    def to_dict(self) -> dict:
        return {
            "er_p": self.er_p,
            "er_seed": self.er_seed,
            "real": self.real.to_dict(),
            "synthetic": self.synthetic.to_dict(),
        }


def compare_synthetic(
    config: McConfig,
    scenario: ShockScenario,
    network: ExposureNetwork,
    assets: Sequence[AssetMeta],
    er_p: float | None = None,
    er_seed: int = 0,
    workers: int = 1,
) -> SyntheticComparison:
    p = matched_edge_probability(network) if er_p is None else er_p
    real = monte_carlo(config, scenario, network, assets, workers)
    synth = monte_carlo(config, scenario, synthetic_network(network, p, er_seed), assets, workers)
    return SyntheticComparison(real, synth, p, int(er_seed))
