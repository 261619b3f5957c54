"""Deterministic threshold propagation over a filtered correlation matrix.

A node defaults once the summed filtered correlation to already-defaulted
nodes strictly exceeds its influence threshold. Updates are synchronous and
defaults are absorbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, UnknownTicker


def seed_default(tickers: Sequence[str], targets: Iterable[str]) -> np.ndarray:
    index = {t: i for i, t in enumerate(tickers)}
    state = np.zeros(len(tickers), dtype=bool)
    for t in targets:
        if t not in index:
            raise UnknownTicker(t)
        state[index[t]] = True
    return state


def influence(state, filtered_rho) -> np.ndarray:
    s = np.asarray(state, dtype=bool)
    rho = np.asarray(filtered_rho, dtype=float)
    if rho.shape != (s.size, s.size):
        raise DimensionMismatch(f"state of size {s.size} vs matrix {rho.shape}")
    return rho[:, s].sum(axis=1)


def step(state, filtered_rho, influence_threshold=0.5) -> np.ndarray:
    s = np.asarray(state, dtype=bool)
    return s | (influence(s, filtered_rho) > np.asarray(influence_threshold, dtype=float))


@dataclass
class CascadeTrace:
    tickers: tuple[str, ...]
    states: list[np.ndarray]
    converged: bool
    theta: float | None = None
    influence_threshold: float | list[float] = 0.5
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def n_iterations(self) -> int:
        return len(self.states) - 1

    def matrix(self) -> np.ndarray:
        """Iterations x assets 0/1 matrix (the heatmap layout)."""
        return np.vstack(self.states).astype(int)

    def newly_defaulted(self) -> list[list[str]]:
        out = []
        prev = np.zeros(len(self.tickers), dtype=bool)
        for s in self.states:
            out.append([self.tickers[i] for i in np.flatnonzero(s & ~prev)])
            prev = s
        return out

    def defaulted(self, iteration: int = -1) -> list[str]:
        return [self.tickers[i] for i in np.flatnonzero(self.states[iteration])]


def run(
    tickers: Sequence[str],
    filtered_rho,
    targets: Iterable[str],
    influence_threshold=0.5,
    max_iterations: int = 10,
    theta: float | None = None,
) -> CascadeTrace:
    """Iterate `step` from the seeded state until a fixed point or the cap.

    The confirming snapshot that equals its predecessor is kept in the trace,
    so a cascade that stops spreading after k rounds has k + 2 snapshots.
    """
    if max_iterations < 0:
        raise ValueError("max_iterations must be non-negative")
    rho = np.asarray(filtered_rho, dtype=float)
    state = seed_default(tickers, targets)
    if rho.shape != (state.size, state.size):
        raise DimensionMismatch(f"{state.size} tickers vs matrix {rho.shape}")
    threshold = np.asarray(influence_threshold, dtype=float)
    if threshold.ndim not in (0, 1) or (threshold.ndim == 1 and threshold.size != state.size):
        raise DimensionMismatch("influence threshold must be scalar or one per asset")

    states = [state]
    converged = False
    for _ in range(max_iterations):
        nxt = step(states[-1], rho, threshold)
        states.append(nxt)
        if np.array_equal(nxt, states[-2]):
            converged = True
            break
    t_echo = float(threshold) if threshold.ndim == 0 else threshold.tolist()
    return CascadeTrace(tuple(tickers), states, converged, theta, t_echo)
