"""Uniform time grids and sampled trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = t0 + k h`` for ``k = 0..n_steps``."""

    t0: float
    tf: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not np.isfinite(self.t0) or not np.isfinite(self.tf) or self.tf <= self.t0:
            raise ValueError(f"need finite t0 < tf, got t0={self.t0}, tf={self.tf}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def h(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    @property
    def duration(self) -> float:
        return self.tf - self.t0

    def refined(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.t0, self.tf, self.n_steps * int(factor))

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass
class Trajectory:
    """States sampled on every node of a grid.

    ``states`` has shape ``(n_nodes, N, N)`` for density operators or
    ``(n_nodes, 3)`` for Bloch vectors.
    """

    grid: TimeGrid
    states: np.ndarray
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.states = np.asarray(self.states)
        if self.states.shape[0] != self.grid.n_nodes:
            raise ValueError(
                f"trajectory has {self.states.shape[0]} states for {self.grid.n_nodes} grid nodes"
            )

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def is_bloch(self) -> bool:
        return self.states.ndim == 2 and self.states.shape[1] == 3

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def traces(self) -> np.ndarray:
        if self.is_bloch:
            raise ValueError("Bloch trajectories have no matrix trace")
        return np.einsum("kii->k", self.states)

    def min_eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.states + np.conj(np.swapaxes(self.states, 1, 2)))
        return np.linalg.eigvalsh(herm).min(axis=1)
