"""Optimisation problem and result records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..core import ContractError


@dataclass
class OptimizationProblem:
    """A scalar cost over a parameter vector with optional gradient and box bounds.

    ``value_and_gradient``, when given, is preferred over separate calls.
    ``parameterization`` maps parameters to grid samples for reporting.
    """

    cost: Callable
    n_params: int
    bounds: Any = None
    gradient: Callable | None = None
    value_and_gradient: Callable | None = None
    parameterization: Any = None
    grid: Any = None
    seed: int = 0
    x0: Any = None
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_params < 1:
            raise ContractError("an optimisation problem needs at least one parameter")
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float)
            if b.shape != (self.n_params, 2):
                raise ContractError(f"bounds must have shape ({self.n_params}, 2), got {b.shape}")
            if np.any(b[:, 0] > b[:, 1]):
                raise ContractError("lower bounds must not exceed upper bounds")
            self.bounds = b

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None or self.value_and_gradient is not None

    def evaluate(self, x):
        """``(J, grad)`` using whichever gradient entry point is available."""
        if self.value_and_gradient is not None:
            j, g = self.value_and_gradient(x)
            return float(j), np.asarray(g, dtype=float)
        if self.gradient is None:
            raise ContractError("this problem has no gradient")
        return float(self.cost(x)), np.asarray(self.gradient(x), dtype=float)

    def check_bounds_finite(self):
        if self.bounds is None or not np.all(np.isfinite(self.bounds)):
            raise ContractError("evolutionary search needs finite bounds for every parameter")

    def field_samples(self, x):
        if self.parameterization is None:
            return None
        return self.parameterization.samples(x)


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_cost: float
    cost_trace: list
    n_evaluations: int
    seed: int | None
    converged: bool
    message: str = ""
    best_field: np.ndarray | None = None
    n_iterations: int = 0

    def summary(self) -> dict:
        return {
            "best_cost": float(self.best_cost),
            "converged": bool(self.converged),
            "n_evaluations": int(self.n_evaluations),
            "n_iterations": int(self.n_iterations),
            "seed": self.seed,
            "message": self.message,
        }
