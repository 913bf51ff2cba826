"""Simulation and optimal control of open quantum systems."""

from . import core, dynamics, inversion, objectives, optim, scenarios

__version__ = "0.1.0"
