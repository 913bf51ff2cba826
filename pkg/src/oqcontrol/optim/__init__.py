"""Gradients, adjoints and minimisers."""

from .adjoint import (
    ExponentialGateProblem,
    LindbladStateProblem,
    SpinBosonStateProblem,
    adjoint_gradient_markovian,
    adjoint_gradient_nonmarkovian_linear,
)
from .fields import (
    FourierParameterization,
    GridParameterization,
    WindowedSineParameterization,
    fourier_field,
    windowed_sine_field,
)
from .gates import FourierGateControls, cnot_problem
from .gradients import directional_check, finite_difference_gradient, propagator_derivative
from .minimizers import conjugate_gradient_minimize, differential_evolution_minimize
from .problem import OptimizationProblem, OptimizationResult
