import numpy as np
import pytest

from oqcontrol.core import SIGMA_X, SIGMA_Z, density_from_bloch
from oqcontrol.dynamics.baths import OhmicBath
from oqcontrol.dynamics.grid import TimeGrid
from oqcontrol.dynamics.models import CnotModel
from oqcontrol.dynamics.propagators import LindbladChannel
from oqcontrol.dynamics.spin_boson import SpinBosonModel
from oqcontrol.optim.adjoint import LindbladStateProblem, SpinBosonStateProblem
from oqcontrol.optim.gates import cnot_problem
from oqcontrol.optim.gradients import directional_check, finite_difference_gradient

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
LOWER = np.array([[0, 0], [1, 0]], dtype=complex)
EASY = SpinBosonModel(-1.0, 0.75, OhmicBath(0.45, 4.0, 5.0))


def random_field(grid, seed, scale=0.5):
    return scale * np.random.default_rng(seed).standard_normal(grid.n_nodes)


def test_zero_gradient_at_exact_target():
    grid = TimeGrid(0, 2, 40)
    prob = LindbladStateProblem(np.zeros((2, 2)), [SIGMA_X], [], grid, KET0, KET0, 0.5, 0.5, desired_path=KET0)
    assert prob.cost(np.zeros(grid.n_nodes)) == 0.0
    np.testing.assert_allclose(prob.gradient(np.zeros(grid.n_nodes)), 0.0, atol=1e-15)


def test_penalty_only_gradient():
    grid = TimeGrid(0, 2, 40)
    prob = LindbladStateProblem(np.zeros((2, 2)), [np.zeros((2, 2))], [], grid, KET0, KET0, alpha=0.3)
    eps = random_field(grid, 0)
    np.testing.assert_allclose(prob.gradient(eps).ravel(), 0.3 * eps * grid.trapezoid_weights(), atol=1e-15)


def test_markovian_transfer_gradient_matches_fd():
    grid = TimeGrid(0, 3, 60)
    prob = LindbladStateProblem(0.5 * SIGMA_Z, [SIGMA_X], [LindbladChannel(LOWER, 0.05)], grid, KET0, KET1,
                                0.6, 0.4, desired_path=KET1, alpha=0.01)
    eps = random_field(grid, 1)
    g = prob.gradient(eps).ravel()
    fd = finite_difference_gradient(prob.cost, eps, delta=1e-6)
    assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-4
    assert directional_check(prob.cost, g, eps)[0] < 1e-4


def test_no_tunnelling_reduces_to_markovian():
    grid = TimeGrid(0, 5, 100)
    model = SpinBosonModel(-1.0, 0.0, EASY.bath)
    r0, rt = np.array([0.6, 0.2, -0.5]), np.array([0.0, 0.0, 1.0])
    sb = SpinBosonStateProblem(model, grid, r0, rt, alpha=0.05)
    # z-rotation at eps0 + eps; the Bloch vector rotates as under H = -(eps0 + eps) sigma_z / 2
    mk = LindbladStateProblem(-0.5 * model.eps0 * SIGMA_Z, [-0.5 * SIGMA_Z], [], grid,
                              density_from_bloch(r0), density_from_bloch(rt), alpha=0.05)
    eps = random_field(grid, 2)
    assert abs(sb.cost(eps) - mk.cost(eps)) < 1e-9
    np.testing.assert_allclose(sb.gradient(eps), mk.gradient(eps).ravel(), atol=1e-9)


def test_spin_boson_gradient_directional():
    grid = TimeGrid(0, 10, 100)
    r0 = np.array([0.0, 0.0, EASY.equilibrium_z()])
    prob = SpinBosonStateProblem(EASY, grid, r0, np.array([0, 0, 1.0]), 0.5, 0.5,
                                 desired_path=np.array([0, 0, 1.0]), alpha=0.216)
    eps = random_field(grid, 3, 0.3)
    rel, _, _ = directional_check(prob.cost, prob.gradient(eps), eps, n_dirs=16, delta=1e-5)
    assert rel < 1e-3


@pytest.mark.parametrize("dissipative", [False, True])
def test_cnot_gradient_matches_fd(dissipative):
    prob, ctrl = cnot_problem(CnotModel(gamma1=0.1, gamma2=0.1, rate_scale=0.5), TimeGrid(0, 1, 40), 3, dissipative)
    p = np.random.default_rng(4).standard_normal(ctrl.size)
    fd = finite_difference_gradient(prob.cost, p, delta=1e-6)
    g = prob.gradient(p)
    assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-6
