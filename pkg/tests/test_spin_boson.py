import numpy as np
import pytest

from oqcontrol.core import ContractError
from oqcontrol.dynamics.baths import OhmicBath, bath_phase_q1, bath_phase_q2
from oqcontrol.dynamics.fields import ConstantField, FourierField, ZeroField
from oqcontrol.dynamics.grid import TimeGrid
from oqcontrol.dynamics.spin_boson import (
    STEPPER_ORDER,
    DiscreteBlochModel,
    SpinBosonModel,
    propagate_nonmarkovian_bloch,
    richardson_ratio,
    spin_boson_memory,
)

WEAK = SpinBosonModel(-2.0, 0.25, OhmicBath(0.45, 2.0, 2.0))
EASY = SpinBosonModel(-1.0, 0.75, OhmicBath(0.45, 4.0, 5.0))
R_WEAK = np.array([0.0, 0.0, -0.96])
DRIVE = FourierField([0.4, -0.3, 0.2], 0.0, 10.0)


def gamma_oracle(model, field, t, n=20000):
    """Trapezoid on two fine grids plus one Richardson step."""
    w = field.omegas
    a = field.coefficients

    def trap(m):
        tp = np.linspace(0.0, t, m + 1)
        f = model.eps0 * (t - tp) + np.sum(a[:, None] * (np.cos(w[:, None] * tp) - np.cos(w[:, None] * t))
                                           / w[:, None], axis=0)
        y = np.exp(-bath_phase_q2(t - tp, model.bath)) * np.sin(f) * np.sin(bath_phase_q1(t - tp, model.bath))
        return (t / m) * (y.sum() - 0.5 * (y[0] + y[-1]))
    coarse, fine = trap(n), trap(2 * n)
    return model.delta ** 2 * (fine + (fine - coarse) / 3.0)


def test_no_tunnelling_means_no_kernel():
    model = SpinBosonModel(-1.0, 0.0, EASY.bath)
    mk = spin_boson_memory(model, DRIVE, TimeGrid(0, 10, 10))
    assert np.all(mk.K(5.0, 2.0) == 0)
    assert mk.gamma_o(7.0) == 0.0


def test_phase_without_control():
    mk = spin_boson_memory(EASY, ZeroField(), TimeGrid(0, 10, 10))
    assert mk.f(6.0, 2.5) == pytest.approx(EASY.eps0 * 3.5, abs=1e-15)


def test_kernel_structure():
    mk = spin_boson_memory(EASY, DRIVE, TimeGrid(0, 10, 10))
    k = mk.K(4.0, 1.0)
    assert k[0, 0] == 0 and np.count_nonzero(k - np.diag(np.diag(k))) == 0
    assert k[2, 2] == pytest.approx(k[1, 1] * np.cos(mk.f(4.0, 1.0)))


def test_gamma_matches_quadrature_oracle():
    mk = spin_boson_memory(EASY, DRIVE, TimeGrid(0, 10, 10))
    for t in np.linspace(0.5, 10.0, 10):
        assert abs(mk.gamma_o(t) - gamma_oracle(EASY, DRIVE, t)) < 1e-8


def test_kernel_rejects_times_outside_cache():
    mk = spin_boson_memory(EASY, ZeroField(), TimeGrid(0, 10, 10))
    with pytest.raises(ContractError):
        mk.gamma_o(12.0)


def test_discrete_inhomogeneity_tracks_the_oracle():
    grid = TimeGrid(0, 10, 400)
    traj = propagate_nonmarkovian_bloch([0, 0, 1], EASY, DRIVE, grid)
    for k in (80, 200, 400):
        assert abs(traj.info["gamma_o"][k] - gamma_oracle(EASY, DRIVE, grid.times[k])) < 1e-3


def test_pure_rotation_without_tunnelling():
    model = SpinBosonModel(-1.5, 0.0, EASY.bath)
    r0 = np.array([0.6, -0.3, 0.5])
    traj = propagate_nonmarkovian_bloch(r0, model, DRIVE, TimeGrid(0, 10, 300))
    assert np.abs(traj.states[:, 2] - r0[2]).max() < 1e-9
    rho2 = np.sum(traj.states[:, :2] ** 2, axis=1)
    assert np.abs(rho2 - rho2[0]).max() < 1e-9
    assert np.abs(np.linalg.norm(traj.states, axis=1) - np.linalg.norm(r0)).max() < 1e-10


def test_rotation_generator_is_antisymmetric():
    m = DiscreteBlochModel.rotation(0.37)
    np.testing.assert_array_equal(m, -m.T)


def test_self_convergence_has_declared_order():
    ratio = richardson_ratio(R_WEAK, WEAK, ZeroField(), 0.0, 20.0, 100)
    assert abs(ratio / 2 ** STEPPER_ORDER - 1) < 0.15


def test_driven_self_convergence():
    ratio = richardson_ratio([0.3, 0.2, 0.5], EASY, ConstantField(0.3), 0.0, 10.0, 100)
    assert abs(ratio / 2 ** STEPPER_ORDER - 1) < 0.15


def test_weak_coupling_transient_then_settles():
    traj = propagate_nonmarkovian_bloch(R_WEAK, WEAK, ZeroField(), TimeGrid(0, 300, 3000))
    z = traj.states[:, 2]
    early = np.diff(z[:100])  # first 10 time units
    assert np.count_nonzero(np.diff(np.sign(early))) >= 2
    assert z[:100].max() - z[0] > 0.01
    assert abs(z[-1] - WEAK.equilibrium_z()) < 2e-3
    assert abs(z[-1] - z[-300]) < 1e-3


def test_bloch_vector_stays_in_ball():
    traj = propagate_nonmarkovian_bloch([0, 0, 1], EASY, DRIVE, TimeGrid(0, 10, 200))
    assert np.linalg.norm(traj.states, axis=1).max() <= 1 + 1e-9


def test_initial_vector_validation():
    with pytest.raises(ContractError):
        propagate_nonmarkovian_bloch([0, 0, 1.2], EASY, ZeroField(), TimeGrid(0, 1, 10))
    with pytest.raises(ValueError):
        propagate_nonmarkovian_bloch([0, 1], EASY, ZeroField(), TimeGrid(0, 1, 10))
