import numpy as np
import pytest
from scipy import integrate

from oqcontrol.dynamics.baths import OhmicBath, ohmic_correlation
from oqcontrol.dynamics.fields import FourierField, GridField, WindowedSineField, half_cosine_ramp
from oqcontrol.dynamics.grid import TimeGrid
from oqcontrol.dynamics.models import (
    CHARGE_X,
    CHARGE_Z,
    CNOT,
    CnotModel,
    ConfigurationError,
    OhmicCorrelation,
    WhiteNoiseCorrelation,
    charge_qubit_channels,
    charge_qubit_hamiltonian,
    single_qubit_equilibrium,
)


def test_half_flux_removes_josephson_terms():
    h = charge_qubit_hamiltonian(0.3, 0.5, 1.0, 0.7)
    off = h - np.diag(np.diag(h))
    assert np.abs(off).max() < 1e-15


def test_zero_gate_charge_block():
    ec, ej0 = 1.3, 0.4
    ej = 2 * ej0
    expected = np.array([
        [8 * ec, -ej / 2, 0, 0],
        [-ej / 2, 0, -ej / 2, 0],
        [0, -ej / 2, 0, -ej / 2],
        [0, 0, -ej / 2, 8 * ec],
    ])
    np.testing.assert_allclose(charge_qubit_hamiltonian(0.0, 0.0, ec, ej0), expected, atol=1e-15)


def test_gate_charge_enters_through_hz():
    a = charge_qubit_hamiltonian(0.25, 0.1, 1.0, 0.5)
    b = charge_qubit_hamiltonian(0.0, 0.1, 1.0, 0.5)
    np.testing.assert_allclose(a - b, 4 * 1.0 * 0.25 * np.diag([3, 1, -1, -3]), atol=1e-15)


def test_charge_hamiltonian_is_hermitian():
    g = np.random.default_rng(0)
    for _ in range(50):
        h = charge_qubit_hamiltonian(*g.uniform(-2, 2, 4))
        assert np.abs(h - h.conj().T).max() < 1e-14


def test_charge_operators():
    np.testing.assert_array_equal(np.diag(CHARGE_Z).real, [3, 1, -1, -3])
    np.testing.assert_array_equal(CHARGE_X, CHARGE_X.T)
    assert np.count_nonzero(CHARGE_X) == 6


def test_no_noise_gives_zero_rates():
    grid = TimeGrid(0, 2, 20)
    for ch in charge_qubit_channels(None, 0, grid):
        np.testing.assert_array_equal(ch.rate_at(grid.times), 0.0)


def test_white_noise_rate_is_constant_after_bump():
    grid = TimeGrid(0, 5, 100)
    c0, width = 0.01, 0.02
    ch = charge_qubit_channels(None, WhiteNoiseCorrelation(c0, width), grid)[1]
    late = ch.rate_at(grid.times[grid.times > 20 * width])
    np.testing.assert_allclose(late, 2 * c0, rtol=1e-8)


def test_ohmic_rate_matches_quadrature():
    bath = OhmicBath(0.05, 2.0, 3.0)
    grid = TimeGrid(0, 3, 30)
    ch = charge_qubit_channels(None, OhmicCorrelation(bath), grid)[1]
    for t in (0.2, 1.0, 2.5):
        oracle = 2 * integrate.quad(lambda s: ohmic_correlation(s, bath).real, 0, t, epsabs=1e-14, epsrel=1e-12)[0]
        assert abs(float(ch.rate_at(t)) - oracle) < 1e-8


def test_generic_correlation_callable():
    grid = TimeGrid(0, 1, 10)
    ch = charge_qubit_channels(lambda t, tp: 0.1 * np.exp(-(t - tp)), None, grid)[0]
    np.testing.assert_allclose(ch.rate_at(grid.times), 0.2 * (1 - np.exp(-grid.times)), atol=1e-10)


def test_negative_rate_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        charge_qubit_channels(lambda t, tp: -1.0, None, TimeGrid(0, 1, 10))


def test_cnot_matrix_and_equilibrium():
    assert np.allclose(CNOT @ CNOT, np.eye(4))
    np.testing.assert_allclose(np.diag(single_qubit_equilibrium(0.3, 0.1)).real, [0.75, 0.25])
    assert len(CnotModel().channels()) == 4
    assert CnotModel(gamma1=0.0, gamma2=0.0).channels() == []


def test_cnot_coupling_term():
    model = CnotModel(coupling=2.0)
    h = model.hamiltonian([0.5, 0.0, -0.4, 0.0])(0.3)
    expected = 0.5 * model.control_operators[0] - 0.4 * model.control_operators[2] \
        + 2.0 * 0.5 * -0.4 * model.coupling_operator
    np.testing.assert_allclose(h, expected, atol=1e-15)


# control fields

def test_fourier_field_endpoints_and_midpoint():
    grid = TimeGrid(0, 2, 50)
    f = FourierField([1.0, 0.3, -0.2], 0, 2)
    s = f.samples(grid)
    assert s[0] == 0.0 and s[-1] == 0.0
    assert FourierField([1.0], 0, 2)(1.0) == pytest.approx(1.0)
    np.testing.assert_array_equal(FourierField(np.zeros(4), 0, 2).samples(grid), 0.0)


def test_grid_field_interpolates_nodes():
    grid = TimeGrid(0, 1, 10)
    vals = np.sin(grid.times)
    for kind in ("cubic", "linear"):
        np.testing.assert_allclose(GridField(grid, vals, kind=kind).samples(grid), vals, atol=1e-15)


def test_ramp_and_windowed_sine():
    assert half_cosine_ramp(0.0, 2.0) == 0.0
    assert half_cosine_ramp(5.0, 2.0) == 1.0
    f = WindowedSineField(-0.99, 0.013, 1.34, 0.0, 10.71, 2.0)
    assert f(0.0) == 0.0
    plateau = f(np.linspace(2.0, 20.0, 50))
    assert np.all(np.abs(plateau + 0.99) < 0.1)
