import numpy as np
import pytest
from scipy.linalg import expm

from oqcontrol.core import SIGMA_X, SIGMA_Z
from oqcontrol.optim.gradients import (
    directional_check,
    finite_difference_gradient,
    piecewise_constant_segments,
    propagator_derivative,
)


def chain(h0, h1, eps, dt):
    hs = [h0 + e * h1 for e in eps]
    segs = piecewise_constant_segments(hs, dt)
    u = np.eye(h0.shape[0], dtype=complex)
    for s in segs:
        u = s @ u
    return hs, segs, u


def test_fd_gradient_of_sphere():
    p = np.array([0.3, -1.2, 2.5, 0.0])
    np.testing.assert_allclose(finite_difference_gradient(lambda x: x @ x, p), 2 * p, atol=1e-8)


def test_fd_gradient_exact_for_linear_cost():
    c = np.array([1.0, -2.0, 0.5])
    for scheme in ("central", "forward"):
        np.testing.assert_allclose(finite_difference_gradient(lambda x: c @ x, np.ones(3), scheme=scheme), c,
                                   atol=1e-7)


def test_fd_gradient_errors():
    with pytest.raises(ValueError):
        finite_difference_gradient(lambda x: x @ x, np.ones(2), scheme="backward")
    with pytest.raises(ValueError):
        finite_difference_gradient(lambda x: x @ x, np.ones(2), delta=0.0)
    with pytest.raises(FloatingPointError):
        finite_difference_gradient(lambda x: np.nan, np.ones(2))


def test_directional_check_accepts_true_gradient():
    f = lambda x: np.sum(np.sin(x) * x ** 2)
    x = np.linspace(-1, 1, 7)
    g = np.cos(x) * x ** 2 + 2 * x * np.sin(x)
    rel, adj, fd = directional_check(f, g, x)
    assert rel < 1e-7 and len(adj) == len(fd) == 16
    assert directional_check(f, 1.1 * g, x)[0] > 0.05


def test_propagator_derivative_zero_without_dependence():
    dt = 0.1
    _, segs, _ = chain(SIGMA_Z, SIGMA_X, np.ones(5), dt)
    np.testing.assert_array_equal(propagator_derivative(segs, None, 2, np.zeros((2, 2)), dt), 0)
    # controls after the observation time do not act
    np.testing.assert_array_equal(propagator_derivative(segs, None, 3, SIGMA_X, dt, n=2), 0)


def test_propagator_derivative_single_step():
    dt = 0.05
    hs, segs, _ = chain(0.7 * SIGMA_Z, SIGMA_X, [0.4], dt)
    got = propagator_derivative(segs, hs, 0, SIGMA_X, dt)
    np.testing.assert_allclose(got, -1j * dt * SIGMA_X, atol=1e-15)


def test_propagator_derivative_matches_fd():
    dt, eps = 0.05, np.array([0.3, -0.2, 0.5, 0.1, -0.4, 0.2])
    h0 = 0.7 * SIGMA_Z
    hs, segs, _ = chain(h0, SIGMA_X, eps, dt)
    for k in range(len(eps)):
        d = 1e-6
        ep, em = eps.copy(), eps.copy()
        ep[k] += d
        em[k] -= d
        fd = (chain(h0, SIGMA_X, ep, dt)[2] - chain(h0, SIGMA_X, em, dt)[2]) / (2 * d)
        exact = propagator_derivative(segs, hs, k, SIGMA_X, dt, exact=True)
        approx = propagator_derivative(segs, hs, k, SIGMA_X, dt)
        assert np.abs(exact - fd).max() < 1e-8
        assert np.abs(approx - fd).max() < 5 * dt ** 2  # first-order form has O(dt^2) error per segment


def test_propagator_derivative_index_check():
    segs = piecewise_constant_segments([SIGMA_Z], 0.1)
    with pytest.raises(IndexError):
        propagator_derivative(segs, None, 1, SIGMA_X, 0.1)
