import numpy as np
import pytest
from hypothesis import given, strategies as st

from dipolar_sle.numdiff import (
    cauchy_derivative, central_difference, complex_step, laurent_coefficients, wirtinger,
)


@given(st.floats(-3, 3))
def test_complex_step_matches_analytic_derivative(x):
    f = lambda t: np.exp(t) * np.sin(t)
    assert complex_step(f, x) == pytest.approx(np.exp(x) * (np.sin(x) + np.cos(x)), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("npoints,expected_ratio", [(3, 4.0), (5, 16.0)])
def test_central_difference_order(npoints, expected_ratio):
    f, x = np.sin, 0.7
    err = [abs(central_difference(f, x, h, 1, npoints) - np.cos(x)) for h in (1e-2, 5e-3)]
    assert err[0] / err[1] == pytest.approx(expected_ratio, rel=0.05)


def test_central_difference_second_order_and_complex_direction():
    assert central_difference(np.exp, 0.3, 1e-3, 2) == pytest.approx(np.exp(0.3), rel=1e-9)
    # holomorphic: any direction gives f'
    got = central_difference(np.exp, 0.3 + 0.2j, 1e-3, 1, 5, np.exp(0.4j))
    assert abs(got - np.exp(0.3 + 0.2j)) < 1e-11


def test_unknown_stencil():
    with pytest.raises(ValueError):
        central_difference(np.sin, 0.0, 1e-3, 3)


def test_laurent_coefficients_of_known_series():
    z = 0.4 + 0.1j
    f = lambda u: 2 / (u - z) ** 2 - 1 / (u - z) + 3 + 5 * (u - z)
    c = laurent_coefficients(f, z, 1e-2, [-3, -2, -1, 0, 1])
    for k, want in {-3: 0, -2: 2, -1: -1, 0: 3, 1: 5}.items():
        assert abs(c[k] - want) < 1e-10


def test_cauchy_derivative_of_exp():
    for n in (1, 2, 3):
        assert abs(cauchy_derivative(np.exp, 0.2 + 0.5j, n, radius=0.5) - np.exp(0.2 + 0.5j)) < 1e-13


def test_wirtinger_of_modulus_squared():
    z = 0.3 - 0.8j
    d, dbar = wirtinger(lambda u: u * np.conj(u), z)
    assert abs(d - np.conj(z)) < 1e-10 and abs(dbar - z) < 1e-10
