"""Numerical differentiation and contour-coefficient helpers.

Three families are provided:

* ``complex_step`` for real-analytic, real-valued functions of a real
  variable (Squire--Trapp): no subtractive cancellation, so the step can be
  tiny.
* ``cauchy_derivative`` / ``laurent_coefficients`` for holomorphic functions
  (Lyness--Moler): trapezoid rule on a small circle, spectrally accurate.
* ``central_difference`` for everything else, with 3- and 5-point stencils.
"""

from math import factorial

import numpy as np

_STENCILS = {
    # (order, npoints): (offsets, weights); divide by h**order
    (1, 3): ((-1, 1), (-0.5, 0.5)),
    (1, 5): ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    (2, 3): ((-1, 0, 1), (1.0, -2.0, 1.0)),
    (2, 5): ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
}


def complex_step(f, x, h=1e-30):
    """Derivative of a real-analytic function at real ``x``."""
    return np.imag(f(x + 1j * h)) / h


def central_difference(f, x, h, order=1, npoints=5, direction=1.0):
    """Finite-difference derivative of ``f`` at ``x`` along ``direction``.

    ``direction`` may be complex: for holomorphic ``f`` any unit direction
    gives the complex derivative once the result is divided by it.
    """
    try:
        offsets, weights = _STENCILS[(order, npoints)]
    except KeyError:
        raise ValueError(f"no {npoints}-point stencil for order {order}") from None
    total = sum(wt * f(x + k * h * direction) for k, wt in zip(offsets, weights))
    return total / (h * direction) ** order


def _circle(radius, nodes):
    theta = 2 * np.pi * np.arange(nodes) / nodes
    return radius * np.exp(1j * theta)


def laurent_coefficients(f, z, radius, orders, nodes=64):
    """Laurent coefficients of ``f`` about ``z`` via the trapezoid rule.

    Returns ``{k: c_k}`` for each k in ``orders`` where
    ``f(z + e) = sum_k c_k e**k`` near ``z``.  ``f`` is called once per node
    and must accept a scalar.
    """
    eps = _circle(radius, nodes)
    values = np.array([f(z + e) for e in eps])
    return {k: np.mean(values * eps ** (-k)) for k in orders}


def cauchy_derivative(f, z, n=1, radius=1e-2, nodes=64):
    """n-th complex derivative of a holomorphic ``f`` (Lyness--Moler)."""
    c = laurent_coefficients(f, z, radius, [n], nodes)[n]
    return factorial(n) * c


def wirtinger(f, z, h=1e-4, npoints=5):
    """Return (df/dz, df/dzbar) for a smooth, not necessarily holomorphic ``f``."""
    fx = central_difference(f, z, h, 1, npoints, 1.0)
    # dividing by the direction 1j leaves df/dy / 1j
    fy = 1j * central_difference(f, z, h, 1, npoints, 1j)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)
