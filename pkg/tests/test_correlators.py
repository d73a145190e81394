import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dipolar_sle.bcc import Insertion, mean_shift
from dipolar_sle.correlators import (
    CorrelationRequest, FieldSpec, complex_green, correlate, correlate_fields, ell, ell_deriv,
    green_quadrant, green_strip, hermite_moment, kernel_J_J, kernel_J_Phi, ope_coefficient_check,
    ope_constant, ope_constant_numeric, vertex_series_check, wick_power_moments,
)
from dipolar_sle.errors import BranchCutCrossing, DiagonalSingularity, OutOfDomain, Unsupported
from dipolar_sle.geometry import Chart, ConformalType, to_strip, transport
from dipolar_sle.numdiff import cauchy_derivative, complex_step

interior = st.builds(complex, st.floats(-3, 3), st.floats(0.1, np.pi - 0.1))
PTS = (0.3 + 1.2j, -1.0 + 0.8j, 1.2 + 2.0j, -0.6 + 2.4j)
PHI, J = FieldSpec.phi(), FieldSpec.current()


# -- brute-force Isserlis oracle ------------------------------------------------

def _matchings(idx):
    if not idx:
        yield []
        return
    first, rest = idx[0], idx[1:]
    for i, other in enumerate(rest):
        for m in _matchings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + m


def isserlis(cov, means):
    """E[prod (m_i + X_i)] for centred Gaussian X with covariance ``cov``."""
    n = len(means)
    total = 0.0
    for size in range(0, n + 1, 2):
        for paired in itertools.combinations(range(n), size):
            rest = [i for i in range(n) if i not in paired]
            m = np.prod([means[i] for i in rest]) if rest else 1.0
            total += m * sum(np.prod([cov[a][b] for a, b in match]) for match in _matchings(list(paired)))
    return total


def _cov(kinds, pts):
    def one(ka, a, kb, b):
        if ka == kb == "Phi":
            return 2 * green_strip(a, b) if a != b else np.nan
        if a == b:
            return np.nan  # never used: matchings pair distinct points
        if ka == "J" and kb == "Phi":
            return kernel_J_Phi(a, b)
        if ka == "Phi" and kb == "J":
            return kernel_J_Phi(b, a)
        return kernel_J_J(a, b) if a != b else np.nan

    return [[one(ka, a, kb, b) for kb, b in zip(kinds, pts)] for ka, a in zip(kinds, pts)]


@pytest.mark.parametrize("kinds", [("Phi",) * 4, ("J", "Phi", "Phi", "J"), ("J",) * 4, ("Phi", "J", "Phi")])
def test_wick_engine_matches_brute_force_isserlis(kinds):
    pts = PTS[: len(kinds)]
    fields = [(PHI if k == "Phi" else J, z) for k, z in zip(kinds, pts)]
    expected = isserlis(_cov(kinds, pts), [0.0] * len(kinds))
    assert abs(correlate_fields(fields) - expected) < 1e-12 * max(1, abs(expected))


@pytest.mark.parametrize("kinds", [("Phi",) * 4, ("J", "Phi", "Phi")])
def test_wick_engine_with_insertion_matches_brute_force(kinds):
    from dipolar_sle.bcc import hat_current

    ins = Insertion(0.2, 0.7)
    pts = PTS[: len(kinds)]
    means = [mean_shift(z, ins) if k == "Phi" else hat_current(z, ins) for k, z in zip(kinds, pts)]
    fields = [(PHI if k == "Phi" else J, z) for k, z in zip(kinds, pts)]
    expected = isserlis(_cov(kinds, pts), means)
    assert abs(correlate_fields(fields, insertion=ins) - expected) < 1e-12 * max(1, abs(expected))


# -- kernels -----------------------------------------------------------------------

@given(interior, interior)
def test_green_symmetric_and_positive(a, b):
    if abs(a - b) < 1e-3:
        return
    assert green_strip(a, b) == pytest.approx(green_strip(b, a), rel=1e-12, abs=1e-14)
    assert green_strip(a, b) > 0


@given(st.floats(-5, 5), interior)
def test_green_vanishes_on_dirichlet_arc(x, z):
    assert green_strip(complex(x), z) == 0.0


def test_green_quadrant_hand_value_and_invariance():
    # |(z1 - conj z2)(z1 + z2)| / |(z1 - z2)(z1 + conj z2)| = sqrt(65)/3 at z1 = 1+i, z2 = 2+i
    assert green_quadrant(1 + 1j, 2 + 1j) == pytest.approx(np.log(np.sqrt(65) / 3), rel=1e-14)
    w1, w2 = (to_strip(Chart.QUADRANT, z).value for z in (1 + 1j, 2 + 1j))
    assert green_strip(w1, w2) == pytest.approx(np.log(np.sqrt(65) / 3), rel=1e-12)


def test_green_errors():
    with pytest.raises(DiagonalSingularity):
        green_strip(1j, 1j)
    with pytest.raises(OutOfDomain):
        green_strip(4j, 1j)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_ell_derivatives_against_contour(n):
    u = 0.7 + 1.1j
    assert abs(ell_deriv(u, n) - cauchy_derivative(ell, u, n, 0.3)) < 1e-10 * max(1, abs(ell_deriv(u, n)))


def test_current_kernels_are_derivatives_of_green():
    zeta, z = 0.4 + 1.3j, -0.7 + 2.1j
    # d/dzeta (2G) = (d/dx - i d/dy)/2 applied to 2G, via complex steps
    dx = complex_step(lambda x: 2 * green_strip_xy_real(x, zeta.imag, z), zeta.real)
    dy = complex_step(lambda y: 2 * green_strip_xy_real(zeta.real, y, z), zeta.imag)
    assert abs(kernel_J_Phi(zeta, z) - 0.5 * (dx - 1j * dy)) < 1e-12
    dd = cauchy_derivative(lambda u: kernel_J_Phi(zeta, u), z, 1, 0.2)
    # kernel_J_Phi(zeta, .) is not holomorphic in z; compare with the holomorphic part only
    hol = lambda u: -0.5 / np.sinh((zeta - u) / 2)
    assert abs(kernel_J_J(zeta, z) - cauchy_derivative(hol, z, 1, 0.2)) < 1e-12
    assert abs(dd - kernel_J_J(zeta, z)) < 1e-12


def green_strip_xy_real(x, y, z):
    from dipolar_sle.correlators import green_strip_xy

    return green_strip_xy(x, y, z)


def test_complex_green_real_part_and_derivative():
    z1 = 0.3 + 1.1j
    for z in (-0.5 + 0.4j, 1.5 + 2.5j, -2 + 1.1j):
        assert 2 * complex_green(z, z1).real == pytest.approx(green_strip(z, z1), abs=1e-13)
        d = cauchy_derivative(lambda u: complex_green(u, z1), z, 1, 0.1)
        assert abs(2 * d - kernel_J_Phi(z, z1)) < 1e-11
    with pytest.raises(BranchCutCrossing):
        complex_green(z1 + 0.5, z1)


def test_phiplus_pair_covariance_unsupported():
    plus = FieldSpec("PhiPlus")
    with pytest.raises(Unsupported):
        correlate_fields([(plus, 0.2 + 1j), (plus, -0.4 + 2j)])


# -- vertex fields and charts -----------------------------------------------------

def test_vertex_two_point_closed_form():
    a, b = 0.4, -0.7
    z1, z2 = PTS[:2]
    c = lambda z: 4 * np.tan(z.imag / 2)
    expected = c(z1) ** (a * a) * c(z2) ** (b * b) * np.exp(a * b * 2 * green_strip(z1, z2))
    got = correlate_fields([(FieldSpec.vertex(a), z1), (FieldSpec.vertex(b), z2)])
    assert abs(got - expected) < 1e-12 * expected


def test_vertex_with_phi_is_cameron_martin_shift():
    a = 0.6
    z, z1 = PTS[:2]
    v = correlate_fields([(FieldSpec.vertex(a), z)])
    got = correlate_fields([(FieldSpec.vertex(a), z), (PHI, z1)])
    assert abs(got - v * a * 2 * green_strip(z, z1)) < 1e-12


@pytest.mark.parametrize("chart,z,z1", [
    (Chart.HALF_PLANE_PM1, 0.2 + 0.5j, -0.4 + 1.2j),
    (Chart.QUADRANT, 1.0 + 0.5j, 0.3 + 2.0j),
    (Chart.HALF_PLANE_0INF, -1.0 + 0.4j, 2.0 + 3.0j),
])
def test_fields_transform_by_their_conformal_type(chart, z, z1):
    for spec in (J, FieldSpec.vertex(0.5), FieldSpec.virasoro()):
        jz, j1 = to_strip(chart, z), to_strip(chart, z1)
        strip = correlate_fields([(spec, jz.value), (PHI, j1.value)])
        got = correlate_fields([(spec, z), (PHI, z1)], chart)
        if spec.base == "T":
            # the Schwarzian constant multiplies E[Phi] = 0; only the weight-two part survives
            want = jz.d1**2 * strip
        else:
            want = transport(strip, spec.conformal_type(), jz)
        assert abs(got - want) < 1e-10 * max(1, abs(want))


def test_conformal_types():
    assert PHI.conformal_type() == ConformalType.differential(0, 0)
    assert J.conformal_type() == ConformalType.differential(1, 0)
    assert FieldSpec("Jbar").conformal_type() == ConformalType.differential(0, 1)
    assert FieldSpec.virasoro().conformal_type() == ConformalType.schwarzian_form(1 / 12)
    assert FieldSpec.vertex(0.5).conformal_type() == ConformalType.differential(-0.125, -0.125)
    assert FieldSpec.rooted(0.5j).conformal_type() == ConformalType.differential(0.125, 0)
    with pytest.raises(ValueError):
        FieldSpec("Psi")


def test_request_rejects_coincident_points():
    with pytest.raises(DiagonalSingularity):
        correlate(CorrelationRequest(((PHI, 1j), (PHI, 1j))))


# -- OPE coefficients -----------------------------------------------------------------

@given(st.floats(-2, 3))
def test_hermite_closed_form_matches_recursion(two_c):
    moments = wick_power_moments(two_c, 6)
    for n in range(7):
        assert moments[n] == pytest.approx(hermite_moment(two_c, n), rel=1e-12, abs=1e-12)


def test_ope_constant_closed_vs_numeric():
    for z in PTS:
        assert abs(ope_constant(z) - ope_constant_numeric(z, 1e-5)) < 1e-8
    # transported to a chart: 2 log((4/|W'|) tan(Im W/2))
    z = 0.3 + 0.7j
    jet = to_strip(Chart.HALF_PLANE_PM1, z)
    assert ope_constant(z, Chart.HALF_PLANE_PM1) == pytest.approx(
        ope_constant(jet.value) - 2 * np.log(abs(jet.d1)), rel=1e-14)


def test_ope_and_vertex_series_checks():
    assert ope_coefficient_check(2) < 1e-6
    assert vertex_series_check(0.3) < 1e-8
    with pytest.raises(ValueError):
        ope_coefficient_check(9)
