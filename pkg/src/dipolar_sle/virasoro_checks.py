"""Numerical checks of the Virasoro/Ward structure at correlation level.

Every identity is checked with a probe field (by default Phi(z1)) so that
both sides are ordinary functions that the Wick engine can evaluate.
Laurent coefficients in the Virasoro field's variable come from a 64-node
trapezoid rule on a small circle; holomorphic derivatives from Cauchy
integrals; non-holomorphic derivatives from central differences.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .bcc import A_SLE4, Insertion, hat_current, hat_expectation
from .correlators import (
    FieldSpec, correlate_fields, green_quadrant, green_strip, green_strip_xy, kernel_J_Phi,
    ope_coefficient_check, vertex_series_check,
)
from .errors import ContourCollision, NearMarkedPoint
from .geometry import (
    Chart, ConformalType, lie_coefficients, lie_split, loewner_vector_field, to_strip, transport,
)
from .numdiff import cauchy_derivative, central_difference, laurent_coefficients, wirtinger

NODES = 64


@dataclass
class IdentityReport:
    """Per-row residuals of one identity; passes iff every row is below its tolerance."""

    name: str
    labels: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    tolerances: list = field(default_factory=list)

    def add(self, label, residual, tolerance):
        residual = float(residual)
        if not np.isfinite(residual):
            raise ArithmeticError(f"{self.name}: non-finite residual at {label}")
        self.labels.append(label)
        self.residuals.append(residual)
        self.tolerances.append(float(tolerance))

    @property
    def max_residual(self):
        return max(self.residuals, default=0.0)

    @property
    def passed(self):
        return all(r < t for r, t in zip(self.residuals, self.tolerances))

    @property
    def worst(self):
        if not self.residuals:
            return None
        ratios = [r / t for r, t in zip(self.residuals, self.tolerances)]
        return self.labels[int(np.argmax(ratios))]

    def to_dict(self):
        return {
            "identity": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "worst": self.worst,
            "rows": [{"label": l, "residual": r, "tolerance": t}
                     for l, r, t in zip(self.labels, self.residuals, self.tolerances)],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: max residual {self.max_residual:.3e} ({len(self.residuals)} rows)"


def _label(*pts):
    return ", ".join(f"{complex(p).real:+.3f}{complex(p).imag:+.3f}i" for p in pts)


def _rel(a, b, floor=1e-12):
    return abs(a - b) / max(abs(a), abs(b), floor)


# -- kernels and boundary conditions -------------------------------------------

_KERNEL_POINTS = (0.3 + 1.2j, -1.0 + 0.8j, 1.2 + 2.0j, -0.6 + 2.4j, 2.0 + 1.5j, 0.1 + 3.0j)
_BOUNDARY_X = tuple(np.linspace(-4.0, 4.0, 9))
_QUADRANT_POINTS = (1.0 + 1.0j, 2.0 + 1.0j, 0.3 + 2.0j, 1.5 + 0.2j, 0.7 + 0.7j)


def kernel_boundary_suite(h=1e-5):
    """Boundary values, symmetry and conformal invariance of the Green kernel and J."""
    dirichlet = IdentityReport("green_strip = 0 on the Dirichlet arc")
    neumann = IdentityReport("d/dy green_strip = 0 on the Neumann arc (central step 1e-5)")
    symmetry = IdentityReport("green_strip symmetry")
    invariance = IdentityReport("green_quadrant = green_strip after the quadrant map")
    current = IdentityReport("J imaginary on the Dirichlet arc, real on the Neumann arc")
    for z in _KERNEL_POINTS:
        for x in _BOUNDARY_X:
            dirichlet.add(_label(x, z), abs(green_strip(complex(x), z)), 1e-300)
            dy = central_difference(lambda y: green_strip_xy(x, y, z), np.pi, h, 1, 3)
            neumann.add(_label(x + np.pi * 1j, z), abs(dy), 1e-8)
            current.add(_label(x, z), abs(kernel_J_Phi(complex(x), z).real), 1e-12)
            current.add(_label(x + np.pi * 1j, z), abs(kernel_J_Phi(x + np.pi * 1j, z).imag), 1e-12)
        for q in _KERNEL_POINTS:
            if q != z:
                symmetry.add(_label(z, q), abs(green_strip(z, q) - green_strip(q, z)), 1e-12)
    for x in _BOUNDARY_X:
        if x != 0:
            current.add(f"hat {x:+.3f}", abs(hat_current(complex(x)).real), 1e-12)
            current.add(f"hat {x:+.3f}+pi i", abs(hat_current(x + np.pi * 1j).imag), 1e-12)
    for zeta in _QUADRANT_POINTS:
        for z in _QUADRANT_POINTS:
            if zeta != z:
                w1 = to_strip(Chart.QUADRANT, zeta).value
                w2 = to_strip(Chart.QUADRANT, z).value
                invariance.add(_label(zeta, z), abs(green_quadrant(zeta, z) - green_strip(w1, w2)), 1e-10)
    return [dirichlet, neumann, symmetry, invariance, current]


def ope_virasoro_suite():
    """One-point function of T, its Schwarzian transport, the JJ pole and the vertex series."""
    onepoint = IdentityReport("E T = 1/48 in the strip and transports with mu = 1/12")
    ctype = ConformalType.schwarzian_form(1 / 12)
    tfield = FieldSpec.virasoro()
    for z in _KERNEL_POINTS:
        onepoint.add(f"strip {_label(z)}", abs(correlate_fields([(tfield, z)]) - 1 / 48), 1e-10)
    for chart, pts in ((Chart.QUADRANT, _QUADRANT_POINTS),
                       (Chart.HALF_PLANE_PM1, (0.2 + 0.5j, -0.4 + 1.2j, 0.8 + 0.3j)),
                       (Chart.HALF_PLANE_0INF, (0.5 + 0.5j, -1.0 + 0.4j, 2.0 + 3.0j))):
        for z in pts:
            expected = transport(1 / 48, ctype, to_strip(chart, z))
            got = correlate_fields([(tfield, z)], chart)
            onepoint.add(f"{chart.name} {_label(z)}", abs(got - expected) / max(1.0, abs(expected)), 1e-10)
    jj = IdentityReport("JJ Laurent coefficient of (zeta - z)^-2 is -1 (radius 1e-4)")
    jfield = FieldSpec.current()
    for z in _KERNEL_POINTS[:5]:
        c = laurent_coefficients(lambda u: correlate_fields([(jfield, u), (jfield, z)]),
                                 z, 1e-4, [-2], NODES)[-2]
        jj.add(_label(z), abs(c + 1), 1e-6)
    series = IdentityReport("vertex OPE series at alpha = 0.3")
    series.add("alpha=0.3", vertex_series_check(0.3), 1e-8)
    moments = IdentityReport("OPE power moments against Hermite closed form")
    for n in (1, 2, 3):
        moments.add(f"n={n}", ope_coefficient_check(n), 1e-6)
    return [onepoint, jj, series, moments]


# -- one-point function of T --------------------------------------------------

def virasoro_onepoint(z, chart=Chart.STRIP_INF):
    """E T(z) = S_w/12 + w'^2/48 for the canonical map w of ``chart``."""
    jet = to_strip(chart, z)
    return jet.schwarzian / 12 + jet.d1**2 / 48


def _contour_guard(center, radius, others, chart):
    for q in others:
        if q is not None and abs(center - q) <= 4 * radius:
            raise ContourCollision(f"contour around {center} of radius {radius} too close to {q}")
    if chart in (Chart.STRIP_INF, Chart.STRIP0):
        if center.imag - radius <= 0 or center.imag + radius >= np.pi:
            raise ContourCollision("contour leaves the strip")
    elif center.imag - radius <= 0:
        raise ContourCollision("contour leaves the domain")


def _t_laurent(others, z, radius, chart, orders):
    """Laurent coefficients in zeta - z of E[T(zeta) others]."""
    tfield = FieldSpec.virasoro()
    return laurent_coefficients(
        lambda zeta: correlate_fields([(tfield, zeta)] + list(others), chart),
        z, radius, orders, NODES)


# -- Ward OPE for the bi-vertex ---------------------------------------------

def ward_ope_bivertex_check(z=0.2 + 1.4j, z0=-1.1 + 0.9j, z1=1.0 + 2.2j, alpha=1j * A_SLE4,
                            radius=1e-2, tol=1e-6, chart=Chart.STRIP_INF):
    """Pole coefficients of E[T(zeta) V(z, z0) Phi(z1)] at zeta = z."""
    z, z0, z1 = complex(z), complex(z0), complex(z1)
    _contour_guard(z, radius, [z0, z1], chart)
    vfield = FieldSpec.bivertex(alpha, z0)
    probe = (FieldSpec.phi(), z1)
    coef = _t_laurent([(vfield, z), probe], z, radius, chart, [-3, -2, -1])

    def vphi(u):
        return correlate_fields([(FieldSpec.bivertex(alpha, z0), u), probe], chart)

    base = vphi(z)
    deriv = cauchy_derivative(vphi, z, 1, radius, NODES)
    report = IdentityReport("ward_ope_bivertex")
    lab = _label(z, z0, z1)
    report.add(f"order -3 at {lab}", abs(coef[-3]), 1e-8)
    report.add(f"order -2 at {lab}", _rel(coef[-2], -alpha * alpha / 2 * base), tol)
    report.add(f"order -1 at {lab}", _rel(coef[-1], deriv), tol)
    return report


# -- mode actions on the rooted vertex ----------------------------------------

_MODE_GRID = ((0.1 + 0.5j, -0.3 + 0.9j), (-0.4 + 0.3j, 0.5 + 0.6j), (0.3 + 1.1j, -0.2 + 0.4j))


def mode_action_check(n, grid=_MODE_GRID, radius=1e-2, chart=Chart.HALF_PLANE_PM1, a=A_SLE4):
    """L_n V at correlation level with a Phi probe, for V the rooted vertex of charge i*a."""
    if n not in (-2, -1, 0, 1):
        raise ValueError("n must be one of -2, -1, 0, 1")
    alpha = 1j * a
    h = a * a / 2
    vfield = FieldSpec.rooted(alpha)
    report = IdentityReport(f"mode_action L{n}")
    for z, z1 in grid:
        z, z1 = complex(z), complex(z1)
        _contour_guard(z, radius, [z1, -1.0, 1.0], chart)
        probe = (FieldSpec.phi(), z1)
        mode = _t_laurent([(vfield, z), probe], z, radius, chart, [-n - 2])[-n - 2]

        def vphi(u):
            return correlate_fields([(vfield, u), probe], chart)

        lab = _label(z, z1)
        if n == 1:
            report.add(lab, abs(mode), 1e-7)
        elif n == 0:
            report.add(lab, _rel(mode, h * vphi(z)), 1e-6)
        elif n == -1:
            report.add(lab, _rel(mode, cauchy_derivative(vphi, z, 1, radius, NODES)), 1e-6)
        else:
            report.add(lab, _rel(mode, cauchy_derivative(vphi, z, 2, radius, NODES)), 1e-5)
    return report


# -- Ward's equation for the rooted vertex -------------------------------------

def _ward_grid():
    zs = [complex(x, y) for x, y in zip((-0.5, -0.2, 0.0, 0.25, 0.55), (0.35, 0.8, 0.5, 1.2, 0.6))]
    z1s = [complex(x, y) for x, y in zip((0.4, -0.6, 0.7, -0.3, 0.1), (0.9, 0.5, 0.3, 1.5, 2.0))]
    return [(z, z1) for z in zs for z1 in z1s]


def ward_sides(z, z1, a=A_SLE4, h=1e-4, npoints=5, radius=1e-2):
    """(LHS, RHS) of Ward's equation for V = rooted vertex of charge i*a, probe Phi(z1),
    both in the identity chart of the half-plane with q_-, q_+ = -1, +1."""
    chart = Chart.HALF_PLANE_PM1
    alpha = 1j * a
    weight = a * a / 2
    vfield = FieldSpec.rooted(alpha)
    probe = FieldSpec.phi()
    z, z1 = complex(z), complex(z1)

    def F(u, v):
        return correlate_fields([(vfield, u), (probe, v)], chart)

    unit = correlate_fields([(vfield, z)], chart)
    value = F(z, z1)
    d1, dbar1 = wirtinger(lambda v: F(z, v), z1, h, npoints)
    ctype = probe.conformal_type()
    plus, _ = lie_split(loewner_vector_field(z, z1), ctype)
    _, minus = lie_split(loewner_vector_field(np.conj(z), z1), ctype)
    lhs = plus.apply(value, d1, dbar1, unit) + minus.apply(value, d1, dbar1, unit)

    def Fz(u):
        return F(u, z1)

    dz = cauchy_derivative(Fz, z, 1, radius, NODES)
    dzz = cauchy_derivative(Fz, z, 2, radius, NODES)
    q = 1 - z * z
    rhs = q * q / 2 * dzz - 1.5 * z * q * dz + (3 * z * z - 1) / 2 * weight * value - value / 8
    return lhs, rhs


def ward_equation_check(grid=None, tol=1e-6, h=1e-4, npoints=5, a=A_SLE4):
    """Relative residual of Ward's equation on a 5x5 grid of (z, z1)."""
    grid = _ward_grid() if grid is None else grid
    report = IdentityReport("ward_equation")
    for z, z1 in grid:
        lhs, rhs = ward_sides(z, z1, a, h, npoints)
        report.add(_label(z, z1), _rel(lhs, rhs), tol)
    return report


# -- BPZ-Cardy equation ----------------------------------------------------

def bpz_value(spec, z, xi, a=A_SLE4):
    """hat-E_xi[X](z) in the half-plane chart with the insertion at xi."""
    ins = Insertion(p=2 * np.arctanh(xi), a=a)
    return hat_expectation(spec, z, ins, Chart.HALF_PLANE_PM1)


def bpz_sides(spec, xi, z, h=1e-4, npoints=5, a=A_SLE4):
    if abs(xi) > 0.95:
        raise NearMarkedPoint(f"xi={xi} is within 0.05 of a marked point")
    z = complex(z)
    ctype = spec.conformal_type()
    op = lie_coefficients(loewner_vector_field(xi, z), ctype)
    value = bpz_value(spec, z, xi, a)
    d, dbar = wirtinger(lambda u: bpz_value(spec, u, xi, a), z, h, npoints)
    lhs = op.apply(value, d, dbar)

    def in_xi(s):
        return bpz_value(spec, z, s, a)

    r1 = central_difference(in_xi, xi, h, 1, npoints)
    r2 = central_difference(in_xi, xi, h, 2, npoints)
    q = 1 - xi * xi
    rhs = q * q / 2 * r2 - xi * q * r1
    return lhs, rhs


_BPZ_XIS = tuple(np.linspace(-0.8, 0.8, 10))
_BPZ_POINTS = (0.1 + 0.4j, -0.5 + 0.3j, 0.6 + 0.5j, 0.0 + 1.3j, -0.2 + 2.0j,
               0.9 + 0.9j, -1.5 + 0.7j, 1.7 + 1.2j, 0.35 + 0.15j, -0.7 + 1.6j)


def bpz_cardy_check(spec, xis=_BPZ_XIS, points=_BPZ_POINTS, tol=1e-6, h=1e-4, npoints=5, a=A_SLE4):
    """Relative residual of the BPZ-Cardy equation for a one-point hat observable."""
    report = IdentityReport(f"bpz_cardy {spec.base}")
    for xi in xis:
        for z in points:
            lhs, rhs = bpz_sides(spec, xi, z, h, npoints, a)
            report.add(f"xi={xi:+.3f} z={_label(z)}", _rel(lhs, rhs), tol)
    return report


def step_scaling_ratio(residual_at, h=1e-2):
    """residual(h) / residual(h/2); about 4 for a second-order discretization error."""
    return residual_at(h) / residual_at(h / 2)


def ward_residual_3pt(h):
    return ward_equation_check(h=h, npoints=3, tol=np.inf).max_residual


def bpz_residual_3pt(spec, h):
    return bpz_cardy_check(spec, xis=(-0.3, 0.4), points=(0.1 + 0.4j, -0.5 + 0.9j),
                           h=h, npoints=3, tol=np.inf).max_residual


def run_identity_suite(tolerance_scale=1.0):
    """All identity checks with their default tolerances (scaled)."""
    reports = [
        ward_ope_bivertex_check(),
        ward_ope_bivertex_check(alpha=0.5),
        mode_action_check(1),
        mode_action_check(0),
        mode_action_check(-1),
        mode_action_check(-2),
        ward_equation_check(),
        bpz_cardy_check(FieldSpec.phi()),
        bpz_cardy_check(FieldSpec.current()),
        bpz_cardy_check(FieldSpec.virasoro(), tol=1e-5),
        bpz_cardy_check(FieldSpec.vertex(0.5), tol=1e-5),
    ]
    for rep in reports:
        rep.tolerances = [t * tolerance_scale for t in rep.tolerances]
    scaling = IdentityReport("step_scaling (3-point, h=1e-2 vs 5e-3)")
    scaling.add("ward_equation", abs(step_scaling_ratio(ward_residual_3pt) - 4), 0.5)
    scaling.add("bpz_cardy Phi",
                abs(step_scaling_ratio(lambda h: bpz_residual_3pt(FieldSpec.phi(), h)) - 4), 0.5)
    scaling.add("bpz_cardy T",
                abs(step_scaling_ratio(lambda h: bpz_residual_3pt(FieldSpec.virasoro(), h)) - 4), 0.5)
    reports.append(scaling)
    return reports
