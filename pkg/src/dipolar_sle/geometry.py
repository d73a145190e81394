"""Canonical uniformizing maps, Schwarzian derivatives and transformation laws.

Every chart is described by its map *to the strip* S = {0 < Im w < pi}
(Dirichlet on R, Neumann on R + pi*i, marked points at -inf and +inf).
Maps between two charts are composed through the strip, and derivative
jets (h, h', h'', h''') travel alongside the values.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateMap,
    InsufficientJet,
    OutOfDomain,
    PoleAtDriving,
    PoleAtMarkedPoint,
)

MARKED_EPS = 1e-9
_DOMAIN_TOL = 1e-12


class Chart(enum.Enum):
    STRIP_INF = "strip"        # (S, -inf, +inf)
    STRIP0 = "strip0"          # (S, 0, -inf, +inf)
    HALF_PLANE_PM1 = "hpm1"    # (H, -1, 1)
    HALF_PLANE_0INF = "h0inf"  # (H, 0, inf)
    QUADRANT = "quadrant"      # first quadrant, Dirichlet on R+, Neumann on iR+


@dataclass(frozen=True)
class Jet:
    """Value and first three derivatives of a holomorphic map at a point."""

    value: complex
    d1: complex = 1.0
    d2: complex = 0.0
    d3: complex = 0.0

    @classmethod
    def identity(cls, z):
        return cls(complex(z), 1.0, 0.0, 0.0)

    def after(self, inner):
        """Jet of ``self o inner``, where ``self`` was taken at ``inner.value``."""
        g1, g2, g3 = inner.d1, inner.d2, inner.d3
        f1, f2, f3 = self.d1, self.d2, self.d3
        return Jet(
            self.value,
            f1 * g1,
            f2 * g1**2 + f1 * g2,
            f3 * g1**3 + 3 * f2 * g1 * g2 + f1 * g3,
        )

    @property
    def schwarzian(self):
        return schwarzian(self.d1, self.d2, self.d3)


def schwarzian(d1, d2, d3):
    """S_h = h'''/h' - (3/2)(h''/h')**2."""
    d1 = np.asarray(d1)
    if np.any(d1 == 0):
        raise DegenerateMap("h' vanishes; Schwarzian undefined")
    r = d2 / d1
    out = d3 / d1 - 1.5 * r * r
    return out[()] if isinstance(out, np.ndarray) else out


# -- canonical charts -------------------------------------------------------

def _check_strip(w):
    if not np.isfinite(w):
        raise PoleAtMarkedPoint(f"{w} is at a marked point of the strip")
    if w.imag < -_DOMAIN_TOL or w.imag > np.pi + _DOMAIN_TOL:
        raise OutOfDomain(f"{w} is outside the closed strip")


def _check_upper(z):
    if z.imag < -_DOMAIN_TOL:
        raise OutOfDomain(f"{z} is outside the closed upper half-plane")


def to_strip(chart, z):
    """Jet of the canonical map from ``chart`` onto the strip at ``z``."""
    z = complex(z)
    if chart in (Chart.STRIP_INF, Chart.STRIP0):
        _check_strip(z)
        return Jet.identity(z)
    if not np.isfinite(z):
        raise PoleAtMarkedPoint(f"{z} is at infinity")
    if chart is Chart.HALF_PLANE_PM1:
        _check_upper(z)
        if abs(z - 1) < MARKED_EPS or abs(z + 1) < MARKED_EPS:
            raise PoleAtMarkedPoint(f"{z} is at q_-/q_+ = -1/+1")
        q = 1 - z * z
        w = np.log((1 + z) / (1 - z))
        return Jet(w, 2 / q, 4 * z / q**2, (4 + 12 * z * z) / q**3)
    if chart is Chart.HALF_PLANE_0INF:
        _check_upper(z)
        if abs(z) < MARKED_EPS:
            raise PoleAtMarkedPoint(f"{z} is at q_- = 0")
        return Jet(np.log(z), 1 / z, -1 / z**2, 2 / z**3)
    if chart is Chart.QUADRANT:
        if z.real < -_DOMAIN_TOL or z.imag < -_DOMAIN_TOL:
            raise OutOfDomain(f"{z} is outside the closed first quadrant")
        if abs(z) < MARKED_EPS:
            raise PoleAtMarkedPoint(f"{z} is at the corner 0")
        return Jet(2 * np.log(z), 2 / z, -2 / z**2, 4 / z**3)
    raise ValueError(f"unknown chart {chart!r}")


def from_strip(chart, w):
    """Jet of the inverse canonical map (strip onto ``chart``) at ``w``."""
    w = complex(w)
    _check_strip(w)
    if chart in (Chart.STRIP_INF, Chart.STRIP0):
        return Jet.identity(w)
    if chart is Chart.HALF_PLANE_PM1:
        z = np.tanh(w / 2)
        d1 = (1 - z * z) / 2
        return Jet(z, d1, -z * d1, d1 * (3 * z * z - 1) / 2)
    if chart is Chart.HALF_PLANE_0INF:
        e = np.exp(w)
        return Jet(e, e, e, e)
    if chart is Chart.QUADRANT:
        e = np.exp(w / 2)
        return Jet(e, e / 2, e / 4, e / 8)
    raise ValueError(f"unknown chart {chart!r}")


def map_point(chart_from, chart_to, z):
    """Jet of the canonical map chart_from -> chart_to at ``z``."""
    inner = to_strip(chart_from, z)
    outer = from_strip(chart_to, inner.value)
    return outer.after(inner)


# -- transformation laws ----------------------------------------------------

@dataclass(frozen=True)
class ConformalType:
    """How a field's value changes under a change of chart.

    ``kind`` is one of "differential", "pre_pre_schwarzian",
    "pre_schwarzian", "schwarzian".
    """

    kind: str
    lam: complex = 0.0
    lam_star: complex = 0.0
    mu: complex = 0.0

    @classmethod
    def differential(cls, lam, lam_star=0.0):
        return cls("differential", lam, lam_star)

    @classmethod
    def schwarzian_form(cls, mu):
        return cls("schwarzian", mu=mu)

    @classmethod
    def pre_schwarzian(cls, mu):
        return cls("pre_schwarzian", mu=mu)

    @classmethod
    def pre_pre_schwarzian(cls, mu):
        return cls("pre_pre_schwarzian", mu=mu)

    @property
    def jet_order(self):
        return {"differential": 1, "pre_pre_schwarzian": 1,
                "pre_schwarzian": 2, "schwarzian": 3}[self.kind]


def _cpow(base, expo):
    if expo == 0:
        return 1.0
    return np.exp(expo * np.log(base))


def transport(value, ctype, jet):
    """Pull a field value back along a transition map.

    ``value`` is the field in chart B evaluated at ``h(z)``; ``jet`` holds
    (h', h'', h''') at ``z`` for the transition map h from chart A to chart B.
    Returns the field in chart A at ``z``.  Pass ``None`` for derivatives
    that are unavailable.
    """
    d1, d2, d3 = jet.d1, jet.d2, jet.d3
    needed = (d1, d2, d3)[: ctype.jet_order]
    if any(d is None for d in needed):
        raise InsufficientJet(f"{ctype.kind} needs {ctype.jet_order} derivatives")
    if d1 == 0:
        raise DegenerateMap("transition map has vanishing derivative")
    if ctype.kind == "differential":
        return _cpow(d1, ctype.lam) * _cpow(np.conj(d1), ctype.lam_star) * value
    if ctype.kind == "pre_pre_schwarzian":
        return value + ctype.mu * np.log(d1)
    if ctype.kind == "pre_schwarzian":
        return d1 * value + ctype.mu * d2 / d1
    if ctype.kind == "schwarzian":
        return d1 * d1 * value + ctype.mu * schwarzian(d1, d2, d3)
    raise ValueError(f"unknown conformal type {ctype.kind!r}")


# -- Lie derivatives --------------------------------------------------------

@dataclass(frozen=True)
class LieOperator:
    """L X = d*dX + dbar*dbarX + mult*X + const, pointwise coefficients."""

    d: complex = 0.0
    dbar: complex = 0.0
    mult: complex = 0.0
    const: complex = 0.0

    def __add__(self, other):
        return LieOperator(self.d + other.d, self.dbar + other.dbar,
                           self.mult + other.mult, self.const + other.const)

    def scale(self, c):
        return LieOperator(c * self.d, c * self.dbar, c * self.mult, c * self.const)

    def apply(self, value, d_value=0.0, dbar_value=0.0, unit=1.0):
        """Apply to a correlation; ``unit`` multiplies the constant term
        (it is E[rest of the string] inside a correlation)."""
        return (self.d * d_value + self.dbar * dbar_value
                + self.mult * value + self.const * unit)


def lie_coefficients(vjet, ctype):
    """Coefficients of L_v for a field of type ``ctype``.

    ``vjet`` is (v, v', v'', v''') at the evaluation point.
    """
    v, v1, v2, v3 = vjet
    vb, v1b = np.conj(v), np.conj(v1)
    if ctype.kind == "differential":
        return LieOperator(v, vb, ctype.lam * v1 + ctype.lam_star * v1b, 0.0)
    if ctype.kind == "pre_pre_schwarzian":
        return LieOperator(v, vb, 0.0, ctype.mu * v1)
    if ctype.kind == "pre_schwarzian":
        return LieOperator(v, vb, v1, ctype.mu * v2)
    if ctype.kind == "schwarzian":
        return LieOperator(v, vb, 2 * v1, ctype.mu * v3)
    raise ValueError(f"unknown conformal type {ctype.kind!r}")


def lie_split(vjet, ctype):
    """(L_v^+, L_v^-) from L^+- = (L_v -+ i L_{iv}) / 2."""
    full = lie_coefficients(vjet, ctype)
    rotated = lie_coefficients(tuple(1j * c for c in vjet), ctype)
    plus = (full + rotated.scale(-1j)).scale(0.5)
    minus = (full + rotated.scale(1j)).scale(0.5)
    return plus, minus


def loewner_vector_field(xi, z):
    """(v, v', v'', v''') of v_xi(z) = (1-z^2)/2 * (1-xi z)/(xi-z) in (H,-1,1)."""
    z = complex(z)
    gap = xi - z
    if abs(gap) < MARKED_EPS:
        raise PoleAtDriving(f"z={z} coincides with the driving point {xi}")
    res = 0.5 * (1 - xi * xi) ** 2
    poly = (xi - xi**3 / 2) + 0.5 * (1 - xi * xi) * z - 0.5 * xi * z * z
    return (
        poly + res / gap,
        0.5 * (1 - xi * xi) - xi * z + res / gap**2,
        -xi + 2 * res / gap**3,
        6 * res / gap**4,
    )
