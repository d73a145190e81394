"""The boundary-condition-changing insertion exp(ia Phi+(p, q_-)).

Under the insertion the field keeps its covariance and acquires the harmonic
mean 2a arg tanh((w - p)/4): zero on the Dirichlet arc right of p, 2a*pi on
the arc left of p.  Hat correlations are computed either by shifting means
(``correlate`` with an insertion) or as a ratio of plain correlations with a
rooted vertex field at p; the two routes are compared here.
"""

from dataclasses import dataclass, replace

import numpy as np

from .correlators import CorrelationRequest, FieldSpec, correlate, correlate_fields
from .errors import InsertionSingularity, OutOfDomain
from .geometry import Chart, from_strip, to_strip, transport

A_SLE4 = 1 / np.sqrt(2)


@dataclass(frozen=True)
class Insertion:
    """Insertion at the strip boundary point ``p`` with charge ``a``; root q_- = -inf."""

    p: float = 0.0
    a: float = A_SLE4

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("insertion charge a must be positive")
        if not np.isfinite(self.p) or np.imag(self.p) != 0:
            raise ValueError("insertion point must be a finite point of the Dirichlet arc")


DEFAULT_INSERTION = Insertion()


def _offset(z, ins):
    u = complex(z) - ins.p
    if abs(u) < 1e-12:
        raise InsertionSingularity("evaluation point coincides with the insertion")
    if u.imag < -1e-12 or u.imag > np.pi + 1e-12:
        raise OutOfDomain(f"{z} is outside the strip")
    return u


def mean_shift(z, ins=DEFAULT_INSERTION):
    """2a arg tanh((z - p)/4) for a strip point ``z``."""
    u = _offset(z, ins)
    return 2 * ins.a * float(np.angle(np.tanh(u / 4)))


def hat_current(z, ins=DEFAULT_INSERTION):
    u = _offset(z, ins)
    return -0.5j * ins.a / np.sinh(u / 2)


def hat_virasoro(z, ins=DEFAULT_INSERTION):
    u = _offset(z, ins)
    return 1 / 48 + ins.a**2 / (8 * np.sinh(u / 2) ** 2)


def hat_vertex(alpha, z, ins=DEFAULT_INSERTION):
    u = _offset(z, ins)
    return (4 * np.tan(u.imag / 2)) ** (alpha * alpha) * np.exp(2 * alpha * ins.a * np.angle(np.tanh(u / 4)))


def hat_bivertex(alpha, z, z0, ins=DEFAULT_INSERTION, log_pair=None):
    """Principal-branch closed form; ``log_pair`` overrides log tanh((z - z0)/4)."""
    u, u0 = _offset(z, ins), _offset(z0, ins)
    if log_pair is None:
        log_pair = np.log(np.tanh((u - u0) / 4))
    ratio = np.log(np.tanh(u / 4)) - np.log(np.tanh(u0 / 4))
    return np.exp(alpha * alpha * log_pair - 1j * alpha * ins.a * ratio)


def hat_expectation(spec, z, ins=DEFAULT_INSERTION, chart=Chart.STRIP_INF):
    """Hat one-point function of ``spec`` at ``z`` (a point of ``chart``)."""
    jet = to_strip(chart, z)
    w = jet.value
    base = spec.base
    if base == "BiVertex" and not (spec.j or spec.k):
        jet0 = to_strip(chart, spec.z0)
        a2 = spec.alpha * spec.alpha
        factor = np.exp(-a2 / 2 * (np.log(jet.d1) + np.log(jet0.d1)))
        return factor * hat_bivertex(spec.alpha, w, jet0.value, ins)
    closed = None
    if base == "Phi" and spec.orders == (0, 0):
        closed = mean_shift(w, ins)
    elif spec.orders == (1, 0) and base in ("Phi", "J"):
        closed = hat_current(w, ins)
    elif spec.orders == (0, 1) and base in ("Phi", "Jbar"):
        closed = np.conj(hat_current(w, ins))
    elif base == "T":
        closed = hat_virasoro(w, ins)
    elif base == "Vertex":
        closed = hat_vertex(spec.alpha, w, ins)
    if closed is None:
        return correlate_fields([(spec, z)], chart, ins)
    if chart in (Chart.STRIP_INF, Chart.STRIP0):
        return closed
    return transport(closed, spec.conformal_type(), jet)


def ratio_route(req):
    """E[V*(p) X] / E[V*(p)] with the rooted vertex of charge i*a at p."""
    ins = req.insertion or DEFAULT_INSERTION
    rooted = FieldSpec.rooted(1j * ins.a)
    p_chart = from_strip(req.chart, ins.p).value
    plain = replace(req, insertion=None)
    num = correlate(replace(plain, fields=((rooted, p_chart),) + plain.fields))
    den = correlate(CorrelationRequest(((rooted, p_chart),), req.chart))
    return num / den


def hat_consistency_check(requests):
    """Max |mean-shift route - vertex-ratio route| over the given requests."""
    worst = 0.0
    for req in requests:
        if req.insertion is None:
            req = replace(req, insertion=DEFAULT_INSERTION)
        worst = max(worst, abs(correlate(req) - ratio_route(req)))
    return worst
