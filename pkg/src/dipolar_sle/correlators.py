"""Correlation functions of the mixed Dirichlet/Neumann Gaussian free field.

Everything is computed in the strip S = {0 < Im w < pi} (Dirichlet on R,
Neumann on R + pi*i) and pulled back to other charts through the canonical
maps of :mod:`dipolar_sle.geometry`.

The basic building block is ``ell(u) = log tanh(u/4)``, for which

    2 G(z1, z2) = ell(z1 - conj z2) + ell(conj z1 - z2)
                  - ell(z1 - z2) - ell(conj z1 - conj z2),

so every derivative kernel is a signed sum of ``ell^(n)`` terms.
"""

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import hermite_e

from .errors import BranchCutCrossing, DiagonalSingularity, InsertionSingularity, OutOfDomain, Unsupported
from .geometry import Chart, ConformalType, to_strip

MAX_DERIV = 3
_SING_TOL = 1e-12
_DOMAIN_TOL = 1e-12


# -- the scalar building block ------------------------------------------------

def _ell_polys(nmax):
    # ell^(n)(u) = csch(u/2) * P_n(coth(u/2))
    c = Polynomial([0, 1])
    polys = [None, Polynomial([0.5])]
    for _ in range(nmax - 1):
        p = polys[-1]
        polys.append(-0.5 * (c * p + (c * c - 1) * p.deriv()))
    return polys


_ELL_POLYS = _ell_polys(2 * MAX_DERIV + 2)


def _guard(u):
    s = np.sinh(np.asarray(u) / 2)
    if np.any(np.abs(s) < _SING_TOL):
        raise DiagonalSingularity("kernel evaluated at coincident (or mirrored) points")
    return s


def ell(u):
    """Principal ``log tanh(u/4)``."""
    _guard(u)
    return np.log(np.tanh(np.asarray(u, dtype=complex) / 4))[()]


def ell_deriv(u, n):
    """n-th derivative of ``log tanh(u/4)`` (n = 0 gives the principal log)."""
    if n == 0:
        return ell(u)
    if n >= len(_ELL_POLYS):
        raise Unsupported(f"derivative order {n} of log tanh not tabulated")
    s = _guard(u)
    c = np.cosh(np.asarray(u) / 2) / s
    return (_ELL_POLYS[n](c) / s)[()]


def _ell_right(u):
    # log tanh(u/4) continued with its cut on the positive real axis
    u = complex(u)
    if abs(u.imag) < _SING_TOL and u.real > 0:
        raise BranchCutCrossing(f"u={u} lies on the declared cut of the chiral kernel")
    _guard(u)
    return np.log(-np.tanh(u / 4)) + 1j * np.pi


# -- Green's functions ------------------------------------------------------

def _check_closed_strip(*pts):
    for p in pts:
        p = np.asarray(p)
        if not np.all(np.isfinite(p)):
            raise OutOfDomain("points at the marked points +-inf are not allowed")
        if np.any(p.imag < -_DOMAIN_TOL) or np.any(p.imag > np.pi + _DOMAIN_TOL):
            raise OutOfDomain("point outside the closed strip")


def green_strip(zeta, z):
    """G(zeta, z) = log|tanh((zeta - conj z)/4)| - log|tanh((zeta - z)/4)|."""
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_closed_strip(zeta, z)
    if np.any(np.abs(zeta - z) < _SING_TOL):
        raise DiagonalSingularity("green_strip at coincident points")
    out = np.log(np.abs(np.tanh((zeta - np.conj(z)) / 4))) - np.log(np.abs(np.tanh((zeta - z) / 4)))
    return out[()]


def green_strip_xy(x, y, z):
    """G((x, y), z) written with real-analytic pieces only.

    Uses |tanh(a + ib)|^2 = (cosh 2a - cos 2b)/(cosh 2a + cos 2b), so complex
    ``x`` or ``y`` give the analytic continuation and complex-step
    differentiation is exact to rounding.
    """
    zr, zi = np.real(z), np.imag(z)
    c = np.cosh((x - zr) / 2)

    def log_abs2(b):
        cb = np.cos(b / 2)
        return np.log((c - cb) / (c + cb))

    return 0.5 * (log_abs2(y + zi) - log_abs2(y - zi))


def green_quadrant(zeta, z):
    """Green's function of the first quadrant, Dirichlet on R+, Neumann on iR+."""
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(zeta - z) < _SING_TOL):
        raise DiagonalSingularity("green_quadrant at coincident points")
    zb = np.conj(z)
    out = np.log(np.abs((zeta - zb) * (zeta + z) / ((zeta - z) * (zeta + zb))))
    return out[()]


def kernel_J_Phi(zeta, z):
    """E[J(zeta) Phi(z)] in the strip."""
    if abs(zeta - z) < _SING_TOL or abs(zeta - np.conj(z)) < _SING_TOL:
        raise DiagonalSingularity("kernel_J_Phi at a singular configuration")
    return -0.5 / np.sinh((zeta - z) / 2) + 0.5 / np.sinh((zeta - np.conj(z)) / 2)


def kernel_J_J(zeta, z):
    """E[J(zeta) J(z)] in the strip."""
    if abs(zeta - z) < _SING_TOL:
        raise DiagonalSingularity("kernel_J_J at coincident points")
    u = (zeta - z) / 2
    return -0.25 / (np.sinh(u) * np.tanh(u))


def complex_green(z, z1):
    """G+(z, z1) with 2 Re G+ = G, on the declared branch.

    The branch is continuous along paths from q_- = -inf in z that avoid the
    horizontal ray to the right of z1; on that ray BranchCutCrossing is raised.
    """
    return 0.5 * (ell(z - np.conj(z1)) - _ell_right(z - z1))


# -- atoms and covariances --------------------------------------------------
# A base atom is ("d", w, j, k) for the strip field d^j dbar^k Phi(w), or
# ("plus", w, w0) for Phi+(w, w0) with w0=None meaning q_-.  A field atom is
# a linear combination: a tuple of (coefficient, base atom) pairs.

def _cov_dd(a, b):
    _, z1, j1, k1 = a
    _, z2, j2, k2 = b
    if j1 == k1 == j2 == k2 == 0:
        return 2 * green_strip(z1, z2)
    z1b, z2b = np.conj(z1), np.conj(z2)
    out = 0.0
    if k1 == 0 and j2 == 0:
        out += (-1) ** k2 * ell_deriv(z1 - z2b, j1 + k2)
    if j1 == 0 and k2 == 0:
        out += (-1) ** j2 * ell_deriv(z1b - z2, k1 + j2)
    if k1 == 0 and k2 == 0:
        out -= (-1) ** j2 * ell_deriv(z1 - z2, j1 + j2)
    if j1 == 0 and j2 == 0:
        out -= (-1) ** k2 * ell_deriv(z1b - z2b, k1 + k2)
    return out


def _plus_half(w, z1, j, k):
    # derivative of 2 G+(w, z1) in z1
    if w is None:
        return 0.0
    if j == 0 and k == 0:
        return ell(w - np.conj(z1)) - _ell_right(w - z1)
    if j == 0:
        return (-1) ** k * ell_deriv(w - np.conj(z1), k)
    if k == 0:
        return -((-1) ** j) * ell_deriv(w - z1, j)
    return 0.0


def _cov_base(a, b):
    if a[0] == "d" and b[0] == "d":
        return _cov_dd(a, b)
    if a[0] == "plus" and b[0] == "plus":
        raise Unsupported("Phi+ x Phi+ covariance depends on a winding sector")
    if a[0] == "d":
        a, b = b, a
    _, w, w0 = a
    _, z1, j, k = b
    return _plus_half(w, z1, j, k) - _plus_half(w0, z1, j, k)


def covariance(a, b):
    """Covariance of two field atoms (linear combinations of base atoms)."""
    return sum(ca * cb * _cov_base(ba, bb) for ca, ba in a for cb, bb in b)


def _ell_p(u):
    if u is None:
        return 1j * np.pi
    return ell(u)


def _hat_mean_base(base, p, a):
    if base[0] == "plus":
        _, w, w0 = base
        if abs(w - p) < _SING_TOL:
            raise InsertionSingularity("field placed on the insertion point")
        return -1j * a * (_ell_p(w - p) - _ell_p(None if w0 is None else w0 - p))
    _, w, j, k = base
    u = w - p
    if abs(u) < _SING_TOL:
        raise InsertionSingularity("field placed on the insertion point")
    if j == 0 and k == 0:
        return 2 * a * np.angle(np.tanh(u / 4))
    if k == 0:
        return -1j * a * ell_deriv(u, j)
    if j == 0:
        return 1j * a * np.conj(ell_deriv(u, k))
    return 0.0


def hat_mean(atom, p, a):
    """Mean of a field atom under the insertion at strip point ``p``."""
    return sum(c * _hat_mean_base(b, p, a) for c, b in atom)


# -- field descriptors ------------------------------------------------------

_BASES = ("Phi", "PhiPlus", "J", "Jbar", "T", "Vertex", "BiVertex", "RootedVertex")


@dataclass(frozen=True)
class FieldSpec:
    """A field of the OPE family.

    ``j``/``k`` are extra d/dbar orders (Phi, J, Jbar only); ``alpha`` is the
    charge of vertex fields; ``z0`` is the second point of PhiPlus/BiVertex,
    in the same chart as the field point (None means q_-).
    """

    base: str
    j: int = 0
    k: int = 0
    alpha: complex = 0.0
    z0: complex | None = None

    def __post_init__(self):
        if self.base not in _BASES:
            raise ValueError(f"unknown field base {self.base!r}")
        if self.j < 0 or self.k < 0:
            raise ValueError("derivative orders must be non-negative")

    @classmethod
    def phi(cls, j=0, k=0):
        return cls("Phi", j, k)

    @classmethod
    def current(cls):
        return cls("J")

    @classmethod
    def virasoro(cls):
        return cls("T")

    @classmethod
    def vertex(cls, alpha):
        return cls("Vertex", alpha=alpha)

    @classmethod
    def bivertex(cls, alpha, z0):
        return cls("BiVertex", alpha=alpha, z0=z0)

    @classmethod
    def rooted(cls, alpha):
        return cls("RootedVertex", alpha=alpha)

    @property
    def orders(self):
        """Total (d, dbar) orders acting on Phi."""
        extra = {"J": (1, 0), "Jbar": (0, 1)}.get(self.base, (0, 0))
        return self.j + extra[0], self.k + extra[1]

    def conformal_type(self):
        """Transformation law at the main point (and at z0 for BiVertex)."""
        a2 = self.alpha * self.alpha
        if self.base == "Phi" and self.orders == (0, 0) or self.base == "PhiPlus":
            return ConformalType.differential(0, 0)
        if self.orders == (1, 0):
            return ConformalType.differential(1, 0)
        if self.orders == (0, 1):
            return ConformalType.differential(0, 1)
        if self.base == "T":
            return ConformalType.schwarzian_form(1 / 12)
        if self.base == "Vertex":
            return ConformalType.differential(-a2 / 2, -a2 / 2)
        if self.base in ("BiVertex", "RootedVertex"):
            return ConformalType.differential(-a2 / 2, 0)
        raise Unsupported(f"{self} is not a differential or a form")


@dataclass(frozen=True)
class Term:
    coef: complex
    atoms: tuple = ()
    exp: tuple | None = None  # (alpha, atom)


def _fdb(jet, j):
    # holomorphic Faa di Bruno: d^j (f o W) = sum_a c_a (d^a f) o W
    w1, w2, w3 = jet.d1, jet.d2, jet.d3
    return {0: [(0, 1.0)], 1: [(1, w1)], 2: [(2, w1**2), (1, w2)],
            3: [(3, w1**3), (2, 3 * w1 * w2), (1, w3)]}[j]


def _deriv_atom(jet, j, k):
    if j > MAX_DERIV or k > MAX_DERIV:
        raise Unsupported(f"derivative order ({j},{k}) exceeds {MAX_DERIV}")
    w = jet.value
    return tuple((ca * np.conj(cb), ("d", w, a, b))
                 for a, ca in _fdb(jet, j) for b, cb in _fdb(jet, k))


def _log_tanh_pair(w, w0):
    return np.log(np.tanh((w - w0) / 4))


def field_terms(spec, z, chart=Chart.STRIP_INF):
    """Expand a field at chart point ``z`` into Wick terms over strip atoms."""
    jet = to_strip(chart, z)
    w = jet.value
    base = spec.base
    if base in ("Phi", "J", "Jbar"):
        j, k = spec.orders
        return [Term(1.0, (_deriv_atom(jet, j, k),))]
    if spec.j or spec.k:
        raise Unsupported(f"derivatives of {base} are not supported")
    if base == "T":
        current = ((jet.d1, ("d", w, 1, 0)),)
        const = jet.schwarzian / 12 + jet.d1**2 / 48
        return [Term(-0.5, (current, current)), Term(const)]
    alpha = spec.alpha
    a2 = alpha * alpha
    if base == "Vertex":
        c = 4 / abs(jet.d1) * np.tan(w.imag / 2)
        return [Term(c**a2, exp=(alpha, ((1.0, ("d", w, 0, 0)),)))]
    if base == "PhiPlus":
        w0 = None if spec.z0 is None else to_strip(chart, spec.z0).value
        return [Term(1.0, (((1.0, ("plus", w, w0)),),))]
    if base == "BiVertex":
        if spec.z0 is None:
            raise ValueError("BiVertex needs a second point z0")
        jet0 = to_strip(chart, spec.z0)
        pre = np.exp(-a2 / 2 * (np.log(jet.d1) + np.log(jet0.d1))
                     + a2 * _log_tanh_pair(w, jet0.value))
        return [Term(pre, exp=(alpha, ((1.0, ("plus", w, jet0.value)),)))]
    if base == "RootedVertex":
        pre = np.exp(-a2 / 2 * np.log(jet.d1))
        return [Term(pre, exp=(alpha, ((1.0, ("plus", w, None)),)))]
    raise Unsupported(base)


# -- Wick engine ------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationRequest:
    """Ordered (FieldSpec, point) pairs in ``chart``; optional insertion.

    ``insertion`` is any object with strip attributes ``p`` and ``a``
    (see :class:`dipolar_sle.bcc.Insertion`).
    """

    fields: tuple
    chart: Chart = Chart.STRIP_INF
    insertion: object = None

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))


def _matchings(items, cov):
    if not items:
        return 1.0
    (g, atom, s), rest = items[0], items[1:]
    total = s * _matchings(rest, cov) if s != 0 else 0.0
    for i, (g2, other, _) in enumerate(rest):
        if g2 != g:
            total += cov(atom, other) * _matchings(rest[:i] + rest[i + 1:], cov)
    return total


def _term_product(terms, mean):
    cache = {}

    def cov(a, b):
        key = (id(a), id(b))
        if key not in cache:
            cache[key] = covariance(a, b)
        return cache[key]

    coef = np.prod([t.coef for t in terms])
    if coef == 0:
        return 0.0
    exps = [(g, t.exp) for g, t in enumerate(terms) if t.exp is not None]
    expo = 0.0
    for (ga, (alpha, ea)), (gb, (beta, eb)) in itertools.combinations(exps, 2):
        expo += alpha * beta * cov(ea, eb)
    for _, (alpha, ea) in exps:
        expo += alpha * mean(ea)
    items = []
    for g, t in enumerate(terms):
        for atom in t.atoms:
            s = mean(atom) + sum(alpha * cov(atom, e) for g2, (alpha, e) in exps if g2 != g)
            items.append((g, atom, s))
    return coef * np.exp(expo) * _matchings(items, cov)


def _check_distinct(req):
    pts = []
    for spec, z in req.fields:
        pts.append(complex(z))
        if spec.z0 is not None:
            pts.append(complex(spec.z0))
    for a, b in itertools.combinations(pts, 2):
        if abs(a - b) < _SING_TOL:
            raise DiagonalSingularity(f"coincident points {a} and {b}")


def correlate(req):
    """Correlation function of the requested string of fields."""
    _check_distinct(req)
    groups = [field_terms(spec, z, req.chart) for spec, z in req.fields]
    ins = req.insertion
    if ins is None:
        def mean(atom):
            return 0.0
    else:
        def mean(atom):
            return hat_mean(atom, ins.p, ins.a)
    total = 0.0
    for combo in itertools.product(*groups):
        total += _term_product(combo, mean)
    return complex(total)


def correlate_fields(fields, chart=Chart.STRIP_INF, insertion=None):
    """Shorthand for ``correlate(CorrelationRequest(fields, chart, insertion))``."""
    return correlate(CorrelationRequest(tuple(fields), chart, insertion))


# -- OPE coefficients -------------------------------------------------------

def wick_power_moments(two_c, nmax):
    """E[Phi^{*n}] for n = 0..nmax from the recursion Phi^{*(m+1)} = Phi * Phi^{*m}.

    ``two_c`` is the OPE constant 2c(z); the state is the vector of
    Wick-power coefficients.
    """
    poly = np.zeros(nmax + 2, dtype=complex)
    poly[0] = 1.0
    moments = [1.0]
    for _ in range(nmax):
        nxt = np.zeros_like(poly)
        nxt[1:] += poly[:-1]
        nxt[:-1] += two_c * np.arange(1, len(poly)) * poly[1:]
        poly = nxt
        moments.append(poly[0])
    return np.array(moments)


def hermite_moment(two_c, n):
    """E[Phi^{*n}] from inverting the Hermite relation for Wick powers."""
    coeffs = hermite_e.poly2herme([0] * n + [1])
    return two_c ** (n / 2) * coeffs[0]


def ope_constant(z, chart=Chart.STRIP_INF):
    """2c(z) = 2 log((4 / |w'|) tan(Im w / 2))."""
    jet = to_strip(chart, z)
    return 2 * np.log(4 / abs(jet.d1) * np.tan(jet.value.imag / 2))


def ope_constant_numeric(z, eps=1e-4):
    """lim E[Phi(zeta) Phi(z)] - log 1/|zeta - z|^2 at |zeta - z| = eps (strip)."""
    return 2 * green_strip(z + eps, z) + 2 * np.log(eps)


_DEFAULT_GRID = (0.3 + 1.2j, -1.0 + 0.8j, 1.2 + 2.0j, -0.6 + 2.4j, 2.0 + 1.5j, 0.5j, 0.1 + 3.0j)


def ope_coefficient_check(order, points=_DEFAULT_GRID, eps=1e-4):
    """Max relative residual of the n-th OPE power moment over ``points``.

    The numeric route extracts 2c from the two-point function and builds
    E[Phi^{*n}] by the product recursion; the closed route inverts the
    Hermite relation with the closed-form 2c.
    """
    if not 1 <= order <= 6:
        raise ValueError("order must be between 1 and 6")
    worst = 0.0
    for z in points:
        numeric = wick_power_moments(ope_constant_numeric(z, eps), order)[order]
        closed = hermite_moment(ope_constant(z), order)
        scale = max(abs(closed), 1.0)
        worst = max(worst, abs(numeric - closed) / scale)
    return worst


def vertex_series_check(alpha=0.3, nterms=20, points=_DEFAULT_GRID, chart=Chart.STRIP_INF):
    """Max residual of sum_n alpha^n E[Phi^{*n}]/n! against E[V^alpha]."""
    worst = 0.0
    for z in points:
        moments = wick_power_moments(ope_constant(z, chart), nterms)
        series = sum(alpha**n * moments[n] / factorial(n) for n in range(nterms + 1))
        closed = correlate_fields([(FieldSpec.vertex(alpha), z)], chart)
        worst = max(worst, abs(series - closed))
    return worst


__all__ = [
    "CorrelationRequest", "FieldSpec", "Term", "complex_green",
    "correlate", "correlate_fields", "covariance", "ell", "ell_deriv",
    "field_terms", "green_quadrant", "green_strip", "green_strip_xy",
    "hat_mean", "hermite_moment", "kernel_J_J",
    "kernel_J_Phi", "ope_coefficient_check", "ope_constant",
    "ope_constant_numeric", "vertex_series_check", "wick_power_moments",
]
