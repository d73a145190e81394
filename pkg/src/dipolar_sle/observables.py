"""Martingale-observable catalog evaluated along the Loewner flow.

An observable is a hat correlation function M(z_1, ..., z_n) evaluated in the
moving chart w_t: the strip closed form at w_t(z_j), times the
transformation factor read off the tracked jet of w_t.  Once any of its
points is swallowed the observable is frozen (the flow state freezes the
point's data).
"""

from dataclasses import dataclass

import numpy as np

from .bcc import A_SLE4

ONE_POINT = ("phi", "current", "virasoro", "vertex", "schramm", "perturbed")
TWO_POINT = ("bivertex", "phiphi")


@dataclass(frozen=True)
class ObservableSpec:
    """``kind`` selects the closed form; two-point kinds use consecutive point pairs."""

    name: str
    kind: str
    points: tuple
    alpha: float = 0.0
    a: float = A_SLE4
    scale: float = 4.0

    def __post_init__(self):
        if self.kind not in ONE_POINT + TWO_POINT:
            raise ValueError(f"unknown observable kind {self.kind!r}")
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))

    @property
    def arity(self):
        return 2 if self.kind in TWO_POINT else 1

    @property
    def is_real(self):
        return self.kind in ("phi", "vertex", "schramm", "perturbed", "phiphi")

    def slots(self):
        """Point-index tuples into ``points``: singletons or consecutive pairs."""
        n = len(self.points)
        if self.arity == 1:
            return [(i,) for i in range(n)]
        return [(i, i + 1) for i in range(n - 1)]

    def slot_labels(self):
        return ["-".join(str(i) for i in s) for s in self.slots()]

    def pairs(self):
        return [s for s in self.slots() if len(s) == 2] if self.kind == "bivertex" else []


def _arg_tanh(w, scale=4.0):
    return np.angle(np.tanh(w / scale))


def _green(w1, w2):
    return np.log(np.abs(np.tanh((w1 - np.conj(w2)) / 4))) - np.log(np.abs(np.tanh((w1 - w2) / 4)))


def _columns(state, points):
    index = {complex(z): i for i, z in enumerate(state.z0)}
    try:
        return [index[complex(p)] for p in points]
    except KeyError as exc:
        raise ValueError(f"point {exc} is not tracked by the flow state") from None


def evaluate(spec, state):
    """Observable values, shape (n_paths, n_slots), complex."""
    cols = _columns(state, spec.points)
    a = spec.a
    out = []
    for slot in spec.slots():
        i = cols[slot[0]]
        w, d1 = state.w[:, i], state.d1[:, i]
        k = spec.kind
        if k == "phi":
            val = 2 * a * _arg_tanh(w) + 0j
        elif k == "schramm":
            val = _arg_tanh(w) / np.pi + 0j
        elif k == "perturbed":
            val = _arg_tanh(w, spec.scale) / np.pi + 0j
        elif k == "current":
            val = -0.5j * a / np.sinh(w / 2) * d1
        elif k == "virasoro":
            s = state.schwarzian[:, i]
            val = (1 / 48 + a * a / (8 * np.sinh(w / 2) ** 2)) * d1**2 + s / 12
        elif k == "vertex":
            a2 = spec.alpha**2
            val = ((4 * np.tan(w.imag / 2)) ** a2 * np.exp(2 * spec.alpha * a * _arg_tanh(w))
                   * np.abs(d1) ** (-a2) + 0j)
        else:
            j = cols[slot[1]]
            w2 = state.w[:, j]
            if k == "phiphi":
                val = 2 * _green(w, w2) + (2 * a * _arg_tanh(w)) * (2 * a * _arg_tanh(w2)) + 0j
            else:
                col = state.pairs.index((i, j))
                a2 = spec.alpha**2
                ratio = np.log(np.tanh(w / 4)) - np.log(np.tanh(w2 / 4))
                val = np.exp(a2 * state.logpair[:, col] - 1j * spec.alpha * a * ratio
                             - a2 / 2 * (state.logd1[:, i] + state.logd1[:, j]))
        out.append(val)
    return np.stack(out, axis=1)


def stopped(spec, state):
    """True where some point of the slot has left the domain (shape (n_paths, n_slots))."""
    cols = _columns(state, spec.points)
    dead = ~state.alive
    return np.stack([np.any(dead[:, [cols[i] for i in s]], axis=1) for s in spec.slots()], axis=1)


DEFAULT_POINTS = (0.3 + 1.2j, -1.0 + 0.8j, 1.2 + 2.0j, -0.6 + 2.4j, 2.0 + 1.5j)


def catalog(points=DEFAULT_POINTS):
    """The tested family: one entry per transformation law, plus two-point fields."""
    return [
        ObservableSpec("Phi", "phi", points),
        ObservableSpec("J", "current", points),
        ObservableSpec("T", "virasoro", points),
        ObservableSpec("Vertex_0.25", "vertex", points, alpha=0.25),
        ObservableSpec("Vertex_0.5", "vertex", points, alpha=0.5),
        ObservableSpec("BiVertex_0.5", "bivertex", points, alpha=0.5),
        ObservableSpec("PhiPhi", "phiphi", points),
    ]


def schramm(points=DEFAULT_POINTS):
    return ObservableSpec("Schramm", "schramm", points)


def negative_control(points=DEFAULT_POINTS, scale=2.0):
    """(1/pi) arg tanh(w/scale): not a martingale unless scale = 4, so its drift must be detected."""
    return ObservableSpec("Perturbed", "perturbed", points, scale=scale)


def by_name(name, points=DEFAULT_POINTS):
    for spec in catalog(points) + [schramm(points), negative_control(points)]:
        if spec.name == name:
            return spec
    raise KeyError(name)


def schramm_probability(z):
    """(1/pi) arg tanh(z/4): probability that z lies left of the curve."""
    return float(np.angle(np.tanh(complex(z) / 4)) / np.pi)


def tracked_pairs(specs):
    """Union of point pairs (as state column indices) needed by bivertex specs."""
    points = []
    for spec in specs:
        for p in spec.points:
            if p not in points:
                points.append(p)
    pairs = []
    for spec in specs:
        for i, j in spec.pairs():
            pair = (points.index(spec.points[i]), points.index(spec.points[j]))
            if pair not in pairs:
                pairs.append(pair)
    return points, pairs
