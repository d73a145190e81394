"""Ensembles of dipolar SLE paths, drift tests and Schramm-probability estimates."""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import erfc, sqrt

import numpy as np

from .errors import ConfigError
from .loewner import LEFT, UNDECIDED, LoewnerState, classify_side, step
from .observables import (
    DEFAULT_POINTS, by_name, catalog, evaluate, schramm_probability, stopped, tracked_pairs,
)

Z_PASS = 3.5
MIN_SAMPLES = 100
_BLOCK = 500


@dataclass
class EnsembleConfig:
    n_paths: int = 4000
    kappa: float = 4.0
    dt: float = 1e-3
    T: float = 1.0
    seed: int = 0
    observables: list = field(default_factory=lambda: [s.name for s in catalog()])
    points: list = field(default_factory=lambda: list(DEFAULT_POINTS))
    checkpoints: list = field(default_factory=lambda: [0.0, 0.5, 1.0])
    workers: int = 1
    chunk_size: int = 500
    stop_radius: float = 0.5  # localize: stop a point once its conformal radius in D_t drops below this

    def __post_init__(self):
        self.points = [complex(p) for p in self.points]
        self.checkpoints = sorted(float(t) for t in self.checkpoints)
        self.validate()

    def validate(self):
        if self.n_paths < 1:
            raise ConfigError("n_paths must be positive")
        if self.kappa < 0:
            raise ConfigError("kappa must be non-negative")
        if not self.dt > 0 or not self.T > 0:
            raise ConfigError("dt and T must be positive")
        if any(t < 0 or t > self.T + 1e-12 for t in self.checkpoints):
            raise ConfigError("checkpoints must lie in [0, T]")
        if not self.stop_radius >= 0:
            raise ConfigError("stop_radius must be non-negative")
        if any(p.imag < 0 or p.imag > np.pi for p in self.points):
            raise ConfigError("evaluation points must lie in the closed strip")
        for name in self.observables:
            try:
                by_name(name)
            except KeyError:
                raise ConfigError(f"unknown observable {name!r}") from None

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))

    def checkpoint_steps(self):
        return [int(round(t / self.dt)) for t in self.checkpoints]

    def specs(self):
        return [by_name(name, tuple(self.points)) for name in self.observables]

    def to_dict(self):
        d = asdict(self)
        d["points"] = [[p.real, p.imag] for p in self.points]
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "points" in data:
            data["points"] = [complex(*p) if isinstance(p, (list, tuple)) else complex(p)
                              for p in data["points"]]
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc


@dataclass
class ObservableTable:
    """values[name] has shape (n_paths, n_checkpoints, n_slots); same for stopped[name]."""

    times: list
    values: dict
    stopped: dict
    slot_labels: dict
    real: dict

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path_id", "t", "observable", "point_id", "re", "im", "stopped"])
            for name, vals in self.values.items():
                stop = self.stopped[name]
                for p in range(vals.shape[0]):
                    for c, t in enumerate(self.times):
                        for s, lab in enumerate(self.slot_labels[name]):
                            v = vals[p, c, s]
                            writer.writerow([p, f"{t:.17g}", name, lab, f"{v.real:.17g}",
                                             f"{v.imag:.17g}", int(stop[p, c, s])])


def _simulate_chunk(args):
    cfg, path_ids, want_sides, eps, specs = args
    points, pairs = tracked_pairs(specs)
    if want_sides:
        points = list(cfg.points)
    n = len(path_ids)
    state = LoewnerState.initial(points, n, pairs, cfg.stop_radius)
    marks = cfg.checkpoint_steps()
    vals = {s.name: [] for s in specs}
    stops = {s.name: [] for s in specs}
    current = {s.name: evaluate(s, state) for s in specs}
    frozen = {s.name: stopped(s, state) for s in specs}

    def record():
        for s in specs:
            vals[s.name].append(current[s.name].copy())
            stops[s.name].append(frozen[s.name].copy())

    for _ in range(marks.count(0)):
        record()
    gens = _generators(cfg.seed, path_ids)
    scale = np.sqrt(cfg.kappa * cfg.dt)
    k = 0
    while k < cfg.n_steps:
        block = min(_BLOCK, cfg.n_steps - k)
        inc = scale * np.stack([g.standard_normal(block) for g in gens])
        for b in range(block):
            prev = state
            state = step(state, inc[:, b], cfg.dt)
            k += 1
            changed = np.any(prev.alive != state.alive)
            at_mark = k in marks
            for s in specs:
                _advance(s, prev, state, current, frozen, at_mark, changed)
            for _ in range(marks.count(k)):
                record()
    out = {name: (np.stack(vals[name], axis=1), np.stack(stops[name], axis=1)) for name in vals}
    sides = classify_side(state, eps) if want_sides else None
    return out, sides


def _advance(spec, prev, state, current, frozen, at_mark, changed):
    """Update one observable's values and stop flags after a step.

    A dead point's data is frozen by the flow, so one-point slots are read
    off the state at checkpoints.  A multi-point slot freezes at its value
    just before the first of its points stops.
    """
    name = spec.name
    if spec.arity == 1:
        if at_mark:
            current[name] = evaluate(spec, state)
            frozen[name] = stopped(spec, state)
        return
    if not (at_mark or changed):
        return
    dead = stopped(spec, state)
    fresh = dead & ~frozen[name]
    if fresh.any():
        current[name] = np.where(fresh, evaluate(spec, prev), current[name])
    live = ~dead
    current[name] = np.where(live, evaluate(spec, state), current[name])
    frozen[name] = dead


def _generators(seed, path_ids):
    # one Philox stream per path, keyed on (seed, path id); consumed sequentially
    return [np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(p))) for p in path_ids]


def _chunks(cfg):
    ids = np.arange(cfg.n_paths)
    return [ids[i:i + cfg.chunk_size] for i in range(0, cfg.n_paths, cfg.chunk_size)]


def _run(cfg, want_sides=False, eps=0.05, specs=None):
    specs = cfg.specs() if specs is None else list(specs)
    jobs = [(cfg, list(ids), want_sides, eps, specs) for ids in _chunks(cfg)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_simulate_chunk, jobs))
    else:
        results = [_simulate_chunk(job) for job in jobs]
    return results


def run_ensemble(cfg, specs=None):
    """Observable values at every checkpoint for every path.

    ``specs`` overrides the catalog names in ``cfg.observables``.
    """
    specs = cfg.specs() if specs is None else list(specs)
    results = _run(cfg, specs=specs)
    values = {s.name: np.concatenate([r[0][s.name][0] for r in results]) for s in specs}
    stops = {s.name: np.concatenate([r[0][s.name][1] for r in results]) for s in specs}
    return ObservableTable(
        times=list(cfg.checkpoints), values=values, stopped=stops,
        slot_labels={s.name: s.slot_labels() for s in specs},
        real={s.name: s.is_real for s in specs},
    )


# -- drift test -------------------------------------------------------------

@dataclass
class DriftCell:
    observable: str
    point_id: str
    component: str
    t0: float
    t1: float
    mean: float
    stderr: float
    z: float
    count: int
    status: str  # "pass", "fail" or "inconclusive"


@dataclass
class DriftTestReport:
    cells: list
    threshold: float = Z_PASS

    @property
    def decided(self):
        return [c for c in self.cells if c.status != "inconclusive"]

    @property
    def passed(self):
        return all(c.status == "pass" for c in self.decided)

    @property
    def max_abs_z(self):
        return max((abs(c.z) for c in self.decided), default=0.0)

    def for_observable(self, name):
        return DriftTestReport([c for c in self.cells if c.observable == name], self.threshold)

    def multiplicity_note(self):
        n = len(self.decided)
        per_cell = erfc(self.threshold / sqrt(2))
        return (f"{n} decided cells at |z| <= {self.threshold}: expected false failures "
                f"{n * per_cell:.3f}; Bonferroni family-wise level {min(1.0, n * per_cell):.3g}")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["observable", "point_id", "component", "t0", "t1", "mean",
                             "stderr", "z", "count", "status"])
            for c in self.cells:
                writer.writerow([c.observable, c.point_id, c.component, f"{c.t0:.17g}", f"{c.t1:.17g}",
                                 f"{c.mean:.17g}", f"{c.stderr:.17g}", f"{c.z:.17g}", c.count, c.status])

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_abs_z": self.max_abs_z,
            "n_cells": len(self.cells),
            "n_inconclusive": len(self.cells) - len(self.decided),
            "multiplicity": self.multiplicity_note(),
        }


def drift_test(table, time_pairs=((0.0, 0.5), (0.5, 1.0)), threshold=Z_PASS, min_samples=MIN_SAMPLES):
    """One-sample z-test of the mean increment between checkpoints, per cell."""
    cells = []
    for name, vals in table.values.items():
        comps = ("re",) if table.real[name] else ("re", "im")
        for t0, t1 in time_pairs:
            c0, c1 = table.times.index(t0), table.times.index(t1)
            for s, lab in enumerate(table.slot_labels[name]):
                inc = vals[:, c1, s] - vals[:, c0, s]
                count = int(np.sum(~table.stopped[name][:, c1, s]))
                for comp in comps:
                    x = inc.real if comp == "re" else inc.imag
                    n = len(x)
                    mean = float(np.mean(x))
                    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
                    se = sd / np.sqrt(n) if n > 1 else 0.0
                    if count < min_samples or not np.isfinite(se) or se <= 1e-14 * max(1.0, abs(mean)):
                        cells.append(DriftCell(name, lab, comp, t0, t1, mean, se, float("nan"),
                                               count, "inconclusive"))
                        continue
                    z = mean / se
                    status = "pass" if abs(z) <= threshold else "fail"
                    cells.append(DriftCell(name, lab, comp, t0, t1, mean, se, z, count, status))
    return DriftTestReport(cells, threshold)


# -- Schramm's observable ------------------------------------------------------

SCHRAMM_POINTS = (
    np.pi * 1j, 0.3 + 1.2j, -1.0 + 0.8j, 1.2 + 2.0j, -0.6 + 2.4j,
    2.0 + 1.5j, 0.5 + 0.5j, -2.5 + 1.0j, 6 + np.pi * 1j, -6 + np.pi * 1j,
)


@dataclass
class SchrammRow:
    point: complex
    fraction_left: float
    stderr: float
    exact: float
    z: float
    decided: int
    undecided_fraction: float


@dataclass
class SchrammReport:
    rows: list
    n_paths: int
    undecided_limit: float = 0.05
    z_limit: float = 3.0

    @property
    def flagged(self):
        return any(r.undecided_fraction > self.undecided_limit for r in self.rows)

    @property
    def passed(self):
        return not self.flagged and all(abs(r.z) <= self.z_limit for r in self.rows)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["point_re", "point_im", "fraction_left", "stderr", "exact", "z",
                             "decided", "undecided_fraction"])
            for r in self.rows:
                writer.writerow([f"{r.point.real:.17g}", f"{r.point.imag:.17g}",
                                 f"{r.fraction_left:.17g}", f"{r.stderr:.17g}", f"{r.exact:.17g}",
                                 f"{r.z:.17g}", r.decided, f"{r.undecided_fraction:.17g}"])

    def to_dict(self):
        return {"passed": self.passed, "flagged": self.flagged, "n_paths": self.n_paths,
                "max_abs_z": max(abs(r.z) for r in self.rows)}


def schramm_estimate(cfg, points=SCHRAMM_POINTS, eps=0.05):
    """Fraction of paths passing right of each point, against (1/pi) arg tanh(z/4).

    The z-score uses the null-hypothesis standard error sqrt(P(1-P)/n).
    """
    # sides are read at the horizon, so no localization
    cfg = EnsembleConfig(**{**cfg.__dict__, "points": list(points), "observables": [],
                            "checkpoints": [cfg.T], "stop_radius": 0.0})
    results = _run(cfg, want_sides=True, eps=eps)
    sides = np.concatenate([r[1] for r in results])
    rows = []
    for col, z in enumerate(cfg.points):
        s = sides[:, col]
        decided = int(np.sum(s != UNDECIDED))
        frac = float(np.mean(s[s != UNDECIDED] == LEFT)) if decided else float("nan")
        exact = schramm_probability(z)
        se = np.sqrt(frac * (1 - frac) / decided) if decided else float("nan")
        null_se = np.sqrt(exact * (1 - exact) / decided) if decided else float("nan")
        if null_se > 0:
            zscore = (frac - exact) / null_se
        else:
            zscore = 0.0 if frac == exact else float("inf")
        rows.append(SchrammRow(z, frac, float(se), exact, float(zscore), decided,
                               1 - decided / len(s)))
    return SchrammReport(rows, cfg.n_paths)
