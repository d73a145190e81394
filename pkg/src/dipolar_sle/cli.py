"""Command-line entry point: ``dipolar-sle <command> [flags]``.

Every command writes its artifacts under ``--out`` and a JSON summary
``<command>.json`` with ``schema: 1``.  CSV outputs depend only on argv and
the config; the wall-clock timestamp appears only in the JSON, under
``timestamp``.  Exit codes: 0 all checks pass, 2 bad config, 3 numerical
failure or failed check.
"""

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError, DipolarError
from .lattice import lattice_green_check
from .loewner import DrivingPath, loewner_oracle_suite, trace_curve
from .montecarlo import EnsembleConfig, drift_test, run_ensemble, schramm_estimate
from .observables import negative_control
from .virasoro_checks import kernel_boundary_suite, ope_virasoro_suite, run_identity_suite

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NEGATIVE_CONTROL_Z = 5.0
LATTICE_MAX_ERROR = 0.05
LATTICE_MAX_RATIO = 0.7

COMMANDS = {
    "simulate": "trace one dipolar SLE curve and write curve.csv (t, re, im)",
    "observables": "evaluate the observable catalog along an ensemble; write observables.csv",
    "verify-identities": "Ward, mode-action and BPZ-Cardy identities plus the Loewner integrator oracle",
    "drift-test": "martingale drift test of the catalog with the negative control; write drift.csv",
    "schramm": "left-passage fractions against the closed form; write schramm.csv",
    "lattice-green": "finite-difference Green's function against the continuum kernel",
    "kernels": "boundary behaviour of the Green kernel and current, T one-point function, OPE checks",
}


class _Failed(Exception):
    def __init__(self, path):
        super().__init__(path)
        self.path = path


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _config(args, **defaults):
    if args.config:
        data = EnsembleConfig.from_json(args.config).to_dict()
    else:
        data = {**EnsembleConfig().to_dict(), **defaults}
    for key, flag in (("seed", "seed"), ("n_paths", "n_paths"), ("dt", "dt"), ("T", "T"), ("kappa", "kappa")):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    if args.T is not None:
        data["checkpoints"] = [t for t in data["checkpoints"] if t <= data["T"] + 1e-12]
    return EnsembleConfig.from_dict(data)


def _write_summary(args, command, passed, results, config=None):
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{command.replace('-', '_')}.json")
    doc = {"schema": SCHEMA, "command": command, "passed": bool(passed), "results": results}
    if config is not None:
        doc["config"] = config.to_dict()
    doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, default=_json_default)
    return path


def _report_lines(reports):
    for rep in reports:
        print(rep.summary())
    return [rep.to_dict() for rep in reports]


def _finish(args, command, passed, results, config=None):
    path = _write_summary(args, command, passed, results, config)
    if not passed:
        raise _Failed(path)
    return EXIT_OK


def cmd_simulate(args):
    cfg = _config(args)
    drive = DrivingPath.brownian(cfg.kappa, cfg.dt, cfg.n_steps, cfg.seed, path_id=0)
    sample = trace_curve(drive, sample_every=max(1, cfg.n_steps // 1000))
    os.makedirs(args.out, exist_ok=True)
    sample.to_csv(os.path.join(args.out, "curve.csv"))
    tip = complex(sample.tips[-1])
    results = {"n_samples": len(sample.times), "tip": tip,
               "max_abs_re": float(np.max(np.abs(sample.tips.real)))}
    print(f"PASS simulate: {len(sample.times)} samples, tip at T = {tip.real:.6g}{tip.imag:+.6g}i")
    return _finish(args, "simulate", True, results, cfg)


def cmd_observables(args):
    cfg = _config(args)
    table = run_ensemble(cfg)
    os.makedirs(args.out, exist_ok=True)
    table.write_csv(os.path.join(args.out, "observables.csv"))
    print(f"PASS observables: {cfg.n_paths} paths, {len(table.values)} observables, "
          f"{len(table.times)} checkpoints")
    return _finish(args, "observables", True, {"observables": list(table.values)}, cfg)


def cmd_verify_identities(args):
    scale = args.tolerance if args.tolerance is not None else 1.0
    reports = run_identity_suite(scale) + loewner_oracle_suite()
    results = _report_lines(reports)
    return _finish(args, "verify-identities", all(r.passed for r in reports), results)


def cmd_kernels(args):
    reports = kernel_boundary_suite() + ope_virasoro_suite()
    results = _report_lines(reports)
    return _finish(args, "kernels", all(r.passed for r in reports), results)


def cmd_drift_test(args):
    cfg = _config(args)
    control = negative_control().name
    if control not in cfg.observables:
        cfg.observables = list(cfg.observables) + [control]
    table = run_ensemble(cfg)
    report = drift_test(table)
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(os.path.join(args.out, "drift.csv"))
    catalog = type(report)([c for c in report.cells if c.observable != control], report.threshold)
    ctrl = report.for_observable(control)
    detected = ctrl.max_abs_z > NEGATIVE_CONTROL_Z
    print(f"{'PASS' if catalog.passed else 'FAIL'} drift catalog: max |z| {catalog.max_abs_z:.2f} "
          f"over {len(catalog.decided)} decided cells")
    print(f"{'PASS' if detected else 'FAIL'} negative control: max |z| {ctrl.max_abs_z:.2f}")
    results = {"catalog": catalog.to_dict(), "negative_control": ctrl.to_dict(),
               "negative_control_detected": detected}
    return _finish(args, "drift-test", catalog.passed and detected, results, cfg)


def cmd_schramm(args):
    cfg = _config(args, T=8.0, n_paths=2000, checkpoints=[0.0])
    report = schramm_estimate(cfg)
    os.makedirs(args.out, exist_ok=True)
    report.write_csv(os.path.join(args.out, "schramm.csv"))
    worst = max(abs(r.z) for r in report.rows)
    print(f"{'PASS' if report.passed else 'FAIL'} schramm: {len(report.rows)} points, max |z| {worst:.2f}, "
          f"max undecided {max(r.undecided_fraction for r in report.rows):.4f}")
    return _finish(args, "schramm", report.passed, report.to_dict(), cfg)


def cmd_lattice_green(args):
    fine = lattice_green_check(args.mesh)
    coarse = lattice_green_check(2 * args.mesh)
    ratio = fine.max_relative_error / coarse.max_relative_error
    passed = fine.max_relative_error <= LATTICE_MAX_ERROR and ratio < LATTICE_MAX_RATIO
    print(f"{'PASS' if passed else 'FAIL'} lattice-green: relative error {fine.max_relative_error:.3e} "
          f"at mesh {args.mesh:g}, ratio {ratio:.3f} under halving")
    results = {"fine": fine.to_dict(), "coarse": coarse.to_dict(), "ratio": ratio}
    return _finish(args, "lattice-green", passed, results)


HANDLERS = {
    "simulate": cmd_simulate,
    "observables": cmd_observables,
    "verify-identities": cmd_verify_identities,
    "drift-test": cmd_drift_test,
    "schramm": cmd_schramm,
    "lattice-green": cmd_lattice_green,
    "kernels": cmd_kernels,
}


def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON file mirroring EnsembleConfig")
    common.add_argument("--out", metavar="DIR", default="out", help="output directory (created if absent)")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--n-paths", dest="n_paths", type=int, help="number of paths")
    common.add_argument("--dt", type=float, help="Loewner time step")
    common.add_argument("--T", type=float, help="time horizon")
    common.add_argument("--kappa", type=float, help="driving diffusivity")
    common.add_argument("--tolerance", type=float, help="tolerance scale for identity checks")
    return common


def build_parser():
    common = _common()
    flags = "\n".join(f"  {a.option_strings[0]:<12} {a.help}" for a in common._actions)
    parser = argparse.ArgumentParser(
        prog="dipolar-sle",
        description="Numerical lab for dipolar SLE(4) and the mixed-boundary free field.",
        epilog="flags accepted by every command:\n" + flags,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, text in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        if name == "lattice-green":
            p.add_argument("--mesh", type=float, default=1 / 64, help="fine mesh width (coarse is twice it)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _Failed as exc:
        print(f"check failed; report at {exc.path}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DipolarError, ArithmeticError) as exc:
        path = _write_summary(args, args.command, False, {"error": f"{type(exc).__name__}: {exc}"})
        print(f"numerical failure: {exc}; report at {path}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
