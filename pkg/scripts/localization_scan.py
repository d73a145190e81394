"""Drift-test z-scores of the catalog as a function of the localization radius.

Without localization the current J and the two-point bi-vertex show a drift:
they are local martingales whose unstopped increments are not integrable
near the curve.  Usage: python3 scripts/localization_scan.py [n_paths]
"""

import sys

from dipolar_sle.montecarlo import EnsembleConfig, drift_test, run_ensemble

RADII = (0.0, 0.2, 0.5)


def main(n_paths=4000):
    print("radius  " + "  ".join(f"{n:>12}" for n in EnsembleConfig().observables))
    for r in RADII:
        cfg = EnsembleConfig(n_paths=n_paths, stop_radius=r)
        report = drift_test(run_ensemble(cfg))
        zs = [report.for_observable(n).max_abs_z for n in cfg.observables]
        print(f"{r:6.2f}  " + "  ".join(f"{z:12.2f}" for z in zs))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4000)
