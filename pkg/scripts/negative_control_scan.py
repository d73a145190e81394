"""Drift z-scores of (1/pi) arg tanh(w/c) for several c; c = 4 is the martingale.

Usage: python3 scripts/negative_control_scan.py [n_paths]
"""

import sys

from dipolar_sle.montecarlo import EnsembleConfig, drift_test, run_ensemble
from dipolar_sle.observables import negative_control

SCALES = (4.0, 3.0, 2.0, 1.5)


def main(n_paths=4000):
    cfg = EnsembleConfig(n_paths=n_paths)
    for c in SCALES:
        report = drift_test(run_ensemble(cfg, [negative_control(scale=c)]))
        print(f"c = {c:4.1f}: max |z| = {report.max_abs_z:6.2f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4000)
