"""Trace a few dipolar SLE(kappa) curves and write one CSV per curve.

Usage: python3 scripts/curve_ensemble.py OUT_DIR [kappa] [n_curves] [T]
"""

import os
import sys

from dipolar_sle.loewner import DrivingPath, trace_curve


def main(out, kappa=4.0, n_curves=4, T=2.0, dt=1e-3, seed=0):
    os.makedirs(out, exist_ok=True)
    for pid in range(n_curves):
        drive = DrivingPath.brownian(kappa, dt, int(round(T / dt)), seed, path_id=pid)
        sample = trace_curve(drive, sample_every=5)
        path = os.path.join(out, f"curve_{pid:03d}.csv")
        sample.to_csv(path)
        tip = sample.tips[-1]
        print(f"{path}: tip {tip.real:+.4f}{tip.imag:+.4f}i")


if __name__ == "__main__":
    args = sys.argv[1:]
    if not args:
        sys.exit(__doc__)
    main(args[0], *(float(a) for a in args[1:2]), *(int(a) for a in args[2:3]), *(float(a) for a in args[3:4]))
