"""Finite-difference Green's function error at a sequence of meshes.

Usage: python3 scripts/lattice_convergence.py
"""

from dipolar_sle.lattice import lattice_green_check

MESHES = (1 / 32, 1 / 48, 1 / 64)


def main():
    prev = None
    for mesh in MESHES:
        err = lattice_green_check(mesh).max_relative_error
        note = "" if prev is None else f"  ratio {err / prev:.3f}"
        print(f"mesh 1/{round(1 / mesh):<4d} max relative error {err:.3e}{note}")
        prev = err


if __name__ == "__main__":
    main()
