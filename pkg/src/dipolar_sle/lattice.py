"""Finite-difference cross-check of the mixed-boundary Green's function.

The strip is truncated to the rectangle [-L, L] x [0, pi] with Dirichlet
rows on the bottom edge and both ends and a Neumann top edge (ghost-point
reflection).  The 5-point Laplacian is solved with a point source of mass
2 pi, so the discrete solution approximates G(., source) with
G ~ -log|z - source| on the diagonal.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .correlators import green_strip
from .errors import ConfigError, SolverFailure


@dataclass(frozen=True)
class Grid:
    """Nodes x_i = -L + i hx (0 <= i <= nx), y_j = j hy (0 <= j <= ny), hy = pi / ny."""

    L: float
    nx: int
    ny: int

    @classmethod
    def with_mesh(cls, mesh, L):
        return cls(float(L), int(round(2 * L / mesh)), int(round(np.pi / mesh)))

    @property
    def hx(self):
        return 2 * self.L / self.nx

    @property
    def hy(self):
        return np.pi / self.ny

    def node(self, z):
        """Indices of the grid node nearest to ``z``."""
        i = int(round((z.real + self.L) / self.hx))
        j = int(round(z.imag / self.hy))
        return i, j

    def point(self, i, j):
        return complex(-self.L + i * self.hx, j * self.hy)


def _operator(grid):
    # unknowns: interior columns 1..nx-1, rows 1..ny (row ny is the Neumann edge)
    mx, my = grid.nx - 1, grid.ny
    cx, cy = 1 / grid.hx**2, 1 / grid.hy**2
    dx = sp.diags([-cx, 2 * cx, -cx], [-1, 0, 1], shape=(mx, mx))
    main = np.full(my, 2 * cy)
    lower = np.full(my - 1, -cy)
    lower[-1] = -2 * cy  # ghost row above the Neumann edge mirrors row ny - 1
    upper = np.full(my - 1, -cy)
    dy = sp.diags([lower, main, upper], [-1, 0, 1], shape=(my, my))
    return (sp.kron(sp.identity(my), dx) + sp.kron(dy, sp.identity(mx))).tocsc()


def discrete_green(grid, source):
    """Discrete G(., source) on all grid nodes, shape (ny + 1, nx + 1).

    A source on a Dirichlet node gives the zero solution.
    """
    i0, j0 = grid.node(complex(source))
    out = np.zeros((grid.ny + 1, grid.nx + 1))
    if j0 == 0 or i0 <= 0 or i0 >= grid.nx:
        return out
    mx = grid.nx - 1
    rhs = np.zeros(mx * grid.ny)
    rhs[(j0 - 1) * mx + (i0 - 1)] = 2 * np.pi / (grid.hx * grid.hy)
    try:
        lu = splu(_operator(grid))
    except RuntimeError as exc:
        raise SolverFailure(f"singular lattice system: {exc}") from exc
    sol = lu.solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise SolverFailure("lattice solve produced non-finite values")
    out[1:, 1:-1] = sol.reshape(grid.ny, mx)
    return out


CENTER_SOURCE = np.pi / 2 * 1j
CENTER_TARGETS = (0.5 + np.pi / 2 * 1j, -1.0 + 1.0j, 0.75j, 2.5j, 1.5 + np.pi * 1j, -2.0 + 2.0j)


@dataclass(frozen=True)
class LatticeReport:
    mesh: float
    L: float
    targets: tuple
    discrete: tuple
    continuum: tuple

    @property
    def relative_errors(self):
        d, c = np.array(self.discrete), np.array(self.continuum)
        return np.abs(d - c) / np.abs(c)

    @property
    def max_relative_error(self):
        return float(self.relative_errors.max())

    def to_dict(self):
        return {
            "mesh": self.mesh, "L": self.L,
            "max_relative_error": self.max_relative_error,
            "rows": [{"re": z.real, "im": z.imag, "discrete": d, "continuum": c}
                     for z, d, c in zip(self.targets, self.discrete, self.continuum)],
        }


def lattice_green_check(mesh=1 / 64, L=6 * np.pi, source=CENTER_SOURCE, targets=CENTER_TARGETS):
    """Compare 2 x discrete Green against 2 G at node-snapped center pairs."""
    if mesh > 1 / 32 or L < 6 * np.pi - 1e-12:
        raise ConfigError("lattice check needs mesh <= 1/32 and L >= 6 pi")
    grid = Grid.with_mesh(mesh, L)
    i0, j0 = grid.node(complex(source))
    src = grid.point(i0, j0)
    u = discrete_green(grid, src)
    pts, disc, cont = [], [], []
    for z in targets:
        i, j = grid.node(complex(z))
        p = grid.point(i, j)
        if min(i, grid.nx - i) * grid.hx < 10 * mesh:
            raise ConfigError(f"target {z} is within 10 mesh widths of the truncation")
        pts.append(p)
        disc.append(2 * float(u[j, i]))
        cont.append(2 * float(green_strip(p, src)))
    return LatticeReport(float(mesh), float(L), tuple(pts), tuple(disc), tuple(cont))


def convergence_ratio(coarse=1 / 32, fine=1 / 64, L=6 * np.pi):
    """Max relative error at ``fine`` over that at ``coarse``."""
    return lattice_green_check(fine, L).max_relative_error / lattice_green_check(coarse, L).max_relative_error
