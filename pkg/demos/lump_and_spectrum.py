"""Torus lump, its KP-I defect and the lowest eigenvalues of the linearised operator.

Run from the repository root:  python demos/lump_and_spectrum.py [N]
"""

import sys

from wwlump import linear, lump, spectral
from wwlump.spectral import GridSpec


def main(n=128):
    grid = GridSpec(Nx=n, Ny=n)
    params = lump.LumpParams.from_grid(grid)
    res = lump.lump_petviashvili(params, grid, full_output=True)
    q = res.q
    kp = lump.kpi_residual(q, params)
    print(f"grid {grid.Nx}x{grid.Ny} on [-{grid.Lx:g}, {grid.Lx:g}]^2, eps = {grid.eps:g}")
    print(f"Petviashvili: {res.iterations} iterations, residual {res.residual:.2e}, factor {res.factor:.12f}")
    print(f"q range [{q.values.min():.4f}, {q.values.max():.4f}], KP-I defect {kp.max_abs():.2e}")
    closed = lump.lump_eps(params, grid)
    print(f"relative L2 gap to the plane closed form: "
          f"{spectral.l2_norm(q - closed) / spectral.l2_norm(closed):.3f}")
    rep = linear.eig_L(linear.build_context(grid, spectral.derivative(q, "x")))
    print(f"lowest eigenvalues: {', '.join(f'{v:.4f}' for v in rep.eigenvalues[:5])}")
    print(f"negative count {rep.n_negative}, eigenvector slice integral {rep.slice_integral:.1e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 128)
