"""Solve the full problem for a few eps and fit the decay of the corrections.

Run from the repository root:  python demos/eps_sweep.py [N]
"""

import sys

from wwlump import nonlinear as nl
from wwlump.spectral import GridSpec


def main(n=128, eps_values=(0.2, 0.1, 0.05)):
    reports = {}
    print(f"{'eps':>6} {'iters':>5} {'kappa':>8} {'E_eta':>10} {'E_xi':>10} {'r_kin':>9} {'r_bern':>9}")
    for eps in eps_values:
        _, rep = nl.solve_fixed_point(nl.SolverConfig(grid=GridSpec(Nx=n, Ny=n, eps=eps)))
        reports[eps] = rep
        print(f"{eps:6.3f} {rep.iterations:5d} {rep.last_contraction:8.3f} {rep.E_eta:10.3e} "
              f"{rep.E_xi:10.3e} {rep.r_kinematic:9.1e} {rep.r_bernoulli:9.1e}")
    t = nl.decay_order_check(reports)
    print(f"fitted orders: E_eta {t['order_eta']:.3f}, E_xi {t['order_xi']:.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 128)
