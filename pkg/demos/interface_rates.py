"""Convergence on a circular coefficient jump, with and without one-sided stabilization.

Usage: python demos/interface_rates.py [max_n]
"""

import sys

from curvem.assembly import OWNER_BOTH, OWNER_SMALLER_ID
from curvem.problems import interface_jump
from curvem.solve import convergence_study


def main(max_n=16):
    levels = [n for n in (4, 8, 16, 32, 64) if n <= max_n]
    prob = interface_jump(kappa_in=1.0, kappa_out=100.0)
    for policy in (OWNER_SMALLER_ID, OWNER_BOTH):
        print(f"policy: {policy}")
        print(f"{'k':>2} {'n':>4} {'ndof':>7} {'e_H1':>10} {'rate':>6} {'e_L2':>10} {'rate':>6}")
        rows = convergence_study(prob, levels, [1, 2], policy=policy)
        for n, r in zip(levels * 2, rows):
            print(f"{r['k']:>2} {n:>4} {r['ndof']:>7} {r['e_H1']:>10.3e} {r['rate_H1']:>6.2f} "
                  f"{r['e_L2']:>10.3e} {r['rate_L2']:>6.2f}")
        print()


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 16)
