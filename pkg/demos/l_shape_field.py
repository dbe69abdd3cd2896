"""Unit load on the L-shaped domain; writes the field dump and prints corner values.

Usage: python demos/l_shape_field.py [out.json]
"""

import sys

import numpy as np

from curvem.problems import unit_load
from curvem.solve import solve_problem, write_field


def main(path="l_shape_field.json"):
    prob = unit_load()
    mesh = prob.mesh(8)
    sol = solve_problem(mesh, prob.as_problem(), 2)
    write_field(sol, path)
    coeffs = sol.coefficients()
    means = np.array([c[0] for c in coeffs])
    i = int(means.argmax())
    print(f"{len(mesh.elements)} elements, {sol.report.n_free} unknowns, residual "
          f"{sol.report.residual:.1e}")
    print(f"largest element value {means[i]:.5f} at element {i}, "
          f"centroid {sol.system.operators[i].geom.centroid.round(3).tolist()}")
    print(f"field written to {path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
