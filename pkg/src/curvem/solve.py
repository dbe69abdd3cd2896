"""Linear solves, error measurement, interpolation oracle and convergence studies."""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import OWNER_SMALLER_ID, assemble, choose_stab_owner
from .element import (GL, MOMENT, TGP, VERTEX, QuadratureConfig, Slot, curved_trace_basis,
                      gl_points, local_energy)
from .errors import ConfigError, DataError, FactorizationError
from .geometry.mesh import DIRICHLET, interior_quadrature
from .poly2d import dim_pk

FIELD_FORMAT = "curvem-field/1"
CSV_COLUMNS = ("k", "h", "ndof", "e_H1", "e_L2", "rate_H1", "rate_L2")


# -- linear algebra ----------------------------------------------------------

@dataclass
class SolveReport:
    """Solution of the reduced system and solver statistics."""

    u: np.ndarray
    residual: float
    method: str
    n_free: int
    stats: dict = field(default_factory=dict)


def _solve_direct(A, b):
    lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options={"SymmetricMode": True})
    piv = lu.U.diagonal()
    bad = np.flatnonzero(~(piv > 0))
    if bad.size:
        i = int(bad[0])
        raise FactorizationError(f"non-positive pivot {piv[i]:.3e} at unknown {lu.perm_c[i]}",
                                 int(lu.perm_c[i]), float(piv[i]))
    x = lu.solve(b)
    return x, {"min_pivot": float(piv.min()), "max_pivot": float(piv.max()),
               "nnz_factors": int(lu.L.nnz + lu.U.nnz)}


def _solve_cg(A, b, rtol):
    d = A.diagonal()
    if np.any(d <= 0):
        i = int(np.flatnonzero(d <= 0)[0])
        raise FactorizationError(f"non-positive diagonal {d[i]:.3e} at unknown {i}", i, float(d[i]))
    M = sp.diags(1.0 / d)
    its = [0]

    def count(_):
        its[0] += 1
    x, info = spla.cg(A, b, rtol=rtol, atol=0.0, M=M, maxiter=20 * A.shape[0] + 100,
                      callback=count)
    if info != 0:
        raise FactorizationError(f"conjugate gradients did not converge (info={info})", -1, np.nan)
    return x, {"iterations": its[0]}


def solve_spd(system, method="direct", rtol=1e-12):
    """Solve the constraint-reduced system.

    ``method`` is ``"direct"`` (sparse factorization with diagonal pivots,
    which must all be positive) or ``"cg"`` (Jacobi-preconditioned
    conjugate gradients stopped at relative residual ``rtol``).  Returns a
    :class:`SolveReport` whose ``u`` holds every global generator value.
    """
    A, b, free, _ = system.reduce()
    if method not in ("direct", "cg"):
        raise ConfigError(f"unknown solver {method!r}")
    if len(free) == 0:
        x, stats = np.zeros(0), {}
    elif method == "direct":
        try:
            x, stats = _solve_direct(A, b)
        except RuntimeError as exc:
            raise FactorizationError(f"factorization failed: {exc}", -1, 0.0) from exc
    else:
        x, stats = _solve_cg(A.tocsr(), b, rtol)
    nb = np.linalg.norm(b)
    res = float(np.linalg.norm(A @ x - b) / nb) if nb > 0 else float(np.linalg.norm(A @ x))
    return SolveReport(system.expand(x), res, method, len(free), stats)


# -- element-wise quantities ---------------------------------------------------

def local_vector(system, ops, g):
    return g[system.dofs.globals_of(ops.layout)]


def _quad(mesh, ops, order=None):
    return interior_quadrature(mesh, ops.eid, order or 2 * ops.k + 4, ops.quad.curved(ops.k))


@dataclass
class ErrorReport:
    """Relative broken errors of ``Pi u_h`` and their absolute values."""

    e_H1: float
    e_L2: float
    abs_H1: float
    abs_L2: float
    max_element_H1: float
    max_element: int


def _broken_errors(mesh, operators, coeffs, u, grad, order=None):
    num1 = num0 = den1 = den0 = 0.0
    per = []
    for ops, c in zip(operators, coeffs):
        region = mesh.elements[ops.eid].region
        pts, w = _quad(mesh, ops, order)
        du = np.asarray(grad(pts, region)) - np.einsum("qnd,n->qd", ops.basis.grad(pts), c)
        e1 = float(w @ np.sum(du**2, axis=-1))
        uv = np.asarray(u(pts, region))
        e0 = float(w @ (uv - ops.basis.eval(pts) @ c) ** 2)
        num1 += e1
        num0 += e0
        den1 += float(w @ np.sum(np.asarray(grad(pts, region)) ** 2, axis=-1))
        den0 += float(w @ uv**2)
        per.append(e1)
    per = np.sqrt(np.maximum(per, 0.0))
    a1, a0 = np.sqrt(num1), np.sqrt(num0)
    return ErrorReport(a1 / np.sqrt(den1) if den1 > 0 else a1,
                       a0 / np.sqrt(den0) if den0 > 0 else a0,
                       a1, a0, float(per.max()), int(per.argmax()))


def projected_coefficients(system, g, psis=None):
    psis = system.psis if psis is None else psis
    return [ops.project(local_vector(system, ops, g), psi)
            for ops, psi in zip(system.operators, psis)]


def error_norms(mesh, system, g, u, grad, order=None):
    """Broken H1 and L2 errors of ``Pi u_h`` relative to ``|u|_1`` and ``||u||_0``."""
    return _broken_errors(mesh, system.operators, projected_coefficients(system, g), u, grad, order)


def norm_1S(system, g):
    """``sqrt(a_h(g, g))`` with the unconstrained global form."""
    A = system.A if system.A is not None else system.K
    g = np.asarray(g, dtype=float)
    val = float(g @ (A @ g))
    scale = abs(A).max() * float(g @ g) if A.nnz else 0.0
    if val < -1e-12 * scale:
        raise ArithmeticError(f"negative energy {val:.3e}")
    return np.sqrt(max(val, 0.0))


# -- interpolation oracle --------------------------------------------------------

def _element_region_of_vertex(mesh):
    out = {}
    for eid, el in enumerate(mesh.elements):
        for v in mesh.loop_vertices(eid):
            out.setdefault(v, el.region)
    return out


def _l2_projection(ops, u, order=None):
    region = ops.mesh.elements[ops.eid].region
    pts, w = _quad(ops.mesh, ops, order)
    B = ops.basis.eval(pts)
    M = (B * w[:, None]).T @ B
    return np.linalg.solve(M, B.T @ (w * np.asarray(u(pts, region))))


def _fit_edge_polynomial(mesh, kid, k, patch, operators, u, order=None):
    """Constrained least-squares fit of ``u`` on the patch, interpolating at the edge endpoints.

    Returns values of the fitted polynomial at the edge's trace nodes.
    """
    nodes, local, Vinv = curved_trace_basis(mesh, kid, k)
    rows, rhs, wts = [], [], []
    for eid in patch:
        ops = operators[eid]
        pts, w = _quad(mesh, ops, order)
        rows.append(local.eval(pts))
        rhs.append(np.asarray(u(pts, mesh.elements[eid].region)))
        wts.append(w)
    B = np.concatenate(rows)
    y = np.concatenate(rhs)
    w = np.concatenate(wts)
    n = len(local)
    if len(y) < n:
        raise DataError(f"edge {kid}: {len(y)} samples for {n} unknowns")
    e = mesh.edges[kid]
    region = mesh.elements[patch[0]].region
    C = local.eval(nodes[:2])
    d = np.asarray(u(mesh.vertices[[e.v0, e.v1]], region))
    kkt = np.zeros((n + 2, n + 2))
    kkt[:n, :n] = (B * w[:, None]).T @ B
    kkt[:n, n:] = C.T
    kkt[n:, :n] = C
    sol = np.linalg.solve(kkt, np.concatenate([B.T @ (w * y), d]))
    return local.eval(nodes) @ sol[:n]


@dataclass
class Interpolant:
    """Interpolant generators and the piecewise polynomial companion.

    ``g`` is the global generator vector, ``psis`` the curved Dirichlet
    traces per element, ``coeffs`` the per-element polynomial in each
    element's basis.
    """

    g: np.ndarray
    psis: list
    coeffs: list


def interpolant_oracle(mesh, system, u, policy=OWNER_SMALLER_ID, order=None, kappa=None):
    """Build the interpolant generators of ``u`` and the companion polynomials.

    Vertex and Gauss-Lobatto slots take point values, moment slots the
    scaled moments of ``u``.  On each curved edge a polynomial of degree k
    is fitted to ``u`` over the patch of elements that share the edge (only
    the stabilizing owner when the coefficient jumps), interpolating ``u``
    at the endpoints; its values give the trace generator slots.  The
    companion polynomial is that fit on the patch and the L2 projection of
    ``u`` on every other element.  ``kappa`` overrides the mesh coefficients
    when deciding where the coefficient jumps.
    """
    k = system.dofs.k
    ops_list = system.operators
    dofs = system.dofs
    g = np.zeros(dofs.size)
    vreg = _element_region_of_vertex(mesh)
    coeffs = [None] * len(ops_list)
    for s, i in dofs.index.items():
        if s.kind == VERTEX:
            g[i] = float(np.asarray(u(mesh.vertices[s.entity][None, :], vreg[s.entity]))[0])
    adj = mesh.edge_elements()
    owner_map = choose_stab_owner(mesh, policy, kappa)
    for kid, e in enumerate(mesh.edges):
        region = mesh.elements[adj[kid][0]].region
        if not e.is_curved:
            if k > 1:
                vals = np.asarray(u(gl_points(mesh, kid, k), region))
                for j in range(k - 1):
                    g[dofs.index[Slot(GL, kid, j)]] = vals[j]
            continue
        owners = owner_map.get(kid, set(adj[kid]))
        patch = sorted(owners)
        vals = _fit_edge_polynomial(mesh, kid, k, patch, ops_list, u, order)
        if e.boundary != DIRICHLET:
            for j in range(dim_pk(k) - 2):
                g[dofs.index[Slot(TGP, kid, j)]] = vals[2 + j]
        nodes = curved_trace_basis(mesh, kid, k)[0]
        for eid in patch:
            ops = ops_list[eid]
            coeffs[eid] = np.linalg.solve(ops.basis.eval(nodes), vals)
    for ops in ops_list:
        region = mesh.elements[ops.eid].region
        mom = [i for i, s in enumerate(ops.layout.slots) if s.kind == MOMENT]
        if mom:
            pts, w = _quad(mesh, ops, order)
            vals = ops.basis.eval(pts)[:, :len(mom)].T @ (w * np.asarray(u(pts, region)))
            for i, v in zip(mom, vals / ops.geom.area):
                g[dofs.index[ops.layout.slots[i]]] = v
        if coeffs[ops.eid] is None:
            coeffs[ops.eid] = _l2_projection(ops, u, order)
    return Interpolant(g, list(system.psis), coeffs)


def interpolation_measures(mesh, system, interp, u, grad, kappa=None, order=None):
    """The three quantities of the interpolation estimate.

    Returns a dict with the relative broken H1 errors of ``Pi u_I`` and of the
    companion polynomial, and the stabilized distance between ``u_I`` and
    the generators of the companion polynomial.
    """
    kappa = kappa or mesh.kappa
    e_I = _broken_errors(mesh, system.operators,
                         projected_coefficients(system, interp.g, interp.psis), u, grad, order)
    e_pi = _broken_errors(mesh, system.operators, interp.coeffs, u, grad, order)
    total = 0.0
    for ops, mask, psi, c in zip(system.operators, system.masks, interp.psis, interp.coeffs):
        d = local_vector(system, ops, interp.g) - ops.generators_of(c)
        dpsi = psi - ops.psi_of_poly(c) if ops.n_psi else None
        kap = kappa[mesh.elements[ops.eid].region]
        total += local_energy(ops, kap, d, dpsi, mask)
    return {"interp_H1": e_I.e_H1, "poly_H1": e_pi.e_H1, "dist_1S": float(np.sqrt(max(total, 0.0))),
            "abs_interp_H1": e_I.abs_H1}


# -- driver ----------------------------------------------------------------------

@dataclass
class Solution:
    mesh: object
    system: object
    report: SolveReport
    k: int

    @property
    def g(self):
        return self.report.u

    def coefficients(self):
        return projected_coefficients(self.system, self.g)

    def errors(self, u, grad, order=None):
        return error_norms(self.mesh, self.system, self.g, u, grad, order)


def solve_problem(mesh, problem, k, quad=None, policy=OWNER_SMALLER_ID, method="direct"):
    """Assemble and solve; ``problem`` is an :class:`~curvem.assembly.Problem`."""
    quad = quad or QuadratureConfig()
    system = assemble(mesh, problem, k, quad, policy)
    return Solution(mesh, system, solve_spd(system, method), k)


def mesh_size(mesh):
    return max(mesh.geometry(e, 2, 16).diameter for e in range(len(mesh.elements)))


def rates(hs, errs):
    """Successive ``log(e_i / e_{i+1}) / log(h_i / h_{i+1})``; the first entry is NaN.

    ``hs`` may be nominal sizes such as ``1 / n``.
    """
    out = [np.nan]
    for i in range(1, len(hs)):
        if errs[i] <= 0 or errs[i - 1] <= 0:
            out.append(np.nan)
        else:
            out.append(float(np.log(errs[i - 1] / errs[i]) / np.log(hs[i - 1] / hs[i])))
    return out


def convergence_study(problem, levels, ks, quad=None, policy=OWNER_SMALLER_ID, method="direct",
                      mesh_transform=None):
    """Rows ``(k, h, ndof, e_H1, e_L2, rate_H1, rate_L2)`` over refinement levels.

    ``problem`` is a :class:`~curvem.problems.BuiltinProblem`; ``levels``
    are increasing mesh parameters ``n``.  ``h`` is the largest element
    diameter; rates use the nominal size ``1 / n`` so that doubling ``n``
    gives ``log2`` of the error ratio.
    """
    if len(levels) < 2:
        raise ConfigError("a convergence study needs at least two levels")
    meshes = [problem.mesh(n) for n in levels]
    if mesh_transform is not None:
        meshes = [mesh_transform(m) for m in meshes]
    hs = [mesh_size(m) for m in meshes]
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError("mesh sizes must decrease strictly")
    data = problem.as_problem()
    rows = []
    for k in ks:
        e1, e0, nd = [], [], []
        for mesh in meshes:
            sol = solve_problem(mesh, data, k, quad, policy, method)
            err = sol.errors(problem.u, problem.grad)
            e1.append(err.e_H1)
            e0.append(err.e_L2)
            nd.append(sol.report.n_free)
        nominal = [1.0 / n for n in levels]
        r1, r0 = rates(nominal, e1), rates(nominal, e0)
        for i in range(len(meshes)):
            rows.append({"k": k, "h": hs[i], "ndof": nd[i], "e_H1": e1[i], "e_L2": e0[i],
                         "rate_H1": r1[i], "rate_L2": r0[i]})
    return rows


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if np.isnan(v) else f"{v:.17g}"


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def field_dump(solution, n_curve=16):
    """Per-element boundary polygon and projection coefficients as a dict."""
    mesh = solution.mesh
    out = []
    for ops, c in zip(solution.system.operators, solution.coefficients()):
        poly = []
        for curve, sign in ops.geom.curves:
            if curve.is_straight():
                t = np.array([curve.t0 if sign > 0 else curve.t1])
            else:
                t = np.linspace(curve.t0, curve.t1, n_curve + 1)[:-1]
                if sign < 0:
                    t = np.linspace(curve.t1, curve.t0, n_curve + 1)[:-1]
            poly.extend(curve.eval(t).tolist())
        out.append({"id": ops.eid, "region": mesh.elements[ops.eid].region, "polygon": poly,
                    "center": ops.basis.center.tolist(), "scale": ops.basis.h,
                    "exponents": ops.basis.alphas.tolist(), "coefficients": c.tolist()})
    return {"format": FIELD_FORMAT, "k": solution.k, "elements": out}


def write_field(solution, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(field_dump(solution), fh)
