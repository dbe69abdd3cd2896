"""Local virtual element machinery on (possibly curved) polygons.

An element is handled through its *generator* vector: vertex values,
Gauss-Lobatto values on straight edges, values at the trace generator
points of a curved edge, and scaled interior moments.  On a curved edge
the trace is the restriction of the unique polynomial of degree k that
interpolates the two endpoint values and the trace generator values, so
several generator vectors may describe the same function.

Elements with a curved Dirichlet edge carry no generators on that edge;
their trace there is a given function ``psi`` sampled at the edge's
quadrature nodes and at its two endpoints.  Everything below is affine in
``(g, psi)`` and stored as separate linear maps.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, GeometryError, UnsupportedConfiguration
from .geometry.mesh import DIRICHLET, INTERIOR, ROBIN, interior_quadrature, monomial_moments, tg_points
from .geometry.quadrature import gauss_lobatto_interior01
from .poly2d import ScaledMonomialBasis, dim_pk, mass_moments, stiffness_gram

VERTEX = "vertex"
GL = "gl"
TGP = "tgp"
MOMENT = "moment"


@dataclass(frozen=True)
class Slot:
    kind: str
    entity: int
    index: int = 0


@dataclass
class QuadratureConfig:
    """Edge rule sizes; ``None`` selects the defaults for the order ``k``."""

    curved_points: object = None
    straight_points: object = None

    def curved(self, k):
        return self.curved_points or max(4 * k + 4, 16)

    def straight(self, k):
        return self.straight_points or k + 2


@dataclass
class GeneratorLayout:
    eid: int
    k: int
    etype: int
    slots: list
    curved_edge: object = None
    position: dict = field(default_factory=dict)

    def __post_init__(self):
        self.position = {s: i for i, s in enumerate(self.slots)}

    def __len__(self):
        return len(self.slots)

    def indices(self, kind):
        return [i for i, s in enumerate(self.slots) if s.kind == kind]


def element_type(mesh, eid):
    curved = [k for k, _ in mesh.elements[eid].edges if mesh.edges[k].is_curved]
    if len(curved) > 1:
        raise UnsupportedConfiguration(f"element {eid} has {len(curved)} curved edges")
    if not curved:
        return 0, None
    tag = mesh.edges[curved[0]].boundary
    return {INTERIOR: 1, DIRICHLET: 2, ROBIN: 3}[tag], curved[0]


def build_layout(mesh, eid, k):
    """Ordered generator slots of element ``eid`` for order ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    etype, gamma = element_type(mesh, eid)
    skip = set()
    if etype == 2:
        e = mesh.edges[gamma]
        skip = {e.v0, e.v1}
    slots = [Slot(VERTEX, v) for v in mesh.loop_vertices(eid) if v not in skip]
    for kid, _ in mesh.elements[eid].edges:
        if not mesh.edges[kid].is_curved:
            slots.extend(Slot(GL, kid, j) for j in range(k - 1))
    if etype in (1, 3):
        slots.extend(Slot(TGP, gamma, j) for j in range(dim_pk(k) - 2))
    slots.extend(Slot(MOMENT, eid, j) for j in range(dim_pk(k - 2)))
    return GeneratorLayout(eid, k, etype, slots, gamma)


def _lagrange_1d(s, nodes):
    s = np.asarray(s)
    out = np.ones((len(s), len(nodes)))
    for j, xj in enumerate(nodes):
        for m, xm in enumerate(nodes):
            if m != j:
                out[:, j] *= (s - xm) / (xj - xm)
    return out


def gl_points(mesh, kid, k):
    e = mesh.edges[kid]
    p0, p1 = mesh.vertices[e.v0], mesh.vertices[e.v1]
    s = gauss_lobatto_interior01(k)
    return p0 + s[:, None] * (p1 - p0)


def curved_trace_basis(mesh, kid, k):
    """Nodes and Lagrange data of the polynomial trace on a curved-declared edge.

    Cached per edge so that both neighbours use bitwise identical data.
    """
    key = ("trace", kid, k)
    hit = mesh._rule_cache.get(key)
    if hit is not None:
        return hit
    e = mesh.edges[kid]
    p0, p1 = mesh.vertices[e.v0], mesh.vertices[e.v1]
    nodes = np.vstack([p0, p1, tg_points(e, k, p0, p1)])
    local = ScaledMonomialBasis(0.5 * (p0 + p1), np.linalg.norm(p1 - p0), k)
    V = local.eval(nodes)
    if np.linalg.cond(V) > 1e12:
        raise GeometryError(f"edge {kid}: trace generator nodes are not unisolvent")
    hit = (nodes, local, np.linalg.inv(V))
    mesh._rule_cache[key] = hit
    return hit


class ElementOperators:
    """Projection operators and trace maps of one element.

    Attributes
    ----------
    layout : GeneratorLayout
    basis : ScaledMonomialBasis
        Centered at the centroid, scaled by the diameter.
    D : (N, nk) array
        Generator values of every basis monomial.
    pi, pi_psi : arrays
        Coefficients of the energy projection: ``c = pi @ g + pi_psi @ psi``.
    pi0 : array or None
        Coefficients of the L2 projection onto degree ``k-2`` (``k >= 2``).
    """

    def __init__(self, mesh, eid, k, quad=None):
        self.mesh = mesh
        self.eid = eid
        self.k = k
        self.quad = quad or QuadratureConfig()
        self.layout = build_layout(mesh, eid, k)
        self.etype = self.layout.etype
        self.geom = mesh.geometry(eid, self.quad.straight(k), self.quad.curved(k))
        g = self.geom
        self.basis = ScaledMonomialBasis(g.centroid, g.diameter, k)
        self.moments = monomial_moments(g, g.centroid, g.diameter, 2 * k)
        self.G = stiffness_gram(self.moments, self.basis)
        self.mass = mass_moments(self.moments, self.basis, k)
        self.n = len(self.layout)
        self._setup_psi()
        self._build_traces()
        self._build_projections()

    # -- setup -------------------------------------------------------------

    def _setup_psi(self):
        self.psi_points = np.zeros((0, 2))
        self.gamma_local = None
        if self.etype == 2:
            kid = self.layout.curved_edge
            for i, (kk, _) in enumerate(self.geom.loop):
                if kk == kid:
                    self.gamma_local = i
            rule = self.geom.rules[self.gamma_local][0]
            e = self.mesh.edges[kid]
            ends = self.mesh.vertices[[e.v0, e.v1]]
            self.psi_points = np.vstack([rule.points, ends])
            self._psi_vertex = {e.v0: len(rule.points), e.v1: len(rule.points) + 1}
        self.n_psi = len(self.psi_points)

    def _vertex_col(self, v):
        i = self.layout.position.get(Slot(VERTEX, v))
        if i is not None:
            return i
        return self.n + self._psi_vertex[v]

    def _edge_trace(self, i, pts):
        """Trace matrix (len(pts), n + n_psi) on loop edge ``i`` at points ``pts``."""
        kid, _ = self.geom.loop[i]
        e = self.mesh.edges[kid]
        k = self.k
        T = np.zeros((len(pts), self.n + self.n_psi))
        if i == self.gamma_local:
            raise ValueError("trace on a Dirichlet curved edge is the given data")
        if not e.is_curved:
            p0, p1 = self.mesh.vertices[e.v0], self.mesh.vertices[e.v1]
            d = p1 - p0
            s = (pts - p0) @ d / (d @ d)
            nodes = np.concatenate([[0.0], gauss_lobatto_interior01(k), [1.0]])
            L = _lagrange_1d(s, nodes)
            cols = ([self._vertex_col(e.v0)]
                    + [self.layout.position[Slot(GL, kid, j)] for j in range(k - 1)]
                    + [self._vertex_col(e.v1)])
        else:
            _, local, Vinv = curved_trace_basis(self.mesh, kid, k)
            L = local.eval(pts) @ Vinv
            cols = ([self._vertex_col(e.v0), self._vertex_col(e.v1)]
                    + [self.layout.position[Slot(TGP, kid, j)] for j in range(dim_pk(k) - 2)])
        T[:, cols] += L
        return T

    def _build_traces(self):
        self.traces = []
        nq_gamma = 0
        for i, (rule, sign) in enumerate(self.geom.rules):
            if i == self.gamma_local:
                nq = len(rule.points)
                T = np.zeros((nq, self.n + self.n_psi))
                T[:, self.n:self.n + nq] = np.eye(nq)
                nq_gamma = nq
            else:
                T = self._edge_trace(i, rule.points)
            self.traces.append(T)
        self._nq_gamma = nq_gamma

    def _build_projections(self):
        k, n = self.k, self.n
        basis = self.basis
        nk = len(basis)
        n2 = dim_pk(k - 2)
        area = self.geom.area
        ext = n + self.n_psi
        R = np.zeros((nk, ext))
        mean = np.zeros(ext)
        mean_poly = np.zeros(nk)
        for (rule, sign), T in zip(self.geom.rules, self.traces):
            nrm = sign * rule.normals
            dn = np.einsum("qid,qd->qi", basis.grad(rule.points), nrm)
            R += (dn * rule.weights[:, None]).T @ T
            mean += rule.weights @ T
            mean_poly += rule.weights @ basis.eval(rule.points)
        mom_idx = self.layout.indices(MOMENT)
        self.S_mom = np.zeros((n2, ext))
        self.S_mom[np.arange(n2), mom_idx] = 1.0
        if k >= 2:
            R -= area * basis.laplacian_matrix() @ self.S_mom
        R[0] = mean
        lhs = self.G.copy()
        lhs[0] = mean_poly
        if np.linalg.cond(lhs) > 1e13:
            raise GeometryError(f"element {self.eid}: singular projection system")
        pi_ext = np.linalg.solve(lhs, R)
        self.pi = pi_ext[:, :n]
        self.pi_psi = pi_ext[:, n:]
        D = np.zeros((n, nk))
        for i, s in enumerate(self.layout.slots):
            if s.kind == MOMENT:
                D[i] = self.mass[:, s.index] / area
            else:
                D[i] = basis.eval(self.slot_point(s))
        self.D = D
        self.pi_gen = D @ self.pi
        if k >= 2:
            M2 = self.mass[:n2, :n2]
            self.pi0 = np.linalg.solve(M2, area * self.S_mom[:, :n])
        else:
            self.pi0 = None

    # -- queries -------------------------------------------------------------

    def slot_point(self, slot):
        if slot.kind == VERTEX:
            return self.mesh.vertices[slot.entity]
        if slot.kind == GL:
            return gl_points(self.mesh, slot.entity, self.k)[slot.index]
        if slot.kind == TGP:
            nodes, _, _ = curved_trace_basis(self.mesh, slot.entity, self.k)
            return nodes[2 + slot.index]
        raise ValueError("moment slots have no point")

    def project(self, g, psi=None):
        """Coefficients of the energy projection of the generator vector ``g``."""
        c = self.pi @ g
        if self.n_psi and psi is not None:
            c = c + self.pi_psi @ psi
        return c

    def generators_of(self, coeffs):
        """The operator G: generator vector of the polynomial with these coefficients."""
        return self.D @ coeffs

    def psi_of_poly(self, coeffs):
        return self.basis.eval(self.psi_points) @ coeffs if self.n_psi else np.zeros(0)

    def stab_mask(self, exclude_edges=()):
        """Slots that enter the stabilization; tgp slots of ``exclude_edges`` are left out."""
        mask = np.ones(self.n)
        for i, s in enumerate(self.layout.slots):
            if s.kind == TGP and s.entity in exclude_edges:
                mask[i] = 0.0
        return mask


def trace_eval(ops, g, local_edge, t, psi=None):
    """Trace of the generator vector ``g`` on loop edge ``local_edge`` at curve parameters ``t``.

    On a Dirichlet curved edge the trace is the callable ``psi``.
    """
    kid, _ = ops.geom.loop[local_edge]
    pts = ops.mesh.edges[kid].curve.eval(np.atleast_1d(t))
    if local_edge == ops.gamma_local:
        if psi is None:
            raise DataError("Dirichlet curved edge needs its trace data")
        return np.asarray(psi(pts), dtype=float)
    T = ops._edge_trace(local_edge, pts)
    g_ext = np.concatenate([g, np.zeros(ops.n_psi)])
    if ops.n_psi:
        for v, j in ops._psi_vertex.items():
            if psi is not None:
                g_ext[ops.n + j] = float(np.asarray(psi(ops.mesh.vertices[v][None, :]))[0])
    return T @ g_ext


def matrix_D(ops):
    return ops.D


def pi_nabla(ops):
    """``(pi, pi_psi)``: generator and Dirichlet-data parts of the energy projection."""
    return ops.pi, ops.pi_psi


def pi0_km2(ops):
    if ops.k < 2:
        raise ValueError("the L2 projection onto degree k-2 needs k >= 2")
    return ops.pi0


def _stab_residual(ops):
    return np.eye(ops.n) - ops.D @ ops.pi


def local_stiffness(ops, kappa, mask=None):
    """``kappa (pi^T G pi + R^T diag(mask) R)`` with ``R = I - D pi``."""
    mask = np.ones(ops.n) if mask is None else np.asarray(mask, dtype=float)
    Rs = _stab_residual(ops)
    K = ops.pi.T @ ops.G @ ops.pi + (Rs * mask[:, None]).T @ Rs
    K = kappa * K
    return 0.5 * (K + K.T)


def dirichlet_coupling(ops, kappa, mask=None):
    """Matrix ``C`` with ``a_h(u, v) = g_v^T K g_u + g_v^T C psi_u`` for test functions with zero data."""
    if not ops.n_psi:
        return np.zeros((ops.n, 0))
    mask = np.ones(ops.n) if mask is None else np.asarray(mask, dtype=float)
    Rs = _stab_residual(ops)
    return kappa * (ops.pi.T @ ops.G @ ops.pi_psi - (Rs * mask[:, None]).T @ ops.D @ ops.pi_psi)


def dirichlet_trace_data(ops, g_D):
    """Samples of ``g_D`` where the element needs its curved Dirichlet trace."""
    if not ops.n_psi:
        return np.zeros(0)
    vals = np.asarray(g_D(ops.psi_points), dtype=float)
    if vals.shape != (ops.n_psi,) or not np.all(np.isfinite(vals)):
        raise DataError(f"element {ops.eid}: Dirichlet data not evaluable on the curved edge")
    return vals


def local_energy(ops, kappa, g, psi=None, mask=None):
    """``a_h^P`` of the pair ``(g, psi)`` with itself."""
    mask = np.ones(ops.n) if mask is None else np.asarray(mask, dtype=float)
    c = ops.project(g, psi)
    r = g - ops.D @ c
    return float(kappa * (c @ ops.G @ c + np.sum(mask * r * r)))


def local_load(ops, f, order=None):
    """Load vector ``(f, T v)``: ``T`` is the energy projection for k = 1, else the L2 projection onto degree k-2."""
    k = ops.k
    order = order or 2 * k + 2
    pts, w = interior_quadrature(ops.mesh, ops.eid, order, ops.quad.curved(k))
    fv = np.asarray(f(pts), dtype=float)
    if k == 1:
        b = ops.basis.eval(pts).T @ (w * fv)
        return ops.pi.T @ b
    nb = dim_pk(k - 2)
    b = ops.basis.eval(pts)[:, :nb].T @ (w * fv)
    return ops.pi0.T @ b


def local_robin(ops, local_edge, rho, g_R):
    """Edge mass matrix and load over the extended ``(g, psi)`` columns of one Robin edge.

    ``rho(x)`` and ``g_R(x, n)`` are evaluated at the edge quadrature nodes.
    """
    rule, sign = ops.geom.rules[local_edge]
    T = ops.traces[local_edge]
    rv = np.asarray(rho(rule.points), dtype=float) * np.ones(len(rule.points))
    M = (T * (rule.weights * rv)[:, None]).T @ T
    gv = np.asarray(g_R(rule.points, sign * rule.normals), dtype=float)
    F = T.T @ (rule.weights * gv)
    return M, F


def element_operators(mesh, eid, k, quad=None):
    return ElementOperators(mesh, eid, k, quad)

