"""Global generator numbering, stabilization ownership and system assembly."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .element import (GL, MOMENT, TGP, VERTEX, ElementOperators, QuadratureConfig, Slot,
                      dirichlet_coupling, dirichlet_trace_data, gl_points, local_load,
                      local_robin, local_stiffness)
from .errors import ConfigError, DataError, MeshError
from .geometry.mesh import DIRICHLET, ROBIN
from .poly2d import dim_pk

OWNER_SMALLER_ID = "smaller-id"
OWNER_LARGER_KAPPA = "larger-kappa"
OWNER_BOTH = "both"
OWNER_ONE_SIDED = "one-sided"
POLICIES = (OWNER_SMALLER_ID, OWNER_LARGER_KAPPA, OWNER_BOTH, OWNER_ONE_SIDED)


@dataclass
class DofMap:
    """Global slot numbering.

    ``index`` maps a :class:`~curvem.element.Slot` to its global number.
    ``constrained`` maps global numbers on the closure of the Dirichlet
    boundary to their prescribed values.
    """

    k: int
    index: dict
    slots: list
    constrained: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.slots)

    @property
    def free(self):
        c = self.constrained
        return np.array([i for i in range(self.size) if i not in c], dtype=int)

    def globals_of(self, layout):
        return np.array([self.index[s] for s in layout.slots], dtype=int)


def number_generators(mesh, k, g_D=None):
    """Number vertices, then edges by id, then elements.

    Slots on straight Dirichlet edges and the endpoints of any Dirichlet
    edge are constrained to ``g_D`` (zero when ``g_D`` is None).
    """
    slots = [Slot(VERTEX, v) for v in range(len(mesh.vertices))]
    for kid, e in enumerate(mesh.edges):
        if not e.is_curved:
            slots.extend(Slot(GL, kid, j) for j in range(k - 1))
        elif e.boundary != DIRICHLET:
            slots.extend(Slot(TGP, kid, j) for j in range(dim_pk(k) - 2))
    for eid in range(len(mesh.elements)):
        slots.extend(Slot(MOMENT, eid, j) for j in range(dim_pk(k - 2)))
    index = {s: i for i, s in enumerate(slots)}
    dofs = DofMap(k, index, slots)
    adj = mesh.edge_elements()
    for kid, e in enumerate(mesh.edges):
        if e.boundary != DIRICHLET:
            continue
        if len(adj[kid]) != 1:
            raise MeshError(f"edge {kid}: Dirichlet edge is not on the boundary")
        pts = [(Slot(VERTEX, e.v0), mesh.vertices[e.v0]), (Slot(VERTEX, e.v1), mesh.vertices[e.v1])]
        if not e.is_curved:
            pts += [(Slot(GL, kid, j), p) for j, p in enumerate(gl_points(mesh, kid, k))]
        for s, p in pts:
            val = 0.0 if g_D is None else float(np.asarray(g_D(np.asarray(p)[None, :]))[0])
            if not np.isfinite(val):
                raise DataError(f"g_D not finite at {p}")
            dofs.constrained[index[s]] = val
    return dofs


def choose_stab_owner(mesh, policy=OWNER_SMALLER_ID, kappa=None):
    """Owners of the trace-generator stabilization of each interior curved edge.

    Returns ``{edge_id: set of element ids}``.  Edges separating different
    coefficients get a single owner (the smaller element id, or the side
    with the larger coefficient); otherwise both neighbours own.  The
    ``"both"`` policy never picks a single owner and ``"one-sided"`` always
    picks the smaller id.
    ``kappa`` (region -> value) overrides the mesh's coefficients.
    """
    kappa = kappa or mesh.kappa
    if policy not in POLICIES:
        raise ConfigError(f"unknown ownership policy {policy!r}")
    owners = {}
    for kid, elems in enumerate(mesh.edge_elements()):
        e = mesh.edges[kid]
        if not e.is_curved or len(elems) != 2:
            continue
        a, b = elems
        ka, kb = kappa[mesh.elements[a].region], kappa[mesh.elements[b].region]
        if policy == OWNER_ONE_SIDED:
            owners[kid] = {min(a, b)}
        elif ka == kb or policy == OWNER_BOTH:
            owners[kid] = {a, b}
        elif policy == OWNER_SMALLER_ID:
            owners[kid] = {min(a, b)}
        else:
            owners[kid] = {a if ka > kb else b}
    return owners


@dataclass
class Problem:
    """Data of ``-div(kappa grad u) = f`` with Dirichlet and Robin conditions.

    Callables take points of shape ``(m, 2)``; ``f``, ``g_D``, ``g_R`` and
    ``rho`` also receive the region id of the element that evaluates them.
    ``g_R`` additionally receives the outward unit normals.
    """

    f: object
    g_D: object = None
    g_R: object = None
    rho: object = None
    kappa: dict = None


def _region_fn(fn, region, default=0.0):
    if fn is None:
        return lambda x, *a: np.full(len(x), default)
    return lambda x, *a: fn(x, *a, region)


@dataclass
class SparseSystem:
    """Unreduced global matrix and right-hand side with constraint bookkeeping.

    ``K`` includes Robin boundary mass; ``A`` is the bilinear form ``a_h``
    alone (consistency plus stabilization).
    """

    K: sp.csr_matrix
    F: np.ndarray
    dofs: DofMap
    operators: list
    masks: list
    psis: list
    A: sp.csr_matrix = None

    def reduce(self):
        free = self.dofs.free
        u_c = np.zeros(self.dofs.size)
        for i, v in self.dofs.constrained.items():
            u_c[i] = v
        Kf = self.K[free][:, free].tocsc()
        rhs = self.F[free] - self.K[free] @ u_c
        return Kf, rhs, free, u_c

    def expand(self, x_free):
        free = self.dofs.free
        full = np.zeros(self.dofs.size)
        for i, v in self.dofs.constrained.items():
            full[i] = v
        full[free] = x_free
        return full


def element_masks(mesh, operators, owners):
    masks = []
    for eid, ops in enumerate(operators):
        excluded = [kid for kid, own in owners.items() if eid not in own]
        masks.append(ops.stab_mask(excluded))
    return masks


def build_operators(mesh, k, quad=None):
    return [ElementOperators(mesh, eid, k, quad) for eid in range(len(mesh.elements))]


def assemble(mesh, problem, k, quad=None, policy=OWNER_SMALLER_ID, operators=None,
             load_order=None):
    """Assemble the global system of the discrete problem.

    Returns a :class:`SparseSystem` whose ``K`` is the unconstrained global
    stiffness (consistency + stabilization + Robin mass) and ``F`` the load
    including Robin data and the lifting of curved Dirichlet traces.
    """
    quad = quad or QuadratureConfig()
    kappa = problem.kappa or mesh.kappa
    dofs = number_generators(mesh, k, _boundary_fn(mesh, problem.g_D))
    owners = choose_stab_owner(mesh, policy, kappa)
    if operators is None:
        operators = build_operators(mesh, k, quad)
    masks = element_masks(mesh, operators, owners)
    rows, cols, vals, vals_a = [], [], [], []
    F = np.zeros(dofs.size)
    psis = []
    for eid, ops in enumerate(operators):
        region = mesh.elements[eid].region
        kap = kappa[region]
        glob = dofs.globals_of(ops.layout)
        K = local_stiffness(ops, kap, masks[eid])
        vals_a.append(K.ravel())
        Fl = local_load(ops, _region_fn(problem.f, region), load_order)
        psi = np.zeros(0)
        if ops.n_psi:
            if problem.g_D is None:
                psi = np.zeros(ops.n_psi)
            else:
                psi = dirichlet_trace_data(ops, _region_fn(problem.g_D, region))
            Fl = Fl - dirichlet_coupling(ops, kap, masks[eid]) @ psi
        for i, (kid, _) in enumerate(ops.geom.loop):
            if mesh.edges[kid].boundary != ROBIN:
                continue
            M, Fr = local_robin(ops, i, _region_fn(problem.rho, region),
                                _region_fn(problem.g_R, region))
            n = ops.n
            K = K + M[:n, :n]
            Fl = Fl + Fr[:n] - M[:n, n:] @ psi
        if not (np.all(np.isfinite(K)) and np.all(np.isfinite(Fl))):
            raise DataError(f"element {eid}: non-finite local matrix or load")
        rows.append(np.repeat(glob, len(glob)))
        cols.append(np.tile(glob, len(glob)))
        vals.append(K.ravel())
        np.add.at(F, glob, Fl)
        psis.append(psi)
    ij = (np.concatenate(rows), np.concatenate(cols))
    shape = (dofs.size, dofs.size)
    Kg = sp.coo_matrix((np.concatenate(vals), ij), shape=shape).tocsr()
    Ag = sp.coo_matrix((np.concatenate(vals_a), ij), shape=shape).tocsr()
    Kg.sum_duplicates()
    Ag.sum_duplicates()
    return SparseSystem(Kg, F, dofs, operators, masks, psis, Ag)


def _boundary_fn(mesh, g_D):
    """g_D on boundary points, taking the region of the owning element as given."""
    if g_D is None:
        return None
    regions = {el.region for el in mesh.elements}
    region = min(regions)
    adj = mesh.edge_elements()
    for kid, e in enumerate(mesh.edges):
        if e.boundary == DIRICHLET:
            region = mesh.elements[adj[kid][0]].region
            break
    return lambda x: g_D(x, region)


def export_coo(system, path):
    """Write the unreduced matrix as ``i j value`` lines."""
    K = system.K.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        for i, j, v in zip(K.row, K.col, K.data):
            fh.write(f"{i} {j} {v:.17g}\n")
