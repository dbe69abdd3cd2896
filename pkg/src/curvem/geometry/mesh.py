"""Curved-polygon mesh topology and per-element geometry."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize_scalar
from scipy.spatial.distance import pdist

from ..errors import GeometryError, MeshError, MeshQualityError
from .curves import Line
from .quadrature import curve_rule, fan_rule

STRAIGHT = "straight"
CURVED = "curved"
INTERIOR = "interior"
DIRICHLET = "dirichlet"
ROBIN = "robin"

_DECLARATIONS = (STRAIGHT, CURVED)
_BOUNDARIES = (INTERIOR, DIRICHLET, ROBIN)


@dataclass
class MeshEdge:
    """An edge between two mesh vertices.

    ``curve`` is the geometry traversed from ``v0`` to ``v1``; ``None``
    means the straight segment.  ``declared`` is independent of the actual
    shape: a curved-declared edge may happen to be straight.
    """

    v0: int
    v1: int
    curve: object = None
    declared: str = STRAIGHT
    boundary: str = INTERIOR

    @property
    def is_curved(self):
        return self.declared == CURVED


@dataclass
class Element:
    """Counterclockwise loop of ``(edge_id, sign)``; sign +1 walks v0 -> v1."""

    edges: list
    region: int = 0


@dataclass
class ElementGeometry:
    eid: int
    loop: list
    vertices: list
    coords: np.ndarray
    curves: list
    rules: list
    area: float
    centroid: np.ndarray
    diameter: float
    curved_local: object
    star_center: np.ndarray = field(default=None)

    def boundary_nodes(self):
        """All boundary quadrature nodes with signed outward normals and weights."""
        pts = np.concatenate([r.points for r, _ in self.rules])
        nrm = np.concatenate([s * r.normals for r, s in self.rules])
        wts = np.concatenate([r.weights for r, _ in self.rules])
        return pts, nrm, wts

    @property
    def perimeter(self):
        return float(sum(r.length for r, _ in self.rules))


class Mesh:
    """Vertices, edges and elements of a decomposition with curved edges.

    Parameters
    ----------
    vertices : array_like, shape (nv, 2)
    edges : list of MeshEdge
        Each edge must satisfy ``v0 < v1`` (canonical orientation).
    elements : list of Element
    kappa : dict, optional
        Region id -> positive diffusion coefficient.
    """

    def __init__(self, vertices, edges, elements, kappa=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.edges = list(edges)
        self.elements = list(elements)
        self.kappa = {int(r): float(v) for r, v in (kappa or {0: 1.0}).items()}
        self._rule_cache = {}
        self._geom_cache = {}
        self._edge_elements = None
        for i, e in enumerate(self.edges):
            if e.declared not in _DECLARATIONS or e.boundary not in _BOUNDARIES:
                raise MeshError(f"edge {i}: bad declared/boundary tag")
            if e.v0 >= e.v1:
                raise MeshError(f"edge {i}: canonical orientation requires v0 < v1")
            p0, p1 = self.vertices[e.v0], self.vertices[e.v1]
            chord = np.linalg.norm(p1 - p0)
            if chord == 0.0:
                raise GeometryError(f"edge {i}: coincident endpoints")
            if e.curve is None:
                e.curve = Line(p0, p1)
            else:
                tol = 1e-12 * max(chord, 1.0)
                if (np.linalg.norm(e.curve.start() - p0) > tol
                        or np.linalg.norm(e.curve.end() - p1) > tol):
                    raise GeometryError(f"edge {i}: curve endpoints do not match its vertices")
            if e.declared == STRAIGHT and not e.curve.is_straight():
                raise MeshError(f"edge {i}: declared straight but has curved geometry")

    # -- topology ---------------------------------------------------------

    def edge_elements(self):
        """For every edge, the list of adjacent element ids."""
        if self._edge_elements is None:
            adj = [[] for _ in self.edges]
            for eid, el in enumerate(self.elements):
                for k, _ in el.edges:
                    adj[k].append(eid)
            self._edge_elements = adj
        return self._edge_elements

    def loop_vertices(self, eid):
        out = []
        for k, sign in self.elements[eid].edges:
            e = self.edges[k]
            out.append(e.v0 if sign > 0 else e.v1)
        return out

    def region_kappa(self, eid):
        return self.kappa[self.elements[eid].region]

    def validate(self):
        """Check loop closure, curved-edge count and boundary consistency."""
        adj = self.edge_elements()
        for eid, el in enumerate(self.elements):
            n = len(el.edges)
            if n < 3 and not any(self.edges[k].is_curved for k, _ in el.edges):
                raise MeshError(f"element {eid}: fewer than three edges")
            for i, (k, sign) in enumerate(el.edges):
                e = self.edges[k]
                k2, s2 = el.edges[(i + 1) % n]
                end = e.v1 if sign > 0 else e.v0
                e2 = self.edges[k2]
                start = e2.v0 if s2 > 0 else e2.v1
                if end != start:
                    raise MeshError(f"element {eid}: boundary loop not closed at edge {k}")
            if sum(self.edges[k].is_curved for k, _ in el.edges) > 1:
                raise MeshError(f"element {eid}: more than one curved edge")
            if el.region not in self.kappa:
                raise MeshError(f"element {eid}: region {el.region} has no kappa value")
        for k, e in enumerate(self.edges):
            if len(adj[k]) == 0 or len(adj[k]) > 2:
                raise MeshError(f"edge {k}: adjacent to {len(adj[k])} elements")
            on_boundary = len(adj[k]) == 1
            if on_boundary and e.boundary == INTERIOR:
                raise MeshError(f"edge {k}: boundary edge tagged interior")
            if not on_boundary and e.boundary != INTERIOR:
                raise MeshError(f"edge {k}: interior edge tagged {e.boundary}")
        if all(v <= 0 for v in self.kappa.values()):
            raise MeshError("kappa must be positive")

    # -- geometry ---------------------------------------------------------

    def edge_rule(self, k, n):
        key = (k, n)
        rule = self._rule_cache.get(key)
        if rule is None:
            e = self.edges[k]
            chord = np.linalg.norm(self.vertices[e.v1] - self.vertices[e.v0])
            rule = curve_rule(e.curve, n, scale=chord)
            self._rule_cache[key] = rule
        return rule

    def geometry(self, eid, n_straight, n_curved):
        """Cached :class:`ElementGeometry` using the given edge rule sizes."""
        key = (eid, n_straight, n_curved)
        geom = self._geom_cache.get(key)
        if geom is None:
            geom = self._build_geometry(eid, n_straight, n_curved)
            self._geom_cache[key] = geom
        return geom

    def _build_geometry(self, eid, n_straight, n_curved):
        el = self.elements[eid]
        rules, curves = [], []
        curved_local = None
        for i, (k, sign) in enumerate(el.edges):
            e = self.edges[k]
            straight = e.curve.is_straight()
            rules.append((self.edge_rule(k, n_straight if straight else n_curved), sign))
            curves.append((e.curve, sign))
            if e.is_curved:
                curved_local = i
        verts = self.loop_vertices(eid)
        coords = self.vertices[verts]
        pts = np.concatenate([r.points for r, _ in rules])
        nx = np.concatenate([s * r.normals[:, 0] * r.weights for r, s in rules])
        area = float(np.sum(pts[:, 0] * nx))
        if area <= 0:
            raise GeometryError(f"element {eid}: non-positive area (check orientation)")
        cx = float(np.sum(0.5 * pts[:, 0] ** 2 * nx)) / area
        cy = float(np.sum(pts[:, 0] * pts[:, 1] * nx)) / area
        diameter = float(np.max(pdist(coords)))
        for curve, _ in curves:
            if not curve.is_straight():
                diameter = max(diameter, _farthest_on_curve(curve, coords))
        geom = ElementGeometry(eid, list(el.edges), verts, coords, curves, rules, area,
                               np.array([cx, cy]), diameter, curved_local)
        geom.star_center = _star_center(geom)
        return geom


def _farthest_on_curve(curve, points, n_samples=65):
    """Largest distance from any of ``points`` to the curve.

    Sampled and then refined by a bounded scalar search, so the value does
    not depend on how the curve is parametrized beyond round-off.
    """
    t = np.linspace(curve.t0, curve.t1, n_samples)
    xy = curve.eval(t)
    lo_t, hi_t = min(curve.t0, curve.t1), max(curve.t0, curve.t1)
    best = 0.0
    for p in points:
        d = np.hypot(xy[:, 0] - p[0], xy[:, 1] - p[1])
        i = int(np.argmax(d))
        a, b = t[max(i - 1, 0)], t[min(i + 1, n_samples - 1)]
        a, b = max(min(a, b), lo_t), min(max(a, b), hi_t)
        res = minimize_scalar(lambda s: -np.hypot(*(curve.eval(np.array([s]))[0] - p)),
                              bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12 * max(hi_t - lo_t, 1e-300)})
        best = max(best, d[i], -float(res.fun))
    return best


def _sees_boundary(geom, c):
    for rule, sign in geom.rules:
        rel = rule.points - c
        det = sign * (rel[:, 0] * rule.tangents[:, 1] - rel[:, 1] * rule.tangents[:, 0])
        if np.any(det <= 1e-12 * geom.diameter**2):
            return False
    return True


def _kernel_halfplanes(geom, n_curve=64):
    normals, offsets = [], []
    for (curve, sign), (rule, _) in zip(geom.curves, geom.rules):
        if curve.is_straight():
            p = curve.start()
            nrm = sign * rule.normals[0]
            normals.append(nrm[None, :])
            offsets.append(np.array([nrm @ p]))
        else:
            t = np.linspace(curve.t0, curve.t1, n_curve)
            pts = curve.eval(t)
            der = curve.tangent(t) * np.sign(curve.t1 - curve.t0)
            speed = np.hypot(der[:, 0], der[:, 1])
            ok = speed > 1e-14 * geom.diameter
            tang = der[ok] / speed[ok, None]
            nrm = sign * np.stack([tang[:, 1], -tang[:, 0]], axis=-1)
            normals.append(nrm)
            offsets.append(np.einsum("ij,ij->i", nrm, pts[ok]))
    return np.concatenate(normals), np.concatenate(offsets)


def chebyshev_kernel_ball(geom):
    """Largest ball the element is star-shaped with respect to: ``(center, radius)``."""
    A, b = _kernel_halfplanes(geom)
    A_ub = np.column_stack([A, np.ones(len(A))])
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=A_ub, b_ub=b,
                  bounds=[(None, None), (None, None), (0.0, None)], method="highs")
    if not res.success:
        raise MeshQualityError(f"element {geom.eid}: not star-shaped")
    return np.array(res.x[:2]), float(res.x[2])


def _star_center(geom):
    if _sees_boundary(geom, geom.centroid):
        return geom.centroid.copy()
    c, r = chebyshev_kernel_ball(geom)
    if r <= 0 or not _sees_boundary(geom, c):
        raise MeshQualityError(f"element {geom.eid}: no admissible star center")
    return c


def monomial_moments(geom, center, scale, max_degree):
    """Integrals of scaled monomials over the element.

    Returns ``M`` with ``M[a, b] = \\int_P xi^a eta^b`` where
    ``xi = (x - center_x) / scale`` and ``eta = (y - center_y) / scale``,
    filled for ``a + b <= max_degree``.  Computed on the boundary through
    the field ``F = scale / (a + 1) xi^(a+1) eta^b e_x`` whose divergence
    is the integrand.
    """
    pts, nrm, wts = geom.boundary_nodes()
    xi = (pts[:, 0] - center[0]) / scale
    eta = (pts[:, 1] - center[1]) / scale
    wx = wts * nrm[:, 0] * scale
    d = max_degree
    xp = xi[None, :] ** np.arange(d + 2)[:, None]
    yp = eta[None, :] ** np.arange(d + 1)[:, None]
    M = np.zeros((d + 1, d + 1))
    for a in range(d + 1):
        row = (xp[a + 1] * wx) @ yp[: d + 1 - a].T
        M[a, : d + 1 - a] = row / (a + 1)
    return M


def interior_quadrature(mesh, eid, order, n_curved=16):
    """Points and weights on element ``eid`` exact for degree ``order`` on straight parts."""
    geom = mesh.geometry(eid, order // 2 + 1, max(n_curved, order // 2 + 1))
    return fan_rule(geom.star_center, geom.rules, (order + 1) // 2 + 1)


def element_diagnostics(mesh, eid, n_curved=16):
    """Shape diagnostics: star-shapedness ratio and shortest-edge ratio."""
    geom = mesh.geometry(eid, 2, n_curved)
    _, rho = chebyshev_kernel_ball(geom)
    lengths = [r.length for r, _ in geom.rules]
    return {
        "element": eid,
        "h": geom.diameter,
        "area": geom.area,
        "rho": rho,
        "rho_over_h": rho / geom.diameter,
        "min_edge_over_h": min(lengths) / geom.diameter,
        "curved": geom.curved_local is not None,
    }


def mesh_diagnostics(mesh, n_curved=16):
    rows = [element_diagnostics(mesh, e, n_curved) for e in range(len(mesh.elements))]
    return {
        "elements": len(rows),
        "h_max": max(r["h"] for r in rows),
        "theta_min": min(r["rho_over_h"] for r in rows),
        "theta1_min": min(r["min_edge_over_h"] for r in rows),
        "per_element": rows,
    }


def tg_points(edge, k, p0=None, p1=None):
    """Trace generator points of a curved-declared edge.

    The interior and apex-side Lagrange nodes of order ``k`` of the
    equilateral triangle built on the chord ``v0 -> v1``, with the two chord
    endpoints removed.  The apex goes on the side where the curve bulges;
    for (numerically) straight curves it goes on the left of ``v0 -> v1``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a = np.asarray(edge.curve.start() if p0 is None else p0, dtype=float)
    b = np.asarray(edge.curve.end() if p1 is None else p1, dtype=float)
    d = b - a
    chord = np.hypot(d[0], d[1])
    if chord == 0.0:
        raise GeometryError("coincident endpoints on a curved edge")
    left = np.array([-d[1], d[0]]) / chord
    tm = 0.5 * (edge.curve.t0 + edge.curve.t1)
    bulge = float((edge.curve.eval(tm) - 0.5 * (a + b)) @ left)
    side = -1.0 if bulge < -1e-10 * chord else 1.0
    apex = 0.5 * (a + b) + side * (np.sqrt(3.0) / 2.0) * chord * left
    pts = []
    for i in range(k + 1):
        for j in range(k + 1 - i):
            l = k - i - j
            if (i == k) or (j == k):
                continue
            pts.append((i * a + j * b + l * apex) / k)
    return np.array(pts)
