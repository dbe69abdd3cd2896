"""Built-in mesh generators.

All generators return quadrilateral-dominant meshes in which every element
has at most one curved edge.  The refinement parameter ``n`` halves the
mesh size when doubled.
"""

import numpy as np

from .errors import ConfigError
from .geometry.curves import CircularArc, Line, Reparametrized
from .geometry.mesh import CURVED, DIRICHLET, INTERIOR, ROBIN, STRAIGHT, Element, Mesh, MeshEdge


class MeshBuilder:
    """Collect vertex loops and edge attributes, then emit a :class:`Mesh`."""

    def __init__(self):
        self.points = []
        self.loops = []
        self.regions = []
        self.special = {}

    def vertex(self, p):
        self.points.append(np.asarray(p, dtype=float))
        return len(self.points) - 1

    def element(self, loop, region=0):
        self.loops.append([int(v) for v in loop])
        self.regions.append(region)

    def arc(self, a, b, center, radius, theta_a, theta_b):
        """Mark edge ``a-b`` as a circular arc; angles are those of ``a`` and ``b``."""
        a, b = int(a), int(b)
        if a < b:
            curve = CircularArc(center, radius, theta_a, theta_b)
        else:
            curve = CircularArc(center, radius, theta_b, theta_a)
        self.special[(min(a, b), max(a, b))] = curve

    def build(self, kappa, boundary_tag=None):
        """``boundary_tag(midpoint, curve)`` names the tag of each boundary edge."""
        boundary_tag = boundary_tag or (lambda mid, curve: DIRICHLET)
        index, edges = {}, []
        elements = []
        for loop, region in zip(self.loops, self.regions):
            signed = []
            for i, a in enumerate(loop):
                b = loop[(i + 1) % len(loop)]
                key = (min(a, b), max(a, b))
                if key not in index:
                    curve = self.special.get(key)
                    decl = CURVED if curve is not None else STRAIGHT
                    index[key] = len(edges)
                    edges.append(MeshEdge(key[0], key[1], curve, decl, INTERIOR))
                signed.append((index[key], 1 if a < b else -1))
            elements.append(Element(signed, region))
        count = np.zeros(len(edges), dtype=int)
        for el in elements:
            for k, _ in el.edges:
                count[k] += 1
        pts = np.array(self.points)
        for k, e in enumerate(edges):
            if count[k] == 1:
                curve = e.curve if e.curve is not None else Line(pts[e.v0], pts[e.v1])
                mid = curve.eval(np.array([0.5 * (curve.t0 + curve.t1)]))[0]
                e.boundary = boundary_tag(mid, e.curve)
        mesh = Mesh(pts, edges, elements, kappa)
        mesh.validate()
        return mesh


def _square_perimeter(half, count_per_side):
    """Points on the square ``[-half, half]^2``, counterclockwise from ``(half, -half)``."""
    out = []
    m = count_per_side
    corners = [(half, -half), (half, half), (-half, half), (-half, -half), (half, -half)]
    for s in range(4):
        c0, c1 = np.array(corners[s]), np.array(corners[s + 1])
        for i in range(m):
            out.append(c0 + (c1 - c0) * i / m)
    return np.array(out)


def _side_tagger(tags, half, center):
    """Boundary tags of a square per side name (``left``, ``right``, ``bottom``, ``top``)."""
    def tag(mid, curve):
        x, y = mid - center
        if abs(x - half) < 1e-9:
            return tags.get("right", DIRICHLET)
        if abs(x + half) < 1e-9:
            return tags.get("left", DIRICHLET)
        if abs(y - half) < 1e-9:
            return tags.get("top", DIRICHLET)
        return tags.get("bottom", DIRICHLET)
    return tag


def square_circle_interface(n, r=0.3, kappa=(1.0, 1.0), sides=None):
    """Unit square with a circular interface of radius ``r`` centered at (0.5, 0.5).

    An O-grid: a Cartesian core of half-width ``r/2``, a ring of quadrilaterals
    up to the circle and a ring out to the square boundary.  Only the
    interface edges are curved; every one of them is a :class:`CircularArc`
    separating region 1 (inside, ``kappa[1]``) from region 0 (outside).

    Parameters
    ----------
    n : int
        Even refinement parameter, at least 4; ``2n`` ring cells around the circle.
    sides : dict, optional
        Boundary tag per side name; Dirichlet by default.
    """
    if n < 4 or n % 2:
        raise ConfigError("square-circle-interface needs an even n >= 4")
    if not 0.05 <= r <= 0.45:
        raise ConfigError("radius must lie in [0.05, 0.45]")
    c = np.array([0.5, 0.5])
    m = n // 2
    ncirc = 4 * m
    li = max(1, n // 4)
    lo = max(1, n // 4)
    a = 0.5 * r
    b = MeshBuilder()

    core = np.empty((m + 1, m + 1), dtype=int)
    for i in range(m + 1):
        for j in range(m + 1):
            core[i, j] = b.vertex(c + (-a + 2 * a * i / m, -a + 2 * a * j / m))
    for i in range(m):
        for j in range(m):
            b.element([core[i, j], core[i + 1, j], core[i + 1, j + 1], core[i, j + 1]], 1)

    # core perimeter in the ring's order, starting at the (a, -a) corner
    ring0 = []
    for i in range(m):
        ring0.append(core[m, i])
    for i in range(m):
        ring0.append(core[m - i, m])
    for i in range(m):
        ring0.append(core[0, m - i])
    for i in range(m):
        ring0.append(core[i, 0])
    inner = b.points
    theta = -0.25 * np.pi + 2 * np.pi * np.arange(ncirc) / ncirc
    circle = c + r * np.column_stack([np.cos(theta), np.sin(theta)])
    outer = c + _square_perimeter(0.5, m)
    sq = np.array([inner[v] for v in ring0])

    layers = [ring0]
    for ell in range(1, li + 1):
        if ell == li:
            layers.append([b.vertex(p) for p in circle])
        else:
            s = ell / li
            layers.append([b.vertex((1 - s) * p + s * q) for p, q in zip(sq, circle)])
    for ell in range(1, lo + 1):
        s = ell / lo
        layers.append([b.vertex((1 - s) * p + s * q) for p, q in zip(circle, outer)])

    for ell in range(len(layers) - 1):
        region = 1 if ell < li else 0
        lo_, hi_ = layers[ell], layers[ell + 1]
        for j in range(ncirc):
            j1 = (j + 1) % ncirc
            b.element([lo_[j], hi_[j], hi_[j1], lo_[j1]], region)
    ring = layers[li]
    for j in range(ncirc):
        j1 = (j + 1) % ncirc
        t1 = theta[0] + 2 * np.pi if j1 == 0 else theta[j1]
        b.arc(ring[j], ring[j1], c, r, theta[j], t1)
    return b.build({0: kappa[0], 1: kappa[1]}, _side_tagger(sides or {}, 0.5, c))


def disk_boundary(n, boundary=DIRICHLET, radius=1.0):
    """Disk centered at the origin whose boundary edges are circular arcs.

    ``boundary`` is ``"dirichlet"``, ``"robin"`` or ``"mixed"`` (Dirichlet on
    the upper half, Robin on the lower half).
    """
    if n < 4 or n % 2:
        raise ConfigError("disk-boundary needs an even n >= 4")
    if boundary not in (DIRICHLET, ROBIN, "mixed"):
        raise ConfigError(f"unknown disk boundary {boundary!r}")
    m = n // 2
    ncirc = 4 * m
    layers_n = max(1, n // 4)
    a = 0.5 * radius
    b = MeshBuilder()
    core = np.empty((m + 1, m + 1), dtype=int)
    for i in range(m + 1):
        for j in range(m + 1):
            core[i, j] = b.vertex((-a + 2 * a * i / m, -a + 2 * a * j / m))
    for i in range(m):
        for j in range(m):
            b.element([core[i, j], core[i + 1, j], core[i + 1, j + 1], core[i, j + 1]])
    ring0 = ([core[m, i] for i in range(m)] + [core[m - i, m] for i in range(m)]
             + [core[0, m - i] for i in range(m)] + [core[i, 0] for i in range(m)])
    sq = np.array([b.points[v] for v in ring0])
    theta = -0.25 * np.pi + 2 * np.pi * np.arange(ncirc) / ncirc
    circle = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    layers = [ring0]
    for ell in range(1, layers_n + 1):
        s = ell / layers_n
        pts = circle if ell == layers_n else (1 - s) * sq + s * circle
        layers.append([b.vertex(p) for p in pts])
    for ell in range(layers_n):
        for j in range(ncirc):
            j1 = (j + 1) % ncirc
            b.element([layers[ell][j], layers[ell + 1][j], layers[ell + 1][j1], layers[ell][j1]])
    ring = layers[-1]
    for j in range(ncirc):
        j1 = (j + 1) % ncirc
        t1 = theta[0] + 2 * np.pi if j1 == 0 else theta[j1]
        b.arc(ring[j], ring[j1], np.zeros(2), radius, theta[j], t1)

    def tag(mid, curve):
        if boundary == "mixed":
            return DIRICHLET if mid[1] > 0 else ROBIN
        return boundary
    return b.build({0: 1.0}, tag)


def square_straight(n, kappa=1.0, sides=None):
    """Uniform ``n x n`` grid of squares on the unit square; no curved edges."""
    if n < 1:
        raise ConfigError("square-straight needs n >= 1")
    b = MeshBuilder()
    idx = np.empty((n + 1, n + 1), dtype=int)
    for i in range(n + 1):
        for j in range(n + 1):
            idx[i, j] = b.vertex((i / n, j / n))
    for i in range(n):
        for j in range(n):
            b.element([idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]])
    return b.build({0: kappa}, _side_tagger(sides or {}, 0.5, np.array([0.5, 0.5])))


def l_shape(n):
    """L-shaped domain ``[-1, 1]^2`` minus the lower-right quadrant (re-entrant corner at 0)."""
    if n < 1:
        raise ConfigError("l-shape needs n >= 1")
    b = MeshBuilder()
    h = 1.0 / n
    ids = {}
    for i in range(-n, n + 1):
        for j in range(-n, n + 1):
            if i > 0 and j < 0:
                continue
            ids[i, j] = b.vertex((i * h, j * h))
    for i in range(-n, n):
        for j in range(-n, n):
            if i >= 0 and j < 0:
                continue
            b.element([ids[i, j], ids[i + 1, j], ids[i + 1, j + 1], ids[i, j + 1]])
    return b.build({0: 1.0})


def replace_with_chords(mesh, declared=CURVED):
    """Copy of ``mesh`` with every curved geometry replaced by its chord.

    ``declared`` sets the declaration of those edges: keeping ``"curved"``
    produces straight edges that still carry trace generator slots.
    """
    edges = []
    for e in mesh.edges:
        if e.is_curved:
            p0, p1 = mesh.vertices[e.v0], mesh.vertices[e.v1]
            edges.append(MeshEdge(e.v0, e.v1, Line(p0, p1), declared, e.boundary))
        else:
            edges.append(MeshEdge(e.v0, e.v1, e.curve, e.declared, e.boundary))
    elements = [Element(list(el.edges), el.region) for el in mesh.elements]
    return Mesh(mesh.vertices.copy(), edges, elements, dict(mesh.kappa))


def reparametrize(mesh, power=3):
    """Copy of ``mesh`` whose curved edges use ``t = t0 + (t1 - t0) s**power``."""
    edges = []
    for e in mesh.edges:
        curve = e.curve
        if e.is_curved and not curve.is_straight():
            curve = Reparametrized(curve, power)
        edges.append(MeshEdge(e.v0, e.v1, curve, e.declared, e.boundary))
    elements = [Element(list(el.edges), el.region) for el in mesh.elements]
    return Mesh(mesh.vertices.copy(), edges, elements, dict(mesh.kappa))


GENERATORS = {
    "square-circle-interface": square_circle_interface,
    "disk-boundary": disk_boundary,
    "square-straight": square_straight,
    "l-shape": l_shape,
}


def generate(name, **params):
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise ConfigError(f"unknown mesh generator {name!r}; choose from {sorted(GENERATORS)}")
    return fn(**params)
