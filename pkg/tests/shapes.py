"""Random single-element meshes with at most one curved edge."""

import numpy as np

from curvem.geometry import (BezierCubic, CircularArc, Element, Line, Mesh, MeshEdge,
                             PolyParametric)

CURVE_KINDS = ("arc_out", "arc_in", "bezier", "poly", "chord")
TAGS = ("interior", "dirichlet", "robin")


def arc_through(p0, p1, sagitta):
    """Circular arc from p0 to p1 bulging by ``sagitta`` to the right of p0 -> p1."""
    d = p1 - p0
    c = np.hypot(*d)
    n_out = np.array([d[1], -d[0]]) / c
    mid = 0.5 * (p0 + p1)
    s = abs(sagitta)
    R = (c * c / 4 + s * s) / (2 * s)
    center = mid + (sagitta - np.sign(sagitta) * R) * n_out
    t0 = np.arctan2(*(p0 - center)[::-1])
    t1 = np.arctan2(*(p1 - center)[::-1])
    tb = np.arctan2(*(mid + sagitta * n_out - center)[::-1])
    delta = (t1 - t0 + np.pi) % (2 * np.pi) - np.pi
    half = (t0 + delta / 2 - tb + np.pi) % (2 * np.pi) - np.pi
    if abs(half) > 1e-9:
        delta -= np.sign(delta) * 2 * np.pi
    return CircularArc(center, R, t0, t0 + delta)


def _curve(kind, p0, p1, rng):
    d = p1 - p0
    c = np.hypot(*d)
    n_out = np.array([d[1], -d[0]]) / c
    if kind == "arc_out":
        return arc_through(p0, p1, rng.uniform(0.05, 0.3) * c)
    if kind == "arc_in":
        return arc_through(p0, p1, -rng.uniform(0.03, 0.12) * c)
    if kind == "bezier":
        a, b = rng.uniform(-0.1, 0.25, size=2) * c
        ctrl = [p0, p0 + d / 3 + a * n_out, p0 + 2 * d / 3 + b * n_out, p1]
        return BezierCubic(np.array(ctrl))
    if kind == "poly":
        s = rng.uniform(-0.1, 0.25) * c
        w = rng.uniform(-0.05, 0.05) * c
        # p0 + d t + n (4 s t (1 - t) + w t (1 - t) (2 t - 1))
        xc, yc = [], []
        for comp in range(2):
            dn = n_out[comp]
            xc_ = [p0[comp], d[comp] + dn * (4 * s - w), dn * (-4 * s + 3 * w), dn * (-2 * w)]
            (xc if comp == 0 else yc).extend(xc_)
        return PolyParametric(xc, yc)
    return Line(p0, p1)


def random_element(rng, kind=None, tag=None, n_sides=None):
    """A single-element mesh; ``kind=None`` picks a curve kind or no curved edge at all."""
    m = n_sides or int(rng.integers(3, 7))
    ang = np.sort((np.arange(m) + rng.uniform(-0.25, 0.25, size=m)) * 2 * np.pi / m)
    rad = rng.uniform(0.75, 1.25, size=m)
    scale = 10 ** rng.uniform(-1.5, 1.0)
    shift = rng.uniform(-5, 5, size=2)
    pts = shift + scale * np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    if kind is None:
        kind = rng.choice(CURVE_KINDS + ("none",))
    if tag is None:
        tag = rng.choice(TAGS)
    edges = []
    for i in range(m):
        a, b = i, (i + 1) % m
        lo, hi = min(a, b), max(a, b)
        if i == 0 and kind != "none":
            curve = _curve(kind, pts[0], pts[1], rng)
            edges.append(MeshEdge(lo, hi, curve, "curved", str(tag)))
        else:
            edges.append(MeshEdge(lo, hi, None, "straight", "dirichlet"))
    loop = [(i, 1 if i < m - 1 else -1) for i in range(m)]
    return Mesh(pts, edges, [Element(loop, 0)], {0: 1.0})
