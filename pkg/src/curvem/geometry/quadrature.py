"""Quadrature on edges, curved sectors and whole elements."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from ..errors import GeometryError, MeshQualityError


@lru_cache(maxsize=None)
def gauss_legendre01(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    if n < 1:
        raise ValueError("need at least one quadrature point")
    x, w = legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@lru_cache(maxsize=None)
def gauss_lobatto_interior01(k):
    """The k-1 interior Gauss-Lobatto nodes of order k on [0, 1], increasing."""
    if k < 2:
        return np.zeros(0)
    roots = legendre.Legendre.basis(k).deriv().roots()
    x = np.sort(0.5 * (np.real(roots) + 1.0))
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class BoundaryQuadRule:
    """Arclength quadrature on one edge, in the edge's canonical direction.

    ``normals`` are unit vectors on the right of the canonical direction,
    i.e. outward for an element that traverses the edge from v0 to v1
    counterclockwise.  Flip them for the neighbour on the other side.
    """

    points: np.ndarray
    params: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray

    @property
    def length(self):
        return float(self.weights.sum())


def curve_rule(curve, n, scale=1.0):
    s, w = gauss_legendre01(n)
    t = curve.t0 + (curve.t1 - curve.t0) * s
    pts = curve.eval(t)
    der = curve.tangent(t)
    speed = np.hypot(der[:, 0], der[:, 1])
    if np.any(speed <= 1e-14 * scale):
        raise GeometryError("degenerate tangent at an edge quadrature node")
    direction = np.sign(curve.t1 - curve.t0)
    tang = direction * der / speed[:, None]
    normals = np.stack([tang[:, 1], -tang[:, 0]], axis=-1)
    weights = w * abs(curve.t1 - curve.t0) * speed
    return BoundaryQuadRule(pts, t, weights, normals, tang)


def edge_quadrature(edge, n_points):
    """Gauss rule with ``n_points`` nodes on a mesh edge (see :class:`BoundaryQuadRule`)."""
    chord = np.linalg.norm(edge.curve.end() - edge.curve.start())
    return curve_rule(edge.curve, n_points, scale=max(chord, 1e-300))


def fan_rule(center, edges, n_radial):
    """Quadrature over a star-shaped region by sweeping segments from ``center``.

    ``edges`` is a sequence of ``(rule, sign)`` pairs covering the boundary
    counterclockwise.  The map ``(s, x) -> center + s (x - center)`` is
    exact for polynomials on straight sides and blends the curved side.
    """
    s, ws = gauss_legendre01(n_radial)
    pts, wts = [], []
    for rule, sign in edges:
        rel = rule.points - center
        det = sign * (rel[:, 0] * rule.tangents[:, 1] - rel[:, 1] * rule.tangents[:, 0])
        scale = np.max(np.abs(rel)) ** 2 if len(rel) else 1.0
        if np.any(det < -1e-12 * scale):
            raise MeshQualityError("star center does not see the whole boundary")
        p = center + s[:, None, None] * rel[None, :, :]
        w = (ws * s)[:, None] * (rule.weights * det)[None, :]
        pts.append(p.reshape(-1, 2))
        wts.append(w.reshape(-1))
    return np.concatenate(pts), np.concatenate(wts)
