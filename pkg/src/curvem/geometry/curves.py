"""Parametric curve primitives used as element edges.

Every curve maps a parameter interval ``[t0, t1]`` to the plane.  The
interval may be traversed in decreasing order (``t0 > t1``); the curve
always starts at ``eval(t0)`` and ends at ``eval(t1)``.
"""

import numpy as np
from numpy.polynomial import polynomial as npoly

from ..errors import DomainError

_RANGE_TOL = 1e-13


class CurveSegment:
    """Base class: a regular parametric arc ``t -> (x(t), y(t))``."""

    kind = "abstract"

    def __init__(self, t0, t1):
        self.t0 = float(t0)
        self.t1 = float(t1)

    @property
    def t_range(self):
        return (self.t0, self.t1)

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = min(self.t0, self.t1), max(self.t0, self.t1)
        tol = _RANGE_TOL * max(1.0, hi - lo, abs(lo), abs(hi))
        if np.any(t < lo - tol) or np.any(t > hi + tol):
            raise DomainError(f"parameter outside [{lo}, {hi}] for {self.kind} curve")
        return t

    def eval(self, t):
        t = self._check(t)
        return self._eval(t)

    def tangent(self, t):
        """Derivative with respect to ``t`` (not normalized)."""
        t = self._check(t)
        return self._tangent(t)

    def start(self):
        return self._eval(np.asarray(self.t0))

    def end(self):
        return self._eval(np.asarray(self.t1))

    def is_straight(self):
        return False

    def to_dict(self):
        raise NotImplementedError

    def _eval(self, t):
        raise NotImplementedError

    def _tangent(self, t):
        raise NotImplementedError


class Line(CurveSegment):
    kind = "line"

    def __init__(self, p0, p1):
        super().__init__(0.0, 1.0)
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)

    def _eval(self, t):
        t = np.asarray(t)[..., None]
        return (1.0 - t) * self.p0 + t * self.p1

    def _tangent(self, t):
        d = self.p1 - self.p0
        return np.broadcast_to(d, np.shape(t) + (2,)).copy()

    def is_straight(self):
        return True

    def to_dict(self):
        return {"kind": "line", "p0": self.p0.tolist(), "p1": self.p1.tolist()}


class CircularArc(CurveSegment):
    """Arc of a circle; the parameter is the polar angle in radians."""

    kind = "arc"

    def __init__(self, center, radius, theta0, theta1):
        super().__init__(theta0, theta1)
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise DomainError("arc radius must be positive")

    def _eval(self, t):
        t = np.asarray(t)
        return self.center + self.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def _tangent(self, t):
        t = np.asarray(t)
        return self.radius * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def to_dict(self):
        return {"kind": "arc", "center": self.center.tolist(), "radius": self.radius,
                "theta0": self.t0, "theta1": self.t1}


class BezierCubic(CurveSegment):
    kind = "bezier"

    def __init__(self, control):
        super().__init__(0.0, 1.0)
        self.control = np.asarray(control, dtype=float)
        if self.control.shape != (4, 2):
            raise DomainError("cubic Bezier needs 4 control points")

    def _eval(self, t):
        t = np.asarray(t)[..., None]
        s = 1.0 - t
        c = self.control
        return s**3 * c[0] + 3 * s**2 * t * c[1] + 3 * s * t**2 * c[2] + t**3 * c[3]

    def _tangent(self, t):
        t = np.asarray(t)[..., None]
        s = 1.0 - t
        c = self.control
        return 3 * s**2 * (c[1] - c[0]) + 6 * s * t * (c[2] - c[1]) + 3 * t**2 * (c[3] - c[2])

    def to_dict(self):
        return {"kind": "bezier", "control": self.control.tolist()}


class PolyParametric(CurveSegment):
    """``x(t)``, ``y(t)`` given by coefficient lists in increasing powers of ``t``."""

    kind = "poly"

    def __init__(self, xcoef, ycoef, t_range=(0.0, 1.0)):
        super().__init__(*t_range)
        self.xcoef = np.asarray(xcoef, dtype=float)
        self.ycoef = np.asarray(ycoef, dtype=float)
        self._dx = npoly.polyder(self.xcoef)
        self._dy = npoly.polyder(self.ycoef)

    def _eval(self, t):
        t = np.asarray(t)
        return np.stack([npoly.polyval(t, self.xcoef), npoly.polyval(t, self.ycoef)], axis=-1)

    def _tangent(self, t):
        t = np.asarray(t)
        return np.stack([npoly.polyval(t, self._dx), npoly.polyval(t, self._dy)], axis=-1)

    def to_dict(self):
        return {"kind": "poly", "x": self.xcoef.tolist(), "y": self.ycoef.tolist(),
                "t_range": [self.t0, self.t1]}


class Reparametrized(CurveSegment):
    """The same point set as ``base`` traversed with ``t = t0 + (t1 - t0) s**power``.

    The new parameter ``s`` runs over ``[0, 1]``.  For ``power > 1`` the
    speed vanishes at ``s = 0``; quadrature nodes never sit there.
    """

    kind = "reparam"

    def __init__(self, base, power=3):
        super().__init__(0.0, 1.0)
        self.base = base
        self.power = int(power)

    def _map(self, s):
        return self.base.t0 + (self.base.t1 - self.base.t0) * s**self.power

    def _eval(self, s):
        return self.base._eval(self._map(np.asarray(s)))

    def _tangent(self, s):
        s = np.asarray(s)
        dt = (self.base.t1 - self.base.t0) * self.power * s ** (self.power - 1)
        return self.base._tangent(self._map(s)) * dt[..., None]

    def is_straight(self):
        return self.base.is_straight()

    def to_dict(self):
        return {"kind": "reparam", "base": self.base.to_dict(), "power": self.power}


def curve_from_dict(d):
    kind = d["kind"]
    if kind == "line":
        return Line(d["p0"], d["p1"])
    if kind == "arc":
        return CircularArc(d["center"], d["radius"], d["theta0"], d["theta1"])
    if kind == "bezier":
        return BezierCubic(d["control"])
    if kind == "poly":
        return PolyParametric(d["x"], d["y"], tuple(d.get("t_range", (0.0, 1.0))))
    if kind == "reparam":
        return Reparametrized(curve_from_dict(d["base"]), d.get("power", 3))
    raise DomainError(f"unknown curve kind {kind!r}")


def curve_eval(c, t):
    return c.eval(t)


def curve_tangent(c, t):
    return c.tangent(t)
