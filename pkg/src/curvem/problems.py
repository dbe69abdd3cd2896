"""Manufactured problems with closed-form solutions.

Every callable takes points of shape ``(m, 2)`` followed by the region id
of the element that evaluates it; Robin data also takes the outward unit
normals before the region.  The data satisfy ``-div(kappa grad u) = f``,
``u = g_D`` and ``kappa du/dn + rho u = g_R`` on the tagged boundary parts.
"""

from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .assembly import Problem
from .errors import ConfigError
from .geometry.mesh import ROBIN
from .meshgen import disk_boundary, l_shape, square_circle_interface


class Poly:
    """A polynomial ``sum c x^a y^b`` stored as ``{(a, b): c}``."""

    def __init__(self, terms):
        self.terms = {tuple(k): float(v) for k, v in terms.items()}

    @property
    def degree(self):
        return max(a + b for a, b in self.terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x[..., 0] ** a * x[..., 1] ** b for (a, b), c in self.terms.items())

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        gx = sum(c * a * x[..., 0] ** max(a - 1, 0) * x[..., 1] ** b
                 for (a, b), c in self.terms.items() if a)
        gy = sum(c * b * x[..., 0] ** a * x[..., 1] ** max(b - 1, 0)
                 for (a, b), c in self.terms.items() if b)
        zero = np.zeros(x.shape[:-1])
        return np.stack([zero + gx, zero + gy], axis=-1)

    def laplacian(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for (a, b), c in self.terms.items():
            if a >= 2:
                out = out + c * a * (a - 1) * x[..., 0] ** (a - 2) * x[..., 1] ** b
            if b >= 2:
                out = out + c * b * (b - 1) * x[..., 0] ** a * x[..., 1] ** (b - 2)
        return out


PATCH_POLYS = {
    1: Poly({(0, 0): 1.0, (1, 0): 1.0, (0, 1): 2.0}),
    2: Poly({(0, 0): 1.0, (1, 0): 1.0, (0, 1): 2.0, (2, 0): 1.0, (1, 1): -1.0, (0, 2): 0.5}),
    3: Poly({(0, 0): 1.0, (1, 0): 1.0, (0, 1): 2.0, (2, 0): 1.0, (1, 1): -1.0, (0, 2): 0.5,
             (3, 0): 1.0, (1, 2): -3.0, (2, 1): 0.5, (0, 3): 0.25}),
}


@dataclass
class BuiltinProblem:
    """Closed-form data together with the mesh family it is posed on."""

    name: str
    kappa: dict
    u: object
    grad: object
    f: object
    mesh_family: object
    rho: object = None
    g_R: object = None
    levels: tuple = (4, 8, 16, 32)
    params: dict = field(default_factory=dict)

    def g_D(self, x, region):
        if self.u is None:
            return np.zeros(np.shape(x)[:-1])
        return self.u(x, region)

    def mesh(self, n):
        return self.mesh_family(n)

    def as_problem(self):
        kappa = dict(self.kappa) if self.kappa else None
        return Problem(f=self.f, g_D=self.g_D, g_R=self.g_R, rho=self.rho, kappa=kappa)


def _robin_data(u, grad, kappa, rho):
    def g_R(x, n, region):
        flux = np.einsum("...d,...d->...", grad(x, region), n)
        return kappa[region] * flux + rho(x, region) * u(x, region)
    return g_R


def _const(value):
    return lambda x, region: np.full(np.shape(x)[:-1], float(value))


def patch(k, rho=1.0, r=0.3, n=4):
    """Polynomial of degree ``k`` on the circle-interface mesh, Robin on the right and top sides."""
    if k not in PATCH_POLYS:
        raise ConfigError("patch problems exist for k = 1, 2, 3")
    p = PATCH_POLYS[k]
    kappa = {0: 1.0, 1: 1.0}
    u = lambda x, region: p(x)
    grad = lambda x, region: p.grad(x)
    f = lambda x, region: -kappa[region] * p.laplacian(x)
    rho_fn = _const(rho)
    sides = {"right": ROBIN, "top": ROBIN}
    fam = partial(_interface_mesh, r=r, kappa=(1.0, 1.0), sides=sides)
    return BuiltinProblem(f"patch-k{k}", kappa, u, grad, f, fam, rho_fn,
                          _robin_data(u, grad, kappa, rho_fn), levels=(n,),
                          params={"k": k, "rho": rho, "r": r})


def _interface_mesh(n, r, kappa, sides=None):
    return square_circle_interface(n, r, kappa=(kappa[0], kappa[1]), sides=sides)


def interface_jump(kappa_in=1.0, kappa_out=100.0, r=0.3):
    """Radial solution with a coefficient jump across a circle.

    ``u = s`` inside and ``u = s + c log(s) + d`` outside, ``s = |x - x0|^2``,
    with ``c`` and ``d`` chosen for continuity of ``u`` and of ``kappa du/dn``.
    """
    x0 = np.array([0.5, 0.5])
    c = r**2 * (kappa_in - kappa_out) / kappa_out
    d = -c * np.log(r**2)
    kappa = {0: kappa_out, 1: kappa_in}

    def u(x, region):
        s = np.sum((np.asarray(x) - x0) ** 2, axis=-1)
        return s if region == 1 else s + c * np.log(s) + d

    def grad(x, region):
        y = np.asarray(x) - x0
        s = np.sum(y**2, axis=-1)[..., None]
        return 2 * y if region == 1 else 2 * y * (1 + c / s)

    def f(x, region):
        return np.full(np.shape(x)[:-1], -4.0 * kappa[region])

    fam = partial(_interface_mesh, r=r, kappa=(kappa_out, kappa_in))
    return BuiltinProblem("interface-jump", kappa, u, grad, f, fam,
                          params={"kappa_in": kappa_in, "kappa_out": kappa_out, "r": r})


def smooth(r=0.3):
    """``u = sin(2x + 0.5) cos(3y - 0.2)`` with unit coefficient on the circle-interface meshes."""
    kappa = {0: 1.0, 1: 1.0}

    def u(x, region):
        x = np.asarray(x)
        return np.sin(2 * x[..., 0] + 0.5) * np.cos(3 * x[..., 1] - 0.2)

    def grad(x, region):
        x = np.asarray(x)
        a, b = 2 * x[..., 0] + 0.5, 3 * x[..., 1] - 0.2
        return np.stack([2 * np.cos(a) * np.cos(b), -3 * np.sin(a) * np.sin(b)], axis=-1)

    def f(x, region):
        return 13.0 * u(x, region)

    fam = partial(_interface_mesh, r=r, kappa=(1.0, 1.0))
    return BuiltinProblem("smooth", kappa, u, grad, f, fam, params={"r": r})


def _disk_solution():
    def u(x, region):
        x = np.asarray(x)
        return np.sin(x[..., 0] + 0.3) * np.exp(0.5 * x[..., 1]) + x[..., 0] ** 2 * x[..., 1]

    def grad(x, region):
        x = np.asarray(x)
        s, c = np.sin(x[..., 0] + 0.3), np.cos(x[..., 0] + 0.3)
        e = np.exp(0.5 * x[..., 1])
        return np.stack([c * e + 2 * x[..., 0] * x[..., 1], 0.5 * s * e + x[..., 0] ** 2], axis=-1)

    def f(x, region):
        x = np.asarray(x)
        return 0.75 * np.sin(x[..., 0] + 0.3) * np.exp(0.5 * x[..., 1]) - 2 * x[..., 1]

    return u, grad, f


def dirichlet_disk():
    """Unit disk, exact Dirichlet trace on the curved boundary."""
    u, grad, f = _disk_solution()
    fam = partial(disk_boundary, boundary="dirichlet")
    return BuiltinProblem("dirichlet-disk", {0: 1.0}, u, grad, f, fam)


def robin_disk(rho=1.0):
    """Unit disk with Robin data on the whole curved boundary.

    ``rho = 0`` is the Neumann limit; the upper half of the boundary is
    then Dirichlet so that the problem stays well posed.
    """
    u, grad, f = _disk_solution()
    kappa = {0: 1.0}
    rho_fn = _const(rho)
    fam = partial(disk_boundary, boundary="robin" if rho > 0 else "mixed")
    return BuiltinProblem("robin-disk" if rho > 0 else "neumann-disk", kappa, u, grad, f, fam,
                          rho_fn, _robin_data(u, grad, kappa, rho_fn), params={"rho": rho})


def unit_load():
    """``f = 1`` with homogeneous Dirichlet data on the L-shaped domain; no closed form."""
    return BuiltinProblem("unit-load", None, None, None, _const(1.0), l_shape)


BUILTINS = {
    "unit-load": unit_load,
    "interface-jump": interface_jump,
    "smooth": smooth,
    "dirichlet-disk": dirichlet_disk,
    "robin-disk": robin_disk,
    "neumann-disk": partial(robin_disk, rho=0.0),
}


def builtin(name, **params):
    if name.startswith("patch"):
        return patch(**params)
    try:
        return BUILTINS[name](**params)
    except KeyError:
        raise ConfigError(f"unknown problem {name!r}; choose from {sorted(BUILTINS) + ['patch']}")
