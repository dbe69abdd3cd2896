"""Scaled monomial bases on elements and their Gram matrices."""

from functools import lru_cache

import numpy as np


def dim_pk(k, d=2):
    """Dimension of the polynomials of degree <= k in d variables (0 for k = -1)."""
    if k < -1:
        raise ValueError("k must be >= -1")
    if k < 0:
        return 0
    if d == 1:
        return k + 1
    if d == 2:
        return (k + 1) * (k + 2) // 2
    raise ValueError("only d = 1 and d = 2 are supported")


@lru_cache(maxsize=None)
def multi_indices(k):
    """Exponents ``(a, b)`` ordered by total degree, then decreasing ``a``."""
    out = [(d - j, j) for d in range(k + 1) for j in range(d + 1)]
    arr = np.array(out, dtype=int).reshape(-1, 2)
    arr.flags.writeable = False
    return arr


def index_of(alpha):
    a, b = alpha
    d = a + b
    return d * (d + 1) // 2 + b


class ScaledMonomialBasis:
    """Monomials ``m_alpha(x) = ((x - center) / h) ** alpha`` for ``|alpha| <= degree``."""

    def __init__(self, center, h, degree):
        self.center = np.asarray(center, dtype=float)
        self.h = float(h)
        self.degree = int(degree)
        self.alphas = multi_indices(self.degree)

    def __len__(self):
        return len(self.alphas)

    def _powers(self, x):
        x = np.asarray(x, dtype=float)
        xi = (x[..., 0] - self.center[0]) / self.h
        eta = (x[..., 1] - self.center[1]) / self.h
        p = np.arange(self.degree + 1)
        return xi[..., None] ** p, eta[..., None] ** p

    def eval(self, x):
        """Values, shape ``x.shape[:-1] + (n,)``."""
        px, py = self._powers(x)
        a, b = self.alphas[:, 0], self.alphas[:, 1]
        return px[..., a] * py[..., b]

    def grad(self, x):
        """Gradients, shape ``x.shape[:-1] + (n, 2)``."""
        px, py = self._powers(x)
        a, b = self.alphas[:, 0], self.alphas[:, 1]
        am = np.maximum(a - 1, 0)
        bm = np.maximum(b - 1, 0)
        gx = a * px[..., am] * py[..., b] / self.h
        gy = b * px[..., a] * py[..., bm] / self.h
        return np.stack([gx, gy], axis=-1)

    def laplacian_coeffs(self, i):
        """Coefficients of the Laplacian of basis function ``i`` in the degree-2 lower basis."""
        a, b = self.alphas[i]
        out = np.zeros(dim_pk(self.degree - 2))
        if a >= 2:
            out[index_of((a - 2, b))] += a * (a - 1) / self.h**2
        if b >= 2:
            out[index_of((a, b - 2))] += b * (b - 1) / self.h**2
        return out

    def laplacian_matrix(self):
        """Rows: basis functions; columns: degree ``k-2`` basis."""
        return np.array([self.laplacian_coeffs(i) for i in range(len(self))]).reshape(
            len(self), dim_pk(self.degree - 2))


def stiffness_gram(moments, basis):
    """``G[i, j] = \\int_P grad m_i . grad m_j`` from a moment table of degree >= 2k - 2."""
    al = basis.alphas
    a, b = al[:, 0], al[:, 1]
    A = a[:, None] * a[None, :]
    B = b[:, None] * b[None, :]
    sa = a[:, None] + a[None, :]
    sb = b[:, None] + b[None, :]
    with np.errstate(invalid="ignore"):
        gx = np.where(A > 0, A * moments[np.maximum(sa - 2, 0), sb], 0.0)
        gy = np.where(B > 0, B * moments[sa, np.maximum(sb - 2, 0)], 0.0)
    return (gx + gy) / basis.h**2


def mass_moments(moments, basis, s=None):
    """``M[i, j] = \\int_P m_i m_j`` for ``|alpha_i| <= degree`` and ``|alpha_j| <= s``."""
    s = basis.degree if s is None else s
    al = basis.alphas
    bl = multi_indices(s) if s >= 0 else np.zeros((0, 2), dtype=int)
    return moments[al[:, 0][:, None] + bl[:, 0][None, :], al[:, 1][:, None] + bl[:, 1][None, :]]
