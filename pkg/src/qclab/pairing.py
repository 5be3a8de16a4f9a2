"""Pairings of mu against integrable holomorphic quadratic differentials.

On the unit disk, squares psi = (sum x_n sqrt(n/pi) z^{n-1})^2 with |x| = 1 have
unit L1 norm and

    int int mu psi = x^T H x,   H_mn = sqrt(mn) c_{m+n-2},   c_j = (1/pi) int int mu z^j,

so the supremum over such squares is the largest singular value of H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import BasisError, DomainError
from .quadrature import gauss_legendre


@dataclass(frozen=True)
class MomentVector:
    c: np.ndarray

    def __len__(self):
        return self.c.size

    def to_list(self):
        return [[float(v.real), float(v.imag)] for v in self.c]


def _disk_nodes(n_r, n_theta):
    x, w = gauss_legendre(n_r)
    r = (x + 1) / 2
    wr = w / 2
    t = 2 * np.pi * np.arange(n_theta) / n_theta
    z = r[:, None] * np.exp(1j * t[None, :])
    # area element r dr dtheta
    wt = (wr * r)[:, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :]
    return z, wt


def moments(mu, max_degree, n_r=200, n_theta=512):
    """c_j = (1/pi) int int_D mu z^j, j = 0..max_degree, D the unit disk."""
    if mu.support.kind != "unit-disk":
        raise DomainError("disk moments need a coefficient supported on the unit disk")
    z, wt = _disk_nodes(n_r, n_theta)
    f = mu.evaluate(z) * wt / np.pi
    c = np.empty(max_degree + 1, dtype=complex)
    zp = np.ones_like(z)
    for j in range(max_degree + 1):
        c[j] = np.sum(f * zp)
        zp = zp * z
    return MomentVector(c)


def hankel_form(m: MomentVector, N=None):
    """H_mn = sqrt(mn) c_{m+n-2}, m, n = 1..N."""
    if N is None:
        N = (len(m) + 1) // 2
    if len(m) < 2 * N - 1:
        raise ValueError(f"need {2 * N - 1} moments for N = {N}")
    k = np.arange(1, N + 1)
    idx = k[:, None] + k[None, :] - 2
    return np.sqrt(np.outer(k, k)) * m.c[idx]


def sup_pairing(m: MomentVector, N=None):
    H = hankel_form(m, N)
    return float(np.linalg.norm(H, 2))


# ---------------------------------------------------------------------------
# ellipse with foci +-1: orthonormalized Chebyshev polynomials of the 2nd kind
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipseQuadrature:
    z: np.ndarray
    w: np.ndarray       # area weights
    a: float
    b: float


def ellipse_quadrature(a, b, n_s=200, n_t=512):
    """Nodes in confocal coordinates z = cosh(s + i t), 0 < s < log(a+b)."""
    rho = math.log(a + b)
    x, w = gauss_legendre(n_s)
    s = rho * (x + 1) / 2
    ws = w * rho / 2
    t = 2 * np.pi * np.arange(n_t) / n_t
    zeta = s[:, None] + 1j * t[None, :]
    z = np.cosh(zeta)
    jac = np.abs(np.sinh(zeta)) ** 2
    wt = ws[:, None] * jac * (2 * np.pi / n_t)
    return EllipseQuadrature(z, wt, a, b)


def chebyshev_u(n, z):
    """U_0..U_n at z by the three-term recurrence; shape (n+1,) + z.shape."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((n + 1,) + z.shape, dtype=complex)
    out[0] = 1
    if n >= 1:
        out[1] = 2 * z
    for k in range(2, n + 1):
        out[k] = 2 * z * out[k - 1] - out[k - 2]
    return out


def ellipse_basis(n_max, a, b, z):
    """P_n = 2 sqrt((n+1)/pi) (r^{n+1} - r^{-n-1})^{-1/2} U_n with r = (a+b)^2."""
    r = (a + b) ** 2
    n = np.arange(n_max + 1)
    norm = 2 * np.sqrt((n + 1) / np.pi) / np.sqrt(r ** (n + 1) - r ** (-(n + 1)))
    U = chebyshev_u(n_max, z)
    return norm.reshape((-1,) + (1,) * np.ndim(z)) * U


def ellipse_gram(n_max, a, b, quad=None):
    q = quad or ellipse_quadrature(a, b)
    P = ellipse_basis(n_max, a, b, q.z).reshape(n_max + 1, -1)
    W = q.w.ravel()
    return (P * W) @ P.conj().T


def _checked_basis(n_max, a, b, quad, tol=1e-6):
    G = ellipse_gram(n_max, a, b, quad)
    dev = np.max(np.abs(G - np.eye(n_max + 1)))
    if dev > tol:
        raise BasisError(f"Gram matrix deviates from identity by {dev:.3g}")
    return ellipse_basis(n_max, a, b, quad.z).reshape(n_max + 1, -1)


def pairing_ellipse(mu, n_max=9, quad=None):
    """sup |int int mu psi| over psi = sum c_n P_n with int int |psi| = 1.

    With d_n = int int mu P_n the supremum equals 1 / min{ ||psi_c||_1 : Re(d.c) = 1 },
    a convex problem solved by quasi-Newton iteration on the affine slice.
    """
    if mu.support.kind != "ellipse":
        raise DomainError("pairing_ellipse needs an ellipse-supported coefficient")
    a, b = mu.support.params["a"], mu.support.params["b"]
    q = quad or ellipse_quadrature(a, b)
    P = _checked_basis(n_max, a, b, q)
    W = q.w.ravel()
    muv = mu.evaluate(q.z).ravel()
    d = (P * (W * muv)) @ np.ones(P.shape[1])
    if np.max(np.abs(d)) < 1e-15:
        return 0.0
    n = n_max + 1
    # real coordinates v = (Re c, Im c); Re(d.c) = dr.v
    dr = np.concatenate([d.real, -d.imag])
    c0 = dr / (dr @ dr)
    # orthonormal basis of the complement of dr
    Q, _ = np.linalg.qr(np.column_stack([dr, np.eye(2 * n)]))
    null = Q[:, 1:2 * n]
    A = P.T  # samples x basis

    def l1(y):
        v = c0 + null @ y
        c = v[:n] + 1j * v[n:]
        psi = A @ c
        mag = np.abs(psi)
        val = np.sum(W * mag)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(mag > 0, psi / mag, 0)
        g = (W * np.conj(u)) @ A   # d|psi|/dc gradient pieces
        grad_v = np.concatenate([g.real, -g.imag])
        return val, null.T @ grad_v

    res = minimize(l1, np.zeros(2 * n - 1), jac=True, method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 2000})
    return float(1.0 / res.fun)


def pairing_ellipse_squares(mu, n_max=9, quad=None):
    """Largest singular value of H_mn = int int mu P_m P_n (squares of unit A2 elements)."""
    a, b = mu.support.params["a"], mu.support.params["b"]
    q = quad or ellipse_quadrature(a, b)
    P = _checked_basis(n_max, a, b, q)
    W = q.w.ravel()
    muv = mu.evaluate(q.z).ravel()
    H = (P * (W * muv)) @ P.T
    return float(np.linalg.norm(H, 2))
