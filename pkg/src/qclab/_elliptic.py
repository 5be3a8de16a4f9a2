"""Complex Jacobi elliptic functions built on scipy's real-argument routines."""

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipj, ellipk, ellipkm1, elliprf


def sncndn(u, m):
    """sn, cn, dn at complex ``u`` for real parameter 0 < m < 1."""
    u = np.asarray(u, dtype=complex)
    s, c, d, _ = ellipj(u.real, m)
    s1, c1, d1, _ = ellipj(u.imag, 1.0 - m)
    den = c1 ** 2 + m * s ** 2 * s1 ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        sn = (s * d1 + 1j * c * d * s1 * c1) / den
        cn = (c * c1 - 1j * s * d * s1 * d1) / den
        dn = (d * c1 * d1 - 1j * m * s * c * s1) / den
    return sn, cn, dn


def arcsn(w, m):
    """Principal inverse of sn: ``w * R_F(1 - w^2, 1 - m w^2, 1)``."""
    w = np.asarray(w, dtype=complex)
    # on the real cuts take the limit from the upper half-plane
    w = np.where(w.imag == 0, w.real + 1e-300j, w)
    w2 = w * w
    return w * elliprf(1.0 - w2, 1.0 - m * w2, np.ones_like(w2))


def arcsn_derivative(w, m):
    w = np.asarray(w, dtype=complex)
    w2 = w * w
    return 1.0 / (np.sqrt(1.0 - w2) * np.sqrt(1.0 - m * w2))


def complete_pair(m):
    """(K, K') for parameter m."""
    return ellipk(m), ellipkm1(m)


def parameter_for_ratio(ratio):
    """Parameter m with K'(m)/K(m) == ratio."""
    if ratio <= 0:
        raise ValueError("period ratio must be positive")

    def g(t):
        m = 1.0 / (1.0 + np.exp(-t))
        m1 = 1.0 / (1.0 + np.exp(t))
        return np.log(ellipkm1(m)) - np.log(ellipkm1(m1)) - np.log(ratio)

    t = brentq(g, -700.0, 36.0, xtol=1e-15, rtol=1e-15, maxiter=400)
    return 1.0 / (1.0 + np.exp(-t))
