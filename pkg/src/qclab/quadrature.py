"""Gauss rules on intervals and straight complex segments."""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=None)
def gauss_legendre(n):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def gauss_jacobi(n, alpha, beta):
    """Nodes/weights on [-1, 1] for the weight (1 - x)**alpha * (1 + x)**beta."""
    x, w = roots_jacobi(n, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def legendre_panels(a, b, n_panels, n_nodes):
    """Composite Gauss-Legendre rule on [a, b] with equal panels."""
    return legendre_on_edges(np.linspace(a, b, n_panels + 1), n_nodes)


def legendre_on_edges(edges, n_nodes):
    """Composite Gauss-Legendre rule with panel boundaries ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n_nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def segment_integral_endpoint_singular(func, z0, z1, n_nodes=64, exponent=-0.5,
                                       n_split=6):
    """Integrate ``func`` along the segment z0 -> z1 where ``func`` behaves like
    ``(z1 - t)**exponent`` at the far end.

    The segment is split geometrically towards z1; the last panel carries the
    Gauss-Jacobi weight and ``func`` is divided by the singular factor there.
    ``func`` must accept an array of complex points.
    """
    z0 = complex(z0)
    z1 = complex(z1)
    d = z1 - z0
    fr = [0.0] + [1.0 - 0.5 ** k for k in range(1, n_split + 1)]
    total = 0.0 + 0.0j
    x, w = gauss_legendre(n_nodes)
    for s0, s1 in zip(fr[:-1], fr[1:]):
        t = z0 + d * (s0 + (s1 - s0) * (x + 1) / 2)
        total += np.sum(w * func(t)) * d * (s1 - s0) / 2
    # last panel [s_last, 1]: t = z1 - d*(1-s)*..., weight (1-x)^exponent
    s0 = fr[-1]
    xj, wj = gauss_jacobi(n_nodes, exponent, 0.0)
    t = z0 + d * (s0 + (1 - s0) * (xj + 1) / 2)
    # (z1 - t) = d*(1 - s0)*(1 - xj)/2 ; strip ((1 - xj))**exponent from func
    scale = (d * (1 - s0) / 2)
    sing = (scale * (1 - xj)) ** exponent
    total += np.sum(wj * func(t) / sing * scale ** exponent) * scale
    return total
