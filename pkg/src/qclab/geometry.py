"""Model domains, their conformal maps and hyperbolic geometry.

Every bounded or half-plane-like domain gets a *model map* ``phi`` onto the
upper half-plane H.  The hyperbolic density (curvature -4) is then

    lambda_D(z) = |phi'(z)| / (2 Im phi(z)),

and the half-strip map used by the degeneration machinery is the composite

    Pi_+ --cosh(pi*zeta)--> H --real Moebius--> H --phi^{-1}--> D.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from . import _elliptic as ell
from .errors import (DomainError, InvalidAxesError, InvalidMarkerError,
                     ParameterProblemError, UnsupportedDomainError)
from .quadrature import gauss_jacobi, gauss_legendre, segment_integral_endpoint_singular

KINDS = ("unit-disk", "exterior-disk", "upper-half-plane", "half-strip",
         "ellipse", "rectangle", "polygon-exterior")

# beyond this abscissa the half-strip map has saturated to double precision
XI_SATURATION = 12.0


@dataclass(frozen=True, eq=False)
class DomainSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedDomainError(f"unknown domain kind {self.kind!r}")
        p = self.params
        if self.kind == "ellipse":
            a, b = float(p["a"]), float(p["b"])
            if not a > b > 0:
                raise InvalidAxesError(f"ellipse needs a > b > 0, got a={a}, b={b}")
        elif self.kind == "rectangle":
            if not (float(p["a"]) > 0 and float(p["b"]) > 0):
                raise InvalidAxesError("rectangle needs positive side lengths")
        elif self.kind == "polygon-exterior":
            angles = np.asarray(p["angles"], dtype=float)
            if np.any(angles <= 1) or np.any(angles >= 2):
                raise InvalidAxesError("polygon angles must satisfy 1 < alpha_j < 2")
            if len(p["prevertices"]) != len(angles):
                raise InvalidAxesError("one prevertex per finite vertex")

    def __eq__(self, other):
        return (isinstance(other, DomainSpec) and self.kind == other.kind
                and self.params == other.params)

    # -- serialization ------------------------------------------------------
    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        params = dict(d.get("params", {}))
        if kind == "ellipse":
            return ellipse(params["a"], params["b"])
        return cls(kind, params)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    # -- geometry -------------------------------------------------------------
    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        k = self.kind
        if k == "unit-disk":
            return np.abs(z) < 1
        if k == "exterior-disk":
            return np.abs(z) > 1
        if k == "upper-half-plane":
            return y > 0
        if k == "half-strip":
            return (x > 0) & (y > 0) & (y < 1)
        if k == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return (x / a) ** 2 + (y / b) ** 2 < 1
        if k == "rectangle":
            a, b = self.params["a"], self.params["b"]
            return (x > 0) & (x < a) & (y > 0) & (y < b)
        raise UnsupportedDomainError(f"membership test not available for {k}")

    def contains_closure(self, z, tol=1e-12):
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        k = self.kind
        if k == "unit-disk":
            return np.abs(z) <= 1 + tol
        if k == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return (x / a) ** 2 + (y / b) ** 2 <= 1 + tol
        if k == "rectangle":
            a, b = self.params["a"], self.params["b"]
            return (x >= -tol) & (x <= a + tol) & (y >= -tol) & (y <= b + tol)
        if k == "upper-half-plane":
            return y >= -tol
        if k == "exterior-disk":
            return np.abs(z) >= 1 - tol
        if k == "half-strip":
            return (x >= -tol) & (y >= -tol) & (y <= 1 + tol)
        raise UnsupportedDomainError(f"membership test not available for {k}")

    def bounding_radius(self):
        k = self.kind
        if k == "unit-disk":
            return 1.0
        if k == "ellipse":
            return float(self.params["a"])
        if k == "rectangle":
            return float(abs(complex(self.params["a"], self.params["b"])))
        return math.inf


def unit_disk():
    return DomainSpec("unit-disk")


def exterior_disk():
    return DomainSpec("exterior-disk")


def upper_half_plane():
    return DomainSpec("upper-half-plane")


def half_strip():
    return DomainSpec("half-strip")


def rectangle(a, b):
    return DomainSpec("rectangle", {"a": float(a), "b": float(b)})


def polygon_exterior(angles, prevertices):
    return DomainSpec("polygon-exterior", {"angles": [float(t) for t in angles],
                                           "prevertices": [float(t) for t in prevertices]})


def ellipse(a, b):
    """Ellipse with semi-axes a > b; rescaled (with a warning) so the foci are +-1."""
    a, b = float(a), float(b)
    if not a > b > 0:
        raise InvalidAxesError(f"ellipse needs a > b > 0, got a={a}, b={b}")
    c2 = a * a - b * b
    if abs(c2 - 1.0) > 1e-12:
        s = 1.0 / math.sqrt(c2)
        warnings.warn(f"ellipse rescaled by {s:.6g} to put the foci at +-1", stacklevel=2)
        a, b = a * s, b * s
    return DomainSpec("ellipse", {"a": a, "b": b})


# ---------------------------------------------------------------------------
# model maps onto the upper half-plane
# ---------------------------------------------------------------------------

def _cayley_inv(z):
    """disk -> H"""
    return 1j * (1 + z) / (1 - z)


def _cayley_inv_d(z):
    return 2j / (1 - z) ** 2


def _cayley(w):
    """H -> disk"""
    return (w - 1j) / (w + 1j)


def _cayley_d(w):
    return 2j / (w + 1j) ** 2


class _Model:
    """phi: D -> H with inverse; all methods vectorized over numpy arrays."""

    def to_uhp(self, z):
        raise NotImplementedError

    def to_uhp_d(self, z):
        raise NotImplementedError

    def from_uhp(self, w):
        raise NotImplementedError

    def from_uhp_d(self, w):
        raise NotImplementedError


class _DiskModel(_Model):
    to_uhp = staticmethod(_cayley_inv)
    to_uhp_d = staticmethod(_cayley_inv_d)
    from_uhp = staticmethod(_cayley)
    from_uhp_d = staticmethod(_cayley_d)


class _ExteriorDiskModel(_Model):
    def to_uhp(self, z):
        return _cayley_inv(1 / z)

    def to_uhp_d(self, z):
        return -_cayley_inv_d(1 / z) / z ** 2

    def from_uhp(self, w):
        return 1 / _cayley(w)

    def from_uhp_d(self, w):
        c = _cayley(w)
        return -_cayley_d(w) / c ** 2


class _UHPModel(_Model):
    def to_uhp(self, z):
        return np.asarray(z, dtype=complex)

    def to_uhp_d(self, z):
        return np.ones_like(np.asarray(z, dtype=complex))

    def from_uhp(self, w):
        return np.asarray(w, dtype=complex)

    def from_uhp_d(self, w):
        return np.ones_like(np.asarray(w, dtype=complex))


class _HalfStripModel(_Model):
    def to_uhp(self, z):
        return np.cosh(np.pi * np.asarray(z, dtype=complex))

    def to_uhp_d(self, z):
        return np.pi * np.sinh(np.pi * np.asarray(z, dtype=complex))

    def from_uhp(self, w):
        return np.arccosh(np.asarray(w, dtype=complex)) / np.pi

    def from_uhp_d(self, w):
        w = np.asarray(w, dtype=complex)
        return 1 / (np.pi * np.sinh(np.arccosh(w)))


class _RectangleModel(_Model):
    """[0,a]x[0,b] -> H via sn on the period rectangle [-K,K]x[0,K']."""

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.m = ell.parameter_for_ratio(2.0 * b / a)
        self.K, self.Kp = ell.complete_pair(self.m)
        self.scale = 2.0 * self.K / a

    def to_uhp(self, z):
        u = (np.asarray(z, dtype=complex) - self.a / 2) * self.scale
        return ell.sncndn(u, self.m)[0]

    def to_uhp_d(self, z):
        u = (np.asarray(z, dtype=complex) - self.a / 2) * self.scale
        _, cn, dn = ell.sncndn(u, self.m)
        return cn * dn * self.scale

    def from_uhp(self, w):
        return self.a / 2 + ell.arcsn(w, self.m) / self.scale

    def from_uhp_d(self, w):
        return ell.arcsn_derivative(w, self.m) / self.scale


class _EllipseModel(_Model):
    """Ellipse (foci +-1) -> disk via sqrt(k) sn((2K/pi) arcsin z), then Cayley."""

    def __init__(self, a, b):
        self.a, self.b = a, b
        rho = math.log(a + b)
        self.m = ell.parameter_for_ratio(4.0 * rho / math.pi)
        self.k = math.sqrt(self.m)
        self.K, self.Kp = ell.complete_pair(self.m)

    def to_disk(self, z):
        u = (2 * self.K / np.pi) * np.arcsin(np.asarray(z, dtype=complex))
        return math.sqrt(self.k) * ell.sncndn(u, self.m)[0]

    def to_disk_d(self, z):
        z = np.asarray(z, dtype=complex)
        u = (2 * self.K / np.pi) * np.arcsin(z)
        _, cn, dn = ell.sncndn(u, self.m)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = math.sqrt(self.k) * cn * dn * (2 * self.K / np.pi) / np.sqrt(1 - z * z)
        # arcsin is singular at the foci although the composite is not
        near = np.abs(1 - z * z) < 1e-3
        if np.any(near):
            h = 1e-5
            zn = z[near]
            d = np.array(d, copy=True)
            d[near] = (self.to_disk(zn + h) - self.to_disk(zn - h)) / (2 * h)
        return d

    def from_disk(self, w):
        s = np.asarray(w, dtype=complex) / math.sqrt(self.k)
        u = ell.arcsn(s, self.m)
        return np.sin(np.pi * u / (2 * self.K))

    def from_disk_d(self, w):
        s = np.asarray(w, dtype=complex) / math.sqrt(self.k)
        u = ell.arcsn(s, self.m)
        return (np.cos(np.pi * u / (2 * self.K)) * (np.pi / (2 * self.K))
                * ell.arcsn_derivative(s, self.m) / math.sqrt(self.k))

    def to_uhp(self, z):
        return _cayley_inv(self.to_disk(z))

    def to_uhp_d(self, z):
        return _cayley_inv_d(self.to_disk(z)) * self.to_disk_d(z)

    def from_uhp(self, w):
        return self.from_disk(_cayley(w))

    def from_uhp_d(self, w):
        return self.from_disk_d(_cayley(w)) * _cayley_d(w)


def model_map(domain: DomainSpec) -> _Model:
    k = domain.kind
    if k == "unit-disk":
        return _DiskModel()
    if k == "exterior-disk":
        return _ExteriorDiskModel()
    if k == "upper-half-plane":
        return _UHPModel()
    if k == "half-strip":
        return _HalfStripModel()
    if k == "rectangle":
        return _RectangleModel(domain.params["a"], domain.params["b"])
    if k == "ellipse":
        return _EllipseModel(domain.params["a"], domain.params["b"])
    raise UnsupportedDomainError(f"no conformal model map for {k}")


def _require_interior(domain, z):
    inside = domain.contains(z)
    if not np.all(inside):
        bad = np.asarray(z)[~np.asarray(inside)]
        raise DomainError(f"{bad.ravel()[:3]} not interior to {domain.kind}")


# ---------------------------------------------------------------------------
# hyperbolic density and boundary distance
# ---------------------------------------------------------------------------

def hyperbolic_density(domain: DomainSpec, z):
    """Density of the curvature -4 hyperbolic metric, |g'|/(1-|g|^2) for g: D -> disk."""
    z = np.asarray(z, dtype=complex)
    model = model_map(domain)
    _require_interior(domain, z)
    if domain.kind == "unit-disk":
        return 1.0 / (1.0 - np.abs(z) ** 2)
    if domain.kind == "upper-half-plane":
        return 1.0 / (2.0 * z.imag)
    w = model.to_uhp(z)
    return np.abs(model.to_uhp_d(z)) / (2.0 * w.imag)


def boundary_distance(domain: DomainSpec, z):
    z = np.asarray(z, dtype=complex)
    _require_interior(domain, z)
    x, y = z.real, z.imag
    k = domain.kind
    if k == "unit-disk":
        return 1.0 - np.abs(z)
    if k == "exterior-disk":
        return np.abs(z) - 1.0
    if k == "upper-half-plane":
        return y
    if k == "half-strip":
        return np.minimum(np.minimum(x, y), 1 - y)
    if k == "rectangle":
        a, b = domain.params["a"], domain.params["b"]
        return np.minimum(np.minimum(x, a - x), np.minimum(y, b - y))
    if k == "ellipse":
        a, b = domain.params["a"], domain.params["b"]
        flat = z.ravel()
        out = np.empty(flat.shape)
        ts = np.linspace(0, 2 * np.pi, 721)
        for i, p in enumerate(flat):
            dist2 = lambda t: (a * np.cos(t) - p.real) ** 2 + (b * np.sin(t) - p.imag) ** 2
            t0 = ts[np.argmin(dist2(ts))]
            res = minimize_scalar(dist2, bounds=(t0 - 0.01, t0 + 0.01), method="bounded",
                                  options={"xatol": 1e-12})
            out[i] = math.sqrt(min(res.fun, dist2(t0)))
        return out.reshape(z.shape)
    raise UnsupportedDomainError(f"boundary distance not available for {k}")


def sample_interior(domain: DomainSpec, n=400, seed=0):
    """Deterministic interior samples, half of them crowding the boundary."""
    rng = np.random.default_rng(seed)
    n1 = n // 2
    n2 = n - n1
    k = domain.kind
    if k == "unit-disk":
        r = np.concatenate([np.sqrt(rng.random(n1)), 1 - 10 ** (-rng.uniform(1, 6, n2))])
        t = rng.uniform(0, 2 * np.pi, n)
        z = r * np.exp(1j * t)
    elif k == "exterior-disk":
        r = 1 + 10 ** rng.uniform(-6, 2, n)
        z = r * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    elif k == "upper-half-plane":
        z = rng.uniform(-10, 10, n) + 1j * 10 ** rng.uniform(-5, 2, n)
    elif k == "half-strip":
        eta = np.concatenate([rng.random(n1), np.where(rng.random(n2) < 0.5,
                                                       10 ** (-rng.uniform(1, 6, n2)),
                                                       1 - 10 ** (-rng.uniform(1, 6, n2)))])
        z = rng.uniform(1e-6, 4, n) + 1j * eta
    elif k == "rectangle":
        a, b = domain.params["a"], domain.params["b"]
        x = rng.random(n) * a
        y = rng.random(n) * b
        # push half of them towards a random side
        side = rng.integers(0, 4, n2)
        eps = 10 ** (-rng.uniform(1, 6, n2))
        xs, ys = x[n1:], y[n1:]
        xs = np.where(side == 0, eps * a, np.where(side == 1, a * (1 - eps), xs))
        ys = np.where(side == 2, eps * b, np.where(side == 3, b * (1 - eps), ys))
        x[n1:], y[n1:] = xs, ys
        z = x + 1j * y
    elif k == "ellipse":
        a, b = domain.params["a"], domain.params["b"]
        r = np.concatenate([np.sqrt(rng.random(n1)), 1 - 10 ** (-rng.uniform(1, 6, n2))])
        t = rng.uniform(0, 2 * np.pi, n)
        z = r * (a * np.cos(t) + 1j * b * np.sin(t))
    else:
        raise UnsupportedDomainError(f"cannot sample {k}")
    return z[domain.contains(z)]


# ---------------------------------------------------------------------------
# conformal maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConformalMap:
    forward: Callable
    inverse: Callable
    derivative: Callable
    source: DomainSpec
    target: DomainSpec
    markers: tuple = ()
    inverse_derivative: Optional[Callable] = None
    # conj(chi')/chi', when it can be evaluated more stably than via derivative
    phase: Optional[Callable] = None
    info: dict = field(default_factory=dict)

    def __call__(self, z):
        return self.forward(z)

    def unimodular(self, z):
        if self.phase is not None:
            return self.phase(z)
        d = self.derivative(z)
        return np.exp(-2j * np.angle(d))


def _std_from_zero_one_inf(p, q, r):
    """Matrix of the Moebius map sending 0, 1, inf to p, q, r (any may be inf)."""
    if np.isinf(r):
        return np.array([[q - p, p], [0.0, 1.0]])
    if np.isinf(p):
        return np.array([[r, q - r], [1.0, 0.0]])
    if np.isinf(q):
        return np.array([[r, -p], [1.0, -1.0]])
    return np.array([[r * (q - p), p * (r - q)], [q - p, r - q]])


def _boundary_to_real(model, z):
    with np.errstate(all="ignore"):
        w = complex(model.to_uhp(np.array([z], dtype=complex))[0])
    if not np.isfinite(w) or abs(w) > 1e15:
        return math.inf
    if abs(w.imag) > 1e-6 * max(1.0, abs(w)):
        raise InvalidMarkerError(f"marker {z} does not lie on the domain boundary")
    return w.real


def halfstrip_map(domain: DomainSpec, substantial_point, arc) -> ConformalMap:
    """chi: Pi_+ -> domain with chi(+inf) = substantial_point and the corners 0, i
    of the half-strip sent to the endpoints of ``arc``.

    Which endpoint receives which corner is fixed by orientation; the choice is
    recorded in ``markers``.
    """
    z0 = complex(substantial_point)
    e1, e2 = complex(arc[0]), complex(arc[1])
    pts = [z0, e1, e2]
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(pts[i] - pts[j]) < 1e-12:
                raise InvalidMarkerError("substantial point and arc endpoints must be distinct")
    if domain.kind != "upper-half-plane" and np.any(domain.contains(np.array(pts))):
        raise InvalidMarkerError("markers must lie on the boundary")
    model = model_map(domain)
    wz, w1, w2 = (_boundary_to_real(model, p) for p in pts)

    src_inv = np.array([[1.0, 1.0], [0.0, 2.0]]) / 2.0  # (-1, 1, inf) -> (0, 1, inf)
    corner_i, corner_0 = e1, e2
    M = _std_from_zero_one_inf(w1, w2, wz) @ src_inv
    if np.linalg.det(M) < 0:
        corner_i, corner_0 = e2, e1
        M = _std_from_zero_one_inf(w2, w1, wz) @ src_inv
    M = M / math.sqrt(np.linalg.det(M))
    (al, be), (ga, de) = M

    def _u_and_tanh(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        e = np.exp(-np.pi * zeta)
        e2_ = e * e
        u = 2 * e / (1 + e2_)
        th = (1 - e2_) / (1 + e2_)
        return u, th

    def forward(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        zc = np.minimum(zeta.real, XI_SATURATION) + 1j * zeta.imag
        u, _ = _u_and_tanh(zc)
        W = (al + be * u) / (ga + de * u)
        return model.from_uhp(W)

    def _deriv(zeta):
        u, th = _u_and_tanh(zeta)
        W = (al + be * u) / (ga + de * u)
        return model.from_uhp_d(W) * np.pi * th * u / (ga + de * u) ** 2

    def derivative(zeta):
        return _deriv(np.asarray(zeta, dtype=complex))

    def phase(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        zc = np.minimum(zeta.real, XI_SATURATION) + 1j * zeta.imag
        d = _deriv(zc)
        if np.any(d == 0):
            from .errors import MapDegeneracyError
            raise MapDegeneracyError("chi' vanishes at an evaluation point")
        return np.exp(-2j * np.angle(d))

    Minv = np.array([[de, -be], [-ga, al]])

    def inverse(z):
        z = np.asarray(z, dtype=complex)
        W = model.to_uhp(z)
        w = (Minv[0, 0] * W + Minv[0, 1]) / (Minv[1, 0] * W + Minv[1, 1])
        zeta = np.arccosh(w) / np.pi
        # arccosh branch: keep Re >= 0, Im in [0, 1]
        zeta = np.where(zeta.real < 0, -zeta, zeta)
        return zeta

    return ConformalMap(forward=forward, inverse=inverse, derivative=derivative,
                        source=half_strip(), target=domain,
                        markers=(("inf", z0), (0j, corner_0), (1j, corner_i)),
                        phase=phase,
                        info={"moebius": M.tolist()})


# -- Schwarz-Christoffel: disk -> rectangle ---------------------------------

def _sc_integrand(prevertices):
    pv = np.asarray(prevertices, dtype=complex)

    def f(t):
        t = np.asarray(t, dtype=complex)
        out = np.ones_like(t)
        for p in pv:
            out = out * (1 - t / p) ** -0.5
        return out

    return f


def _sc_vertex_images(prevertices, n_nodes=64):
    f = _sc_integrand(prevertices)
    return np.array([segment_integral_endpoint_singular(f, 0.0, p, n_nodes=n_nodes)
                     for p in prevertices])


def _sc_integral(prevertices, z, n_nodes=24, n_split=10):
    """int_0^z along the radius, panels refined geometrically toward z."""
    f = _sc_integrand(prevertices)
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    x, w = gauss_legendre(n_nodes)
    edges = [0.0] + [1 - 0.5 ** k for k in range(1, n_split)] + [1.0]
    total = np.zeros(flat.shape, dtype=complex)
    for s0, s1 in zip(edges[:-1], edges[1:]):
        s = s0 + (s1 - s0) * (x + 1) / 2
        t = flat[:, None] * s[None, :]
        total += (f(t) * w[None, :]).sum(axis=1) * (s1 - s0) / 2 * flat
    return total.reshape(z.shape)


def _newton_inverse(fwd, dfwd, w, z0, inside=None, max_iter=60, tol=1e-13):
    z = np.array(z0, dtype=complex, copy=True)
    w = np.asarray(w, dtype=complex)
    for _ in range(max_iter):
        r = fwd(z) - w
        step = r / dfwd(z)
        z = z - step
        if inside is not None:
            z = inside(z)
        if np.all(np.abs(step) < tol * np.maximum(1.0, np.abs(z))):
            break
    return z


def _polygon_angles(v):
    """Interior angles of a polygon with vertices v (counterclockwise)."""
    n = len(v)
    ang = np.empty(n)
    for j in range(n):
        a = v[j - 1] - v[j]
        b = v[(j + 1) % n] - v[j]
        ang[j] = abs(np.angle(a / b))
    return ang


def _signed_area(v):
    v = np.asarray(v)
    return 0.5 * np.sum((np.conj(v) * np.roll(v, -1)).imag)


def sc_rectangle_map(aspect, width=1.0, n_nodes=64) -> ConformalMap:
    """Disk -> rectangle [0,width]x[0,aspect*width] with prevertices 1, i, -1, alpha."""
    aspect = float(aspect)
    if not aspect > 0:
        raise ParameterProblemError("aspect must be positive")

    def side_ratio(theta):
        pv = [1.0, 1j, -1.0, np.exp(1j * theta)]
        v = _sc_vertex_images(pv, n_nodes)
        return abs(v[2] - v[1]) / abs(v[1] - v[0])

    target = math.log(aspect)
    g = lambda th: math.log(side_ratio(th)) - target
    lo, hi = math.pi + 1e-6, 2 * math.pi - 1e-6
    glo, ghi = g(lo), g(hi)
    if not (glo > 0 > ghi):
        raise ParameterProblemError("side-ratio equation not bracketed",
                                    bracket=((lo, glo), (hi, ghi)))
    theta = bisect(g, lo, hi, xtol=1e-15, maxiter=200)
    res = g(theta)
    if abs(res) > 1e-10:
        raise ParameterProblemError("bisection stalled", bracket=(lo, hi), residual=res)
    alpha = np.exp(1j * theta)
    pv = np.array([1.0, 1j, -1.0, alpha])
    raw_v = _sc_vertex_images(pv, n_nodes)
    A = width / (raw_v[1] - raw_v[0])
    B = -A * raw_v[0]
    vertices = A * raw_v + B
    integrand = _sc_integrand(pv)
    height = aspect * width
    target_dom = rectangle(width, height)

    def forward(z):
        return A * _sc_integral(pv, z) + B

    def derivative(z):
        return A * integrand(np.asarray(z, dtype=complex))

    # coarse lookup table for Newton starting points
    rr, tt = np.meshgrid(np.linspace(0, 0.995, 60), np.linspace(0, 2 * np.pi, 121, endpoint=False))
    table_z = (rr * np.exp(1j * tt)).ravel()
    table_w = forward(table_z)

    def clamp(z):
        r = np.abs(z)
        return np.where(r >= 1, z / r * (1 - 1e-12), z)

    def inverse(w):
        w = np.asarray(w, dtype=complex)
        flat = w.ravel()
        idx = np.argmin(np.abs(flat[:, None] - table_w[None, :]), axis=1)
        z = _newton_inverse(forward, derivative, flat, table_z[idx], inside=clamp)
        return z.reshape(w.shape)

    return ConformalMap(forward=forward, inverse=inverse, derivative=derivative,
                        source=unit_disk(), target=target_dom,
                        markers=tuple(zip(pv.tolist(), vertices.tolist())),
                        info={"alpha": alpha, "theta": theta, "vertices": vertices,
                              "corner_angles": _polygon_angles(vertices),
                              "signed_area": _signed_area(vertices)})


# -- ellipse ----------------------------------------------------------------

def ellipse_maps(a, b):
    """(interior map ellipse -> unit disk, exterior map ellipse-exterior -> exterior disk)."""
    dom = ellipse(a, b)
    a, b = dom.params["a"], dom.params["b"]
    R = a + b
    model = _EllipseModel(a, b)
    interior = ConformalMap(forward=model.to_disk, inverse=model.from_disk,
                            derivative=model.to_disk_d, source=dom, target=unit_disk(),
                            inverse_derivative=model.from_disk_d,
                            markers=((0j, 0j),), info={"m": model.m})

    def sq(z):
        z = np.asarray(z, dtype=complex)
        return z * np.sqrt(1 - 1 / (z * z))

    def fwd(z):
        z = np.asarray(z, dtype=complex)
        return (z + sq(z)) / R

    def der(z):
        z = np.asarray(z, dtype=complex)
        return (1 + 1 / np.sqrt(1 - 1 / (z * z))) / R

    def inv(w):
        w = np.asarray(w, dtype=complex)
        return (R * w + 1 / (R * w)) / 2

    def inv_d(w):
        w = np.asarray(w, dtype=complex)
        return (R - 1 / (R * w * w)) / 2

    exterior = ConformalMap(forward=fwd, inverse=inv, derivative=der,
                            source=dom, target=exterior_disk(),
                            inverse_derivative=inv_d, markers=((complex(a), 1 + 0j),),
                            info={"R": R, "a": a, "b": b, "kind": "ellipse-exterior"})
    return interior, exterior


# -- exterior of an origin-centred rectangle -----------------------------------

def _gegenbauer_half(c, n):
    """Coefficients of (1 - 2 c x + x^2)^(1/2) = sum C_k x^k, k < n."""
    C = np.empty(n)
    lam = -0.5
    C[0] = 1.0
    if n > 1:
        C[1] = 2 * lam * c
    for k in range(2, n):
        C[k] = (2 * (k + lam - 1) * c * C[k - 1] - (k + 2 * lam - 2) * C[k - 2]) / k
    return C


def _ext_side_lengths(theta, n_nodes=64):
    x, w = gauss_jacobi(n_nodes, 0.5, 0.5)
    c2 = math.cos(2 * theta)
    # right side: phi = theta x
    g = np.sqrt(np.maximum(2 * (np.cos(2 * theta * x) - c2), 0) / (1 - x * x))
    right = theta * np.sum(w * g)
    half = math.pi / 2 - theta
    phi = math.pi / 2 + half * x
    g2 = np.sqrt(np.maximum(2 * (c2 - np.cos(2 * phi)), 0) / (1 - x * x))
    top = half * np.sum(w * g2)
    return right, top


def exterior_rectangle_map(a, b, center=0j, n_nodes=64) -> ConformalMap:
    """chi: exterior of the a x b rectangle centred at ``center`` -> exterior disk,
    chi(inf) = inf, chi'(inf) > 0.

    The inverse is the exterior Schwarz-Christoffel map with prevertices
    +-exp(+-i theta); its derivative s*sqrt(1 - 2cos(2 theta)/u^2 + 1/u^4) is
    expanded in Gegenbauer coefficients, which gives a Laurent series for
    the map itself.
    """
    a, b = float(a), float(b)
    if not (a > 0 and b > 0):
        raise InvalidAxesError("rectangle needs positive side lengths")
    target = math.log(b / a)

    def g(th):
        r, t = _ext_side_lengths(th, n_nodes)
        return math.log(r / t) - target

    lo, hi = 1e-6, math.pi / 2 - 1e-6
    glo, ghi = g(lo), g(hi)
    if not (glo < 0 < ghi):
        raise ParameterProblemError("side-ratio equation not bracketed",
                                    bracket=((lo, glo), (hi, ghi)))
    theta = bisect(g, lo, hi, xtol=1e-15, maxiter=200)
    res = g(theta)
    if abs(res) > 1e-10:
        raise ParameterProblemError("bisection stalled", bracket=(lo, hi), residual=res)
    right, _ = _ext_side_lengths(theta, n_nodes)
    s = b / right
    c2 = math.cos(2 * theta)
    center = complex(center)
    coef_cache = {}

    def coeffs(n):
        if n not in coef_cache:
            coef_cache[n] = _gegenbauer_half(c2, n)
        return coef_cache[n]

    def n_terms(u):
        rmin = float(np.min(np.abs(u))) if np.size(u) else 2.0
        if rmin <= 1.0 + 1e-9:
            return 20000
        return int(min(20000, max(16, math.ceil(40.0 / (2 * math.log(rmin))) + 4)))

    def Z(u):
        u = np.asarray(u, dtype=complex)
        n = n_terms(u)
        C = coeffs(n)
        x = 1 / (u * u)
        # sum_{k>=1} C_k / ((2k-1) u^(2k-1)) = (1/u) * sum C_k/(2k-1) x^(k-1)
        k = np.arange(1, n)
        tail = np.polynomial.polynomial.polyval(x, C[1:] / (2 * k - 1))
        return s * (u - tail / u) + center

    def dZ(u):
        u = np.asarray(u, dtype=complex)
        return s * np.sqrt(1 - 2 * c2 / (u * u) + 1 / u ** 4)

    def outside(u):
        r = np.abs(u)
        return np.where(r <= 1, u / r * (1 + 1e-9), u)

    def chi(z):
        z = np.asarray(z, dtype=complex)
        u0 = (z - center) / s
        u0 = np.where(np.abs(u0) < 1.05, 1.05 * u0 / np.maximum(np.abs(u0), 1e-300), u0)
        return _newton_inverse(Z, dZ, z, u0, inside=outside)

    def dchi(z):
        return 1 / dZ(chi(z))

    pv = np.array([np.exp(1j * theta), np.exp(1j * (math.pi - theta)),
                   np.exp(1j * (math.pi + theta)), np.exp(-1j * theta)])
    vertices = Z(pv)
    dom = rectangle(a, b)
    return ConformalMap(forward=chi, inverse=Z, derivative=dchi, source=dom,
                        target=exterior_disk(), inverse_derivative=dZ,
                        markers=tuple(zip(vertices.tolist(), pv.tolist())),
                        info={"theta": theta, "scale": s, "center": center,
                              "vertices": vertices,
                              "exterior_angles": 2 * np.pi - _polygon_angles(vertices)})
