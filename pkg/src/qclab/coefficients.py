"""Generators of Beltrami coefficients used as test subjects.

Every generator returns a :class:`~qclab.beltrami.BeltramiCoefficient` whose
``params`` rebuild it through :func:`build_coefficient`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, optimize

from . import geometry as geo
from .beltrami import BeltramiCoefficient, MapSolution
from .errors import (InadmissibleError, ResolutionError, SchemaError,
                     UnivalenceError)


def as_complex(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def complex_to_json(c):
    c = complex(c)
    return [c.real, c.imag]


def _poly(coeffs):
    """Callable evaluating sum coeffs[k] z^k (coefficients may be [re, im] pairs)."""
    c = np.array([as_complex(v) for v in coeffs], dtype=complex)

    def f(z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), c)

    return f


def _refined_sup(f, domain, n=4000, seed=11, polish=8):
    """max |f| over a deterministic sample, polished by Nelder-Mead from the best points."""
    z = geo.sample_interior(domain, n, seed)
    if z.size == 0:
        return 0.0
    a = np.abs(f(z))
    best = float(np.max(a))

    def neg(p):
        w = np.array([complex(p[0], p[1])])
        if not domain.contains(w)[0]:
            return 0.0
        return -float(np.abs(f(w))[0])

    for i in np.argsort(a)[-polish:]:
        res = optimize.minimize(neg, [z[i].real, z[i].imag], method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------------------
# trivial coefficients
# ---------------------------------------------------------------------------

def zero(support=None):
    support = support or geo.unit_disk()
    return BeltramiCoefficient(lambda z: np.zeros(np.shape(z), complex), support, 0.0,
                               note="identically zero", generator="zero",
                               params={"domain": support.to_dict()})


def constant_disk(k):
    k = complex(k)
    if abs(k) >= 1:
        raise InadmissibleError("|k| must be below 1")
    return BeltramiCoefficient(lambda z: np.full(np.shape(z), k, complex), geo.unit_disk(),
                               abs(k), note="constant on the unit disk",
                               generator="constant-disk", params={"k": complex_to_json(k)})


# ---------------------------------------------------------------------------
# rectangles: mu = (1 + i) h1(x) h2(y)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Nondecreasing profile on [0, length]: power c x^s or piecewise linear."""
    kind: str
    c: float = 0.0
    s: float = 1.0
    nodes: tuple = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            return self.c * np.maximum(x, 0.0) ** self.s
        xs, ys = zip(*self.nodes)
        return np.interp(x, xs, ys)

    def to_dict(self):
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "s": self.s}
        return {"kind": "linear", "nodes": [list(p) for p in self.nodes]}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "power":
            return cls("power", c=float(d["c"]), s=float(d["s"]))
        if d["kind"] == "linear":
            return cls("linear", nodes=tuple((float(x), float(y)) for x, y in d["nodes"]))
        raise SchemaError(f"unknown profile kind {d['kind']!r}")

    def check(self, length, name):
        if self.kind == "power":
            if self.s < 1 or self.c < 0:
                raise InadmissibleError(f"{name}: power profiles need s >= 1 and c >= 0")
        else:
            xs, ys = zip(*self.nodes)
            if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) < 0):
                raise InadmissibleError(f"{name}: piecewise-linear profile must be nondecreasing")
        top = float(self(length))
        if top >= 1 or float(self(0.0)) < 0:
            raise InadmissibleError(f"{name}: values must stay in [0, 1)")
        return top


def rectangle_coefficient(a, b, h1: Profile, h2: Profile):
    """(1 + i) h1(x) h2(y) on [0, a] x [0, b]; vanishes on the left side x = 0."""
    rect = geo.rectangle(a, b)
    s1 = h1.check(a, "h1")
    s2 = h2.check(b, "h2")
    if abs(float(h1(0.0))) > 0:
        raise InadmissibleError("h1(0) must vanish")
    sup = math.sqrt(2) * s1 * s2
    if sup >= 1:
        raise InadmissibleError(f"sup |mu| = {sup:.4g} >= 1")

    def f(z):
        z = np.asarray(z, dtype=complex)
        return (1 + 1j) * h1(np.clip(z.real, 0, a)) * h2(np.clip(z.imag, 0, b))

    # the sup is reached on the right side where h2 is maximal
    ys = np.linspace(0, b, 2001)
    top = np.flatnonzero(h2(ys) >= s2 - 1e-14)
    y_sub = 0.5 * (ys[top[0]] + ys[top[-1]])
    return BeltramiCoefficient(
        f, rect, sup, note="W^{1,p}, p > 2, by construction (power / piecewise-linear profiles)",
        generator="rectangle",
        params={"a": a, "b": b, "h1": h1.to_dict(), "h2": h2.to_dict()},
        substantial_point=complex(a, y_sub), arc=(0j, complex(0, b)))


# ---------------------------------------------------------------------------
# ellipse ramp (vanishes on the left part of the boundary)
# ---------------------------------------------------------------------------

def ellipse_ramp(a, b, k, x_c=0.0):
    dom = geo.ellipse(a, b)
    a, b = dom.params["a"], dom.params["b"]
    k = complex(k)
    if abs(k) >= 1:
        raise InadmissibleError("|k| must be below 1")
    if not -a < x_c < a:
        raise InadmissibleError("ramp start must lie inside the ellipse")

    def f(z):
        z = np.asarray(z, dtype=complex)
        return k * np.clip((z.real - x_c) / (a - x_c), 0.0, 1.0)

    yc = b * math.sqrt(1 - (x_c / a) ** 2)
    return BeltramiCoefficient(f, dom, abs(k), note="Lipschitz ramp in x",
                               generator="ellipse-ramp",
                               params={"a": a, "b": b, "k": complex_to_json(k), "x_c": x_c},
                               substantial_point=complex(a, 0.0),
                               arc=(complex(x_c, -yc), complex(x_c, yc)))


# ---------------------------------------------------------------------------
# harmonic coefficients from boundary data
# ---------------------------------------------------------------------------

def poisson_harmonic(boundary_data, arc=None, M=4096, substantial_point=None,
                     params=None):
    """Harmonic extension into the unit disk of ``boundary_data(theta)``.

    The extension P(z) + Q(conj z) is built from the M-point trigonometric
    interpolant of the data.  ``arc`` = (theta0, theta1) is the declared
    boundary arc on which the data is constant.
    """
    theta = 2 * np.pi * np.arange(M) / M
    u = np.asarray(boundary_data(theta), dtype=complex)
    top = float(np.max(np.abs(u)))
    if top >= 1:
        raise InadmissibleError(f"boundary data reaches {top:.4g} >= 1")
    c = np.fft.fft(u) / M
    half = M // 2
    pos = c[:half].copy()                     # z^k, k = 0..M/2-1
    neg = np.concatenate([[0], c[:-half:-1]])  # conj(z)^k, k = 0..M/2-1 (k = 0 unused)
    # split the Nyquist term evenly so real data stays real
    nyq = c[half]
    pos = np.append(pos, nyq / 2)
    neg = np.append(neg, nyq / 2)

    P = np.polynomial.polynomial

    def f(z):
        z = np.asarray(z, dtype=complex)
        return P.polyval(z, pos) + P.polyval(np.conj(z), neg)

    if substantial_point is None:
        j = int(np.argmax(np.abs(u)))
        substantial_point = complex(np.exp(1j * theta[j]))
    arc_pts = None
    if arc is not None:
        arc_pts = (complex(np.exp(1j * arc[0])), complex(np.exp(1j * arc[1])))
    return BeltramiCoefficient(f, geo.unit_disk(), top,
                               note="harmonic (Poisson extension); smooth up to the boundary",
                               generator="poisson-harmonic", params=params or {},
                               substantial_point=substantial_point, arc=arc_pts)


def affine_like_data(c1, c2, c3, arc_u=(-math.pi / 4, math.pi / 4),
                     gamma=(3 * math.pi / 4, 5 * math.pi / 4), q=0.0):
    """u = c1 e^{i t} + c2 e^{-i t} + c3 on ``arc_u``, q on ``gamma``, linear in between."""
    c1, c2, c3, q = complex(c1), complex(c2), complex(c3), complex(q)
    t0, t1 = arc_u
    g0, g1 = gamma
    if not (t0 < t1 < g0 < g1 < t0 + 2 * np.pi):
        raise InadmissibleError("arcs must be disjoint and ordered counterclockwise")

    def u(t):
        return c1 * np.exp(1j * t) + c2 * np.exp(-1j * t) + c3

    def data(theta):
        th = np.mod(np.asarray(theta, dtype=float) - t0, 2 * np.pi) + t0
        out = np.empty(th.shape, dtype=complex)
        on_u = th <= t1
        out[on_u] = u(th[on_u])
        up = (th > t1) & (th < g0)
        s = (th[up] - t1) / (g0 - t1)
        out[up] = (1 - s) * u(t1) + s * q
        on_g = (th >= g0) & (th <= g1)
        out[on_g] = q
        down = th > g1
        s = (th[down] - g1) / (t0 + 2 * np.pi - g1)
        out[down] = (1 - s) * q + s * u(t0)
        return out

    return data


def example4(c1=0.2, c2=0.1, c3=0.3, arc_u=(-math.pi / 4, math.pi / 4),
             gamma=(3 * math.pi / 4, 5 * math.pi / 4), q=0.0, M=4096):
    data = affine_like_data(c1, c2, c3, arc_u, gamma, q)
    params = {"c1": complex_to_json(c1), "c2": complex_to_json(c2),
              "c3": complex_to_json(c3), "arc_u": list(arc_u), "gamma": list(gamma),
              "q": complex_to_json(q), "M": M}
    return poisson_harmonic(data, arc=gamma, M=M, params=params)


# ---------------------------------------------------------------------------
# polygon Schwarzians on the lower half-plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonSchwarzian:
    angles: tuple
    prevertices: tuple

    @property
    def beta(self):
        return np.asarray(self.angles, dtype=float) - 1.0

    @property
    def C(self):
        b = self.beta
        return -b - b ** 2 / 2

    @property
    def C_pair(self):
        b = self.beta
        return np.outer(b, b)

    @property
    def quadratic(self):
        """Coefficients (A, B, C0) of A r^2 + B r + C0 = 0 defining r0."""
        b = self.beta
        return 0.5 * (np.sum(b ** 2) + np.sum(np.outer(b, b))), -np.sum(b), -2.0

    @property
    def r0(self):
        A, B, C0 = self.quadratic
        disc = B * B - 4 * A * C0
        if A <= 0 or disc < 0:
            raise InadmissibleError("the r0 quadratic has no positive root")
        return float((-B + math.sqrt(disc)) / (2 * A))

    def b(self, z):
        """f''/f' = sum beta_j / (z - a_j)."""
        z = np.asarray(z, dtype=complex)
        return sum(bj / (z - aj) for bj, aj in zip(self.beta, self.prevertices))

    def db(self, z):
        z = np.asarray(z, dtype=complex)
        return sum(-bj / (z - aj) ** 2 for bj, aj in zip(self.beta, self.prevertices))

    def S_t(self, z, t):
        return t * self.db(z) - self.b(z) ** 2 / 2

    def schwarzian(self, z):
        """sum_j C_j/(z - a_j)^2 - sum_{j<l} C_jl/((z - a_j)(z - a_l)).

        The diagonal of the double sum is already folded into C_j.
        """
        z = np.asarray(z, dtype=complex)
        a = self.prevertices
        out = sum(Cj / (z - aj) ** 2 for Cj, aj in zip(self.C, a))
        Cp = self.C_pair
        n = len(a)
        for j in range(n):
            for l in range(j + 1, n):
                out = out - Cp[j, l] / ((z - a[j]) * (z - a[l]))
        return out


def polygon_schwarzian(angles, prevertices):
    angles = tuple(float(t) for t in angles)
    prevertices = tuple(float(t) for t in prevertices)
    if len(angles) != len(prevertices) or not angles:
        raise InadmissibleError("one prevertex per finite vertex")
    if any(not 1 < t < 2 for t in angles):
        raise InadmissibleError("angles must satisfy 1 < alpha_j < 2")
    if len(set(prevertices)) != len(prevertices):
        raise InadmissibleError("prevertices must be distinct")
    return PolygonSchwarzian(angles, prevertices)


def bers_norm_lower(phi, n_rays=181, n_radii=400, rmin=1e-4, rmax=1e4, center=0.0):
    """sup over the lower half-plane of |z - conj z|^2 |phi(z)| on log-spaced rays."""
    t = np.linspace(-np.pi, 0, n_rays + 2)[1:-1]
    r = np.geomspace(rmin, rmax, n_radii)
    z = center + r[:, None] * np.exp(1j * t[None, :])
    return float(np.max(4 * z.imag ** 2 * np.abs(phi(z))))


def pseudo_harmonic_halfplane(ps: PolygonSchwarzian, r):
    """nu_r(z) = -(r/2) y^2 S_{f_n, r0}(conj z) on the upper half-plane."""
    r0 = ps.r0
    if not 0 < r < r0:
        raise InadmissibleError(f"r must lie in (0, r0) = (0, {r0:.6g})")

    def S(z):
        return ps.S_t(z, r0)

    def f(z):
        z = np.asarray(z, dtype=complex)
        return -(r / 2) * z.imag ** 2 * S(np.conj(z))

    center = float(np.mean(ps.prevertices))
    bnorm = bers_norm_lower(S, center=center)
    sup = (r / 2) * bnorm / 4
    mu = BeltramiCoefficient(
        f, geo.upper_half_plane(), sup,
        note="pseudo-harmonic on H; sup may exceed 1 for large r (not solver-admissible)",
        generator="polygon-pseudo-harmonic",
        params={"angles": list(ps.angles), "prevertices": list(ps.prevertices), "r": r})
    mu.params["bers_bound"] = (r / 2) * bnorm
    return mu


# ---------------------------------------------------------------------------
# Ahlfors-Weill and pseudo-harmonic coefficients
# ---------------------------------------------------------------------------

def _disk_sup(weighted, n_r=400, n_t=720):
    r = 1 - np.geomspace(1e-6, 1, n_r)
    t = 2 * np.pi * np.arange(n_t) / n_t
    z = r[:, None] * np.exp(1j * t[None, :])
    return float(np.max(weighted(z)))


def ahlfors_weill(phi, params=None):
    """mu(z) = -(1/2)(|z|^2 - 1)^2 phi(1/conj z) / conj(z)^4 on the exterior disk."""
    bnorm = _disk_sup(lambda w: (1 - np.abs(w) ** 2) ** 2 * np.abs(phi(w)))
    if bnorm >= 2:
        raise UnivalenceError(f"sup (1 - |z|^2)^2 |phi| = {bnorm:.4g} >= 2")

    def f(z):
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        return -0.5 * (np.abs(z) ** 2 - 1) ** 2 * phi(1 / zb) / zb ** 4

    return BeltramiCoefficient(f, geo.exterior_disk(), bnorm / 2,
                               note="harmonic-type extension; vanishes on the unit circle",
                               generator="ahlfors-weill", params=params or {})


def pseudo_harmonic_general(psi, domain: geo.DomainSpec, params=None):
    """mu = lambda_D^{-2} conj(psi) with lambda_D the hyperbolic density."""

    def f(z):
        z = np.asarray(z, dtype=complex)
        lam = geo.hyperbolic_density(domain, z)
        return np.conj(psi(z)) / lam ** 2

    sup = _refined_sup(f, domain)
    if sup >= 1:
        raise InadmissibleError(f"sup |mu| = {sup:.4g} >= 1")
    return BeltramiCoefficient(f, domain, sup, note="pseudo-harmonic",
                               generator="pseudo-harmonic", params=params or {})


# ---------------------------------------------------------------------------
# composition with an affine-like deformation
# ---------------------------------------------------------------------------

def _dz_4th(w, d):
    wx = np.full(w.shape, np.nan + 0j)
    wy = np.full(w.shape, np.nan + 0j)
    wx[2:-2, :] = (-w[4:, :] + 8 * w[3:-1, :] - 8 * w[1:-3, :] + w[:-4, :]) / (12 * d)
    wy[:, 2:-2] = (-w[:, 4:] + 8 * w[:, 3:-1] - 8 * w[:, 1:-3] + w[:, :-4]) / (12 * d)
    return 0.5 * (wx - 1j * wy)


def affine_compose(mu: BeltramiCoefficient, q, solution: MapSolution, collar_cells=2):
    """Coefficient ((mu - q)/(1 - q conj mu)) * dz f / conj(dz f) on the support of mu."""
    q = complex(q)
    if abs(q) >= 1:
        raise InadmissibleError("|q| must be below 1")
    Z = solution.z_grid()
    inside = np.asarray(mu.support.contains(Z))
    mu_g = mu.evaluate(Z)
    dz = _dz_4th(solution.grid, solution.spacing)
    edge = inside ^ ndimage.binary_erosion(inside)
    collar = ndimage.binary_dilation(edge, iterations=collar_cells) if collar_cells else edge & False
    frac = collar.sum() / collar.size
    if frac > 0.01:
        raise ResolutionError(f"collar covers {100 * frac:.2f}% of the grid (> 1%)")
    good = inside & ~collar & np.isfinite(dz)
    # fill the collar from the nearest good cell
    _, (ii, jj) = ndimage.distance_transform_edt(~good, return_indices=True)
    dz_f = dz[ii, jj]
    with np.errstate(divide="ignore", invalid="ignore"):
        unimod = dz_f / np.conj(dz_f)
    grid = np.where(inside, (mu_g - q) / (1 - q * np.conj(mu_g)) * unimod, 0)
    x = solution.coords
    d = solution.spacing

    def f(z):
        z = np.asarray(z, dtype=complex)
        i = np.clip(np.rint((z.real - x[0]) / d).astype(int), 0, x.size - 1)
        j = np.clip(np.rint((z.imag - x[0]) / d).astype(int), 0, x.size - 1)
        mz = mu.func(z)
        return (mz - q) / (1 - q * np.conj(mz)) * unimod[i, j]

    sup = float(np.max(np.abs(grid[good]), initial=0.0))
    out = BeltramiCoefficient(f, mu.support, sup, note="composed with an affine-like deformation",
                              generator="affine-compose",
                              params={"q": complex_to_json(q), "base": mu.describe()})
    out.params["collar_fraction"] = float(frac)
    return out


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _get(p, key, default=None, required=False):
    if key in p:
        return p[key]
    if required:
        raise SchemaError(f"missing parameter {key!r}")
    return default


def _build_zero(p):
    dom = p.get("domain")
    return zero(geo.DomainSpec.from_dict(dom) if dom else None)


def _build_constant(p):
    return constant_disk(as_complex(_get(p, "k", required=True)))


def _build_rectangle(p):
    return rectangle_coefficient(float(_get(p, "a", 2.0)), float(_get(p, "b", 1.0)),
                                 Profile.from_dict(_get(p, "h1", required=True)),
                                 Profile.from_dict(_get(p, "h2", required=True)))


def _build_ellipse(p):
    return ellipse_ramp(float(_get(p, "a", required=True)), float(_get(p, "b", required=True)),
                        as_complex(_get(p, "k", required=True)), float(_get(p, "x_c", 0.0)))


def _build_poisson(p):
    return example4(as_complex(_get(p, "c1", 0.2)), as_complex(_get(p, "c2", 0.1)),
                    as_complex(_get(p, "c3", 0.3)),
                    tuple(_get(p, "arc_u", (-math.pi / 4, math.pi / 4))),
                    tuple(_get(p, "gamma", (3 * math.pi / 4, 5 * math.pi / 4))),
                    as_complex(_get(p, "q", 0.0)), int(_get(p, "M", 4096)))


def _build_polygon(p):
    ps = polygon_schwarzian(_get(p, "angles", required=True), _get(p, "prevertices", required=True))
    if "r" in p:
        r = float(p["r"])
    else:
        r = float(_get(p, "r_fraction", 0.5)) * ps.r0
    return pseudo_harmonic_halfplane(ps, r)


def _build_aw(p):
    coeffs = _get(p, "phi", required=True)
    return ahlfors_weill(_poly(coeffs), params={"phi": coeffs})


def _build_pseudo(p):
    coeffs = _get(p, "psi", required=True)
    dom = geo.DomainSpec.from_dict(_get(p, "domain", required=True))
    return pseudo_harmonic_general(_poly(coeffs), dom,
                                   params={"psi": coeffs, "domain": dom.to_dict()})


GENERATORS = {
    "zero": _build_zero,
    "constant-disk": _build_constant,
    "rectangle": _build_rectangle,
    "ellipse-ramp": _build_ellipse,
    "poisson-harmonic": _build_poisson,
    "polygon-pseudo-harmonic": _build_polygon,
    "ahlfors-weill": _build_aw,
    "pseudo-harmonic": _build_pseudo,
}


def build_coefficient(spec):
    """Build a coefficient from {"generator": name, "params": {...}}."""
    if not isinstance(spec, dict) or "generator" not in spec:
        raise SchemaError('coefficient spec must be {"generator": ..., "params": {...}}')
    name = spec["generator"]
    if name not in GENERATORS:
        raise SchemaError(f"unknown generator {name!r}; registered: {', '.join(sorted(GENERATORS))}")
    params = spec.get("params", {}) or {}
    if not isinstance(params, dict):
        raise SchemaError("params must be an object")
    try:
        mu = GENERATORS[name](params)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad parameters for {name}: {exc}") from exc
    return mu
