"""Pullback to the half-strip and the Laplace-type integrals I_m.

With chi: Pi_+ -> D and nu = (mu o chi) conj(chi')/chi', the differentials
omega_m(zeta) = e^{-zeta/m}/m have unit L1 norm on Pi_+ and

    I_m = int_0^1 e^{-i eta/m} ( (1/m) int_0^inf nu(xi + i eta) e^{-xi/m} dxi ) d eta.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import TruncationError
from .geometry import XI_SATURATION
from .quadrature import gauss_legendre, legendre_on_edges


@dataclass
class PullbackCoefficient:
    """nu(zeta) = mu(chi(zeta)) conj(chi'(zeta)) / chi'(zeta) on the half-strip."""
    mu: object
    chi: object
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def sup_norm(self):
        return float(self.mu.sup_norm)

    @property
    def saturation(self):
        # the half-strip maps freeze beyond XI_SATURATION
        return XI_SATURATION if getattr(self.chi, "phase", None) is not None else None

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        key = (zeta.shape, zeta.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        z = self.chi.forward(zeta)
        # chi maps onto the closure; the raw formula extends continuously there
        val = np.asarray(self.mu.func(z), dtype=complex) * self.chi.unimodular(zeta)
        if len(self._cache) > 16:
            self._cache.clear()
        self._cache[key] = val
        return val

    def modulus_check(self, zeta):
        """max ||nu| - |mu o chi|| on the given samples."""
        zeta = np.asarray(zeta, dtype=complex)
        z = self.chi.forward(zeta)
        return float(np.max(np.abs(np.abs(self(zeta)) - np.abs(self.mu.func(z)))))


def pullback(mu, chi) -> PullbackCoefficient:
    return PullbackCoefficient(mu, chi)


def omega(m):
    """omega_m(zeta) = exp(-zeta/m)/m, the square of exp(-zeta/(2m))/sqrt(m)."""
    if m < 1:
        raise ValueError("m must be a positive integer")

    def w(zeta):
        return np.exp(-np.asarray(zeta, dtype=complex) / m) / m

    return w


def _xi_edges(m, xi_cut, near=8.0):
    first = np.arange(0.0, min(near, xi_cut) + 1e-12, 1.0)
    if first[-1] < min(near, xi_cut):
        first = np.append(first, min(near, xi_cut))
    if xi_cut <= first[-1]:
        return first
    n = int(math.ceil((xi_cut - first[-1]) / m))
    rest = np.linspace(first[-1], xi_cut, n + 1)[1:]
    return np.concatenate([first, rest])


def half_strip_nodes(m, xi_cut, n_xi=24, n_eta=64):
    """Tensor nodes/weights on (0, xi_cut) x (0, 1)."""
    xi, wxi = legendre_on_edges(_xi_edges(m, xi_cut), n_xi)
    x, w = gauss_legendre(n_eta)
    eta = (x + 1) / 2
    weta = w / 2
    return xi, wxi, eta, weta


def omega_l1_norm(m, xi_cut=None):
    """int int_{Pi_+} |omega_m| by quadrature (exactly 1 in closed form)."""
    xi_cut = 40.0 * m if xi_cut is None else xi_cut
    xi, wxi, eta, weta = half_strip_nodes(m, xi_cut)
    inner = np.sum(wxi * np.exp(-xi / m) / m)
    return float(inner * np.sum(weta))


def _evaluate_on_nodes(nu, xi, eta):
    """nu on the tensor grid, reusing the frozen column beyond the saturation abscissa."""
    sat = getattr(nu, "saturation", None)
    if sat is None or xi.max() <= sat:
        return np.asarray(nu(xi[:, None] + 1j * eta[None, :]), dtype=complex)
    inner = xi <= sat
    vals = np.empty((xi.size, eta.size), dtype=complex)
    vals[inner] = nu(xi[inner, None] + 1j * eta[None, :])
    vals[~inner] = nu(sat + 1j * eta)[None, :]
    return vals


def I_m(nu, m, xi_cut=None, n_xi=24, n_eta=64):
    """int int_{Pi_+, xi < xi_cut} nu omega_m dxi deta.

    The neglected tail is bounded by sup|nu| exp(-xi_cut/m); xi_cut must be at
    least 20 m.
    """
    xi_cut = 40.0 * m if xi_cut is None else float(xi_cut)
    if xi_cut < 20 * m:
        bound = _sup(nu) * math.exp(-xi_cut / m)
        raise TruncationError(f"xi_cut = {xi_cut} < 20 m leaves a tail up to {bound:.3g}",
                              bound=bound)
    xi, wxi, eta, weta = half_strip_nodes(m, xi_cut, n_xi, n_eta)
    vals = _evaluate_on_nodes(nu, xi, eta)
    om = np.exp(-(xi[:, None] + 1j * eta[None, :]) / m) / m
    return complex(np.sum(vals * om * wxi[:, None] * weta[None, :]))


def _sup(nu):
    s = getattr(nu, "sup_norm", None)
    return 1.0 if s is None else float(s)


def tail_bound(nu, m, xi_cut=None):
    xi_cut = 40.0 * m if xi_cut is None else xi_cut
    return _sup(nu) * math.exp(-xi_cut / m)


def laplace_line(nu, eta, m, xi_cut=None, n_xi=24):
    """(1/m) int_0^xi_cut nu(xi + i eta) exp(-xi/m) dxi."""
    xi_cut = 40.0 * m if xi_cut is None else xi_cut
    xi, w = legendre_on_edges(_xi_edges(m, xi_cut), n_xi)
    return complex(np.sum(w * nu(xi + 1j * eta) * np.exp(-xi / m)) / m)


def ibp_identity(nu, dnu_dxi, eta, m, xi_cut=None, n_xi=24):
    """Both sides of the integration-by-parts identity on the line Im zeta = eta:

        int_0^inf d(nu)/dxi e^{-xi/m} dxi  =  (1/m) int_0^inf nu e^{-xi/m} dxi - nu(i eta).

    Returns (lhs, rhs).
    """
    xi_cut = 40.0 * m if xi_cut is None else xi_cut
    xi, w = legendre_on_edges(_xi_edges(m, xi_cut), n_xi)
    lhs = complex(np.sum(w * dnu_dxi(xi + 1j * eta) * np.exp(-xi / m)))
    rhs = laplace_line(nu, eta, m, xi_cut, n_xi) - complex(np.asarray(nu(np.array([1j * eta])))[0])
    return lhs, rhs


# closed forms used as oracles --------------------------------------------------

def closed_form_unit(m):
    """I_m for nu = 1: int_0^1 e^{-i eta/m} d eta = m (1 - e^{-i/m}) / i."""
    return m * (1 - np.exp(-1j / m)) / 1j


def closed_form_ramp(k, m):
    """I_m for nu = k (1 - e^{-xi})."""
    return k * m / (m + 1) * closed_form_unit(m)


# report ----------------------------------------------------------------------------

@dataclass
class DegenerationReport:
    m_list: tuple
    values: tuple           # I_m
    target: complex         # plateau estimate of the eta-averaged limit of nu
    tail_bounds: tuple
    sup_norm: float
    plateau_modulus: float  # mean |nu| over the plateau window
    corner_values: tuple = ()

    @property
    def gaps(self):
        return tuple(abs(v - self.target) for v in self.values)

    @property
    def norm_gaps(self):
        """sup|nu| - |I_m|."""
        return tuple(self.sup_norm - abs(v) for v in self.values)

    def rows(self):
        return [(m, v.real, v.imag, abs(v), g, t)
                for m, v, g, t in zip(self.m_list, self.values, self.gaps, self.tail_bounds)]

    def to_csv(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["m", "re", "im", "abs", "gap", "tail_bound"])
        for r in self.rows():
            wr.writerow([r[0]] + [repr(float(x)) for x in r[1:]])
        return buf.getvalue()

    def to_dict(self):
        return {"m": list(self.m_list),
                "I_m": [[v.real, v.imag] for v in self.values],
                "abs": [abs(v) for v in self.values],
                "target": [self.target.real, self.target.imag],
                "gaps": list(self.gaps), "norm_gaps": list(self.norm_gaps),
                "tail_bounds": list(self.tail_bounds), "sup_norm": self.sup_norm,
                "plateau_modulus": self.plateau_modulus,
                "corner_values": list(self.corner_values)}


def plateau(nu, xi_star=10.0, n_xi=24, n_eta=64):
    """(average of nu, average of |nu|) over [xi_star, 2 xi_star] x [0, 1]."""
    xi, wxi = legendre_on_edges([xi_star, 2 * xi_star], n_xi)
    x, w = gauss_legendre(n_eta)
    eta, weta = (x + 1) / 2, w / 2
    vals = _evaluate_on_nodes(nu, xi, eta)
    W = wxi[:, None] * weta[None, :] / xi_star
    return complex(np.sum(vals * W)), float(np.sum(np.abs(vals) * W))


def limit_report(nu, m_list, xi_cut_factor=40.0, xi_star=10.0, xi_cut=None) -> DegenerationReport:
    """I_m over ``m_list`` against the plateau average of nu.

    The cut-off is ``xi_cut`` when given, else ``xi_cut_factor * m``.
    """
    m_list = tuple(int(m) for m in m_list)
    cuts = [float(xi_cut) if xi_cut is not None else xi_cut_factor * m for m in m_list]
    vals = tuple(I_m(nu, m, c) for m, c in zip(m_list, cuts))
    tails = tuple(tail_bound(nu, m, c) for m, c in zip(m_list, cuts))
    target, pmod = plateau(nu, xi_star)
    corner = np.abs(np.asarray(nu(1e-3 + 1j * np.array([0.25, 0.5, 0.75]))))
    if np.max(corner) > 1e-3 * max(1.0, _sup(nu)) and hasattr(nu, "chi"):
        warnings.warn(f"nu near the corner segment is {np.max(corner):.3g}, not ~0", stacklevel=2)
    return DegenerationReport(m_list, vals, target, tails, _sup(nu), pmod,
                              tuple(float(c) for c in corner))
