"""Grid solver for the Beltrami equation dw/dzbar = mu dw/dz on the plane.

The unknown h = dw/dzbar is piecewise constant on the cells of a uniform grid.
Both singular integrals

    C h(z) = -(1/pi) int h(zeta) / (zeta - z) dA,
    T h(z) = -(1/pi) p.v. int h(zeta) / (zeta - z)^2 dA,

are applied with kernels integrated exactly over each square cell (Green's
theorem turns the area integral into four edge integrals with closed forms),
so the discrete operators are free-space convolutions evaluated by FFT.
The solution is w = z + C h + const with h the fixed point of h = mu T h + mu.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft
from scipy import ndimage

from ._config import fft_workers
from .errors import InadmissibleError, IterationLimitError, PaddingError, SchemaError
from .geometry import DomainSpec


@dataclass
class BeltramiCoefficient:
    """A complex dilatation supported on ``support``.

    ``func`` is only consulted inside the support; outside it the coefficient
    is zero.  ``params`` holds whatever is needed to rebuild the coefficient
    from its generator.
    """
    func: Callable
    support: DomainSpec
    sup_norm: float
    note: str = ""
    generator: str = "custom"
    params: dict = field(default_factory=dict)
    substantial_point: Optional[complex] = None
    arc: Optional[tuple] = None

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        try:
            inside = np.asarray(self.support.contains(z))
        except Exception:
            return np.asarray(self.func(z), dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        if np.any(inside):
            out[inside] = self.func(z[inside])
        return out

    __call__ = evaluate

    def describe(self):
        return {"generator": self.generator, "params": self.params,
                "support": self.support.to_dict(), "sup_norm": self.sup_norm,
                "note": self.note}


# ---------------------------------------------------------------------------
# cell-integrated kernels
# ---------------------------------------------------------------------------

def _cell_edges(d):
    h = d / 2
    c = np.array([-h - 1j * h, h - 1j * h, h + 1j * h, -h + 1j * h])
    return list(zip(c, np.roll(c, -1)))


def cauchy_cell(center, z, d):
    """-(1/pi) int_Q dA / (zeta - z) for the square Q of side d centred at ``center``."""
    center = np.asarray(center, dtype=complex)
    z = np.asarray(z, dtype=complex)
    out = 0j
    tiny = 1e-14 * d
    for c0, c1 in _cell_edges(d):
        e = (c1 - c0) / d
        s = (center + c0 - z) / e
        ims = s.imag
        ok = np.abs(ims) > tiny
        s_safe = np.where(ok, s, 1.0)
        term = np.conj(e) * ims * np.log((s_safe + d) / s_safe)
        out = out + np.where(ok, term, 0.0)
    return out / np.pi


def beurling_cell(center, z, d):
    """-(1/pi) p.v. int_Q dA / (zeta - z)^2 for the square Q centred at ``center``.

    ``z`` must not lie on the boundary of Q.
    """
    center = np.asarray(center, dtype=complex)
    z = np.asarray(z, dtype=complex)
    out = 0j
    for c0, c1 in _cell_edges(d):
        e = (c1 - c0) / d
        s = (center + c0 - z) / e
        sl = s + d
        out = out + (np.conj(e) / e) * (np.log(sl / s) + (np.conj(s) - s) * (1 / s - 1 / sl))
    return -out / (2j * np.pi)


def _offset_kernel(cell_fn, na, nb, d):
    """Kernel K[p - q] = cell_fn(center=z_q - z_p, z=0) on offsets |i| < na, |j| < nb."""
    i = np.arange(-(na - 1), na)
    j = np.arange(-(nb - 1), nb)
    delta = (i[:, None] + 1j * j[None, :]) * d
    return cell_fn(-delta, 0j, d)


class _Convolver:
    """Linear convolution of a fixed kernel with inputs of a fixed shape."""

    def __init__(self, kernel, in_shape, out_offset=(0, 0), out_shape=None):
        ka, kb = kernel.shape
        a, b = in_shape
        self.shape = (sfft.next_fast_len(a + ka - 1), sfft.next_fast_len(b + kb - 1))
        self.khat = sfft.fft2(kernel, s=self.shape, workers=fft_workers())
        # kernel centre index is (ka - 1)//2 = half-width
        ca, cb = (ka - 1) // 2, (kb - 1) // 2
        oa, ob = out_offset
        out_shape = out_shape or in_shape
        self.sl = (slice(ca - oa, ca - oa + out_shape[0]), slice(cb - ob, cb - ob + out_shape[1]))

    def __call__(self, h):
        hh = sfft.fft2(h, s=self.shape, workers=fft_workers())
        full = sfft.ifft2(hh * self.khat, workers=fft_workers())
        return full[self.sl]


def _cell_sum(cell_fn, centers, values, z, d, chunk=2_000_000):
    """sum_q values_q * cell_fn(center_q, z) for each point z (direct, chunked)."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    nc = max(1, centers.size)
    step = max(1, chunk // nc)
    for k in range(0, flat.size, step):
        zz = flat[k:k + step]
        out[k:k + step] = cell_fn(centers[None, :], zz[:, None], d) @ values
    return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# Beurling transform on a grid
# ---------------------------------------------------------------------------

def _support_bbox(mask):
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        return None
    return rows[0], rows[-1] + 1, cols[0], cols[-1] + 1


def beurling_transform(field_, spacing=1.0, method="fft", check_padding=True):
    """Beurling transform of a gridded field indexed ``field[ix, iy]``.

    ``method="fft"`` applies the periodic Fourier multiplier conj(k)/k with
    k = k_x + i k_y (zero at k = 0); it is an isometry on mean-zero fields.
    ``method="kernel"`` uses the free-space cell-integrated kernel instead.
    """
    f = np.asarray(field_, dtype=complex)
    bbox = _support_bbox(np.abs(f) > 0)
    if bbox is None:
        return np.zeros_like(f)
    if check_padding:
        i0, i1, j0, j1 = bbox
        diam = max(i1 - i0, j1 - j0)
        margin = min(i0, j0, f.shape[0] - i1, f.shape[1] - j1)
        if margin < 2 * diam:
            raise PaddingError(f"padding margin {margin} cells < 2 x support diameter {diam}")
    if method == "fft":
        k1 = sfft.fftfreq(f.shape[0])[:, None]
        k2 = sfft.fftfreq(f.shape[1])[None, :]
        kappa = k1 + 1j * k2
        with np.errstate(divide="ignore", invalid="ignore"):
            mult = np.where(kappa == 0, 0.0, np.conj(kappa) / kappa)
        return sfft.ifft2(mult * sfft.fft2(f, workers=fft_workers()), workers=fft_workers())
    if method == "kernel":
        na, nb = f.shape
        K = _offset_kernel(beurling_cell, na, nb, spacing)
        return _Convolver(K, f.shape)(f)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def _encode_grid(a):
    return base64.b64encode(np.ascontiguousarray(a, dtype="<c16").tobytes()).decode("ascii")


def _decode_grid(s, shape):
    return np.frombuffer(base64.b64decode(s), dtype="<c16").reshape(shape).copy()


@dataclass
class MapSolution:
    """Normalized solution w(z) = z + b0 + b1/z + ... with w(0) = 0."""
    grid: np.ndarray            # w at cell centres, indexed [ix, iy]
    coords: np.ndarray          # cell-centre coordinates along each axis
    half_width: float
    spacing: float
    h: np.ndarray               # dw/dzbar on the support box
    box: tuple                  # (i0, i1, j0, j1) of the support box
    shift: complex
    residual: float
    iterations: int
    residual_history: list
    support_radius: float
    circle_radius: float
    circle_z: np.ndarray
    circle_samples: np.ndarray
    circle_derivative: np.ndarray
    tail: np.ndarray            # b0, b1, b2, ...
    mu_grid: Optional[np.ndarray] = None

    @property
    def grid_size(self):
        return self.grid.shape[0]

    def z_grid(self):
        x = self.coords
        return x[:, None] + 1j * x[None, :]

    def _cells(self):
        if self.box is None:
            return np.zeros(0, complex), np.zeros(0, complex)
        i0, i1, j0, j1 = self.box
        x = self.coords
        centers = x[i0:i1, None] + 1j * x[None, j0:j1]
        mask = self.h != 0
        return centers[mask], self.h[mask]

    def evaluate(self, z):
        """w(z) at arbitrary points by direct cell sums."""
        z = np.asarray(z, dtype=complex)
        c, v = self._cells()
        if c.size == 0:
            return z.copy()
        return z + _cell_sum(cauchy_cell, c, v, z, self.spacing) + self.shift

    def derivative(self, z):
        """dw/dz = 1 + T h(z); exact for z off the cell edges."""
        z = np.asarray(z, dtype=complex)
        c, v = self._cells()
        if c.size == 0:
            return np.ones_like(z)
        return 1 + _cell_sum(beurling_cell, c, v, z, self.spacing)

    def sample_circle(self, radius, m=256):
        z = radius * np.exp(2j * np.pi * np.arange(m) / m)
        return z, self.evaluate(z), self.derivative(z)

    def tail_coefficients(self, radius=None, n=32, m=256):
        if radius is None:
            z, w = self.circle_z, self.circle_samples
            radius = self.circle_radius
        else:
            z, w, _ = self.sample_circle(radius, m)
        return _tail_from_circle(z, w, radius, n)

    # -- export ------------------------------------------------------------------
    def to_dict(self):
        return {
            "grid_size": int(self.grid.shape[0]),
            "half_width": self.half_width,
            "grid": _encode_grid(self.grid),
            "encoding": "base64 little-endian float64 (re, im) pairs, row-major [ix, iy]",
            "shift": [self.shift.real, self.shift.imag],
            "residual": self.residual,
            "iterations": self.iterations,
            "support_radius": self.support_radius,
            "circle_radius": self.circle_radius,
            "circle_samples": [[float(c.real), float(c.imag)] for c in self.circle_samples],
            "tail": [[float(c.real), float(c.imag)] for c in self.tail],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @staticmethod
    def grid_from_dict(d):
        try:
            n = int(d["grid_size"])
            return _decode_grid(d["grid"], (n, n))
        except (KeyError, ValueError) as exc:
            raise SchemaError(f"malformed MapSolution export: {exc}") from exc


def _tail_from_circle(z, w, radius, n):
    m = z.size
    c = sfft.fft(w - z) / m
    k = np.arange(min(n, m // 2))
    return c[(-k) % m] * radius ** k


def sample_mu(mu, z, supersample=1, spacing=None):
    """Cell values of mu: point samples at centres, or averages over s x s subcells."""
    if supersample <= 1:
        return mu.evaluate(z)
    s = int(supersample)
    off = (np.arange(s) + 0.5) / s - 0.5
    acc = np.zeros(z.shape, dtype=complex)
    for ox in off:
        for oy in off:
            acc += mu.evaluate(z + spacing * (ox + 1j * oy))
    return acc / (s * s)


def solve(mu: BeltramiCoefficient, grid_size=256, box_halfwidth=4.0, *, tol=1e-10,
          max_iter=200, tail_radius=None, n_tail=32, n_circle=256, supersample=1,
          keep_mu=True) -> MapSolution:
    N = int(grid_size)
    L = float(box_halfwidth)
    d = 2 * L / N
    x = -L + (np.arange(N) + 0.5) * d
    Z = x[:, None] + 1j * x[None, :]
    mu_grid = sample_mu(mu, Z, supersample, d)
    if np.max(np.abs(mu_grid), initial=0) >= 1:
        raise InadmissibleError("|mu| must stay below 1")
    mask = mu_grid != 0
    bbox = _support_bbox(mask)
    history = []
    if bbox is None:
        z_c = (tail_radius or 1.0) * np.exp(2j * np.pi * np.arange(n_circle) / n_circle)
        return MapSolution(grid=Z.copy(), coords=x, half_width=L, spacing=d,
                           h=np.zeros((0, 0), complex), box=None, shift=0j, residual=0.0,
                           iterations=0, residual_history=history, support_radius=0.0,
                           circle_radius=float(tail_radius or 1.0), circle_z=z_c,
                           circle_samples=z_c.copy(), circle_derivative=np.ones_like(z_c),
                           tail=np.zeros(n_tail, complex),
                           mu_grid=mu_grid if keep_mu else None)
    i0, i1, j0, j1 = bbox
    if min(i0, j0) < 1 or max(i1, j1) > N - 1:
        raise PaddingError("support of mu touches the edge of the computational box")
    mub = mu_grid[i0:i1, j0:j1]
    na, nb = mub.shape
    T = _Convolver(_offset_kernel(beurling_cell, na, nb, d), (na, nb))

    h = mub.copy()
    residual = math.inf
    it = 0
    while it < max_iter:
        it += 1
        h_new = mub * T(h) + mub
        residual = float(np.sqrt(np.sum(np.abs(h_new - h) ** 2)) * d)
        history.append(residual)
        h = h_new
        if residual < tol:
            break
    else:
        raise IterationLimitError(f"Neumann iteration stalled after {max_iter} steps",
                                  residual=residual)

    Cfull = _Convolver(_offset_kernel(cauchy_cell, N, N, d), (na, nb),
                       out_offset=(i0, j0), out_shape=(N, N))
    Ch = Cfull(h)
    centers = Z[i0:i1, j0:j1]
    nz = h != 0
    shift = -complex(_cell_sum(cauchy_cell, centers[nz], h[nz], np.array([0j]), d)[0])
    grid = Z + Ch + shift

    corner_r = np.abs(centers[mask[i0:i1, j0:j1]]) + d / math.sqrt(2)
    support_radius = float(corner_r.max())
    R = float(tail_radius) if tail_radius else 1.5 * support_radius
    sol = MapSolution(grid=grid, coords=x, half_width=L, spacing=d, h=h, box=bbox,
                      shift=shift, residual=residual, iterations=it,
                      residual_history=history, support_radius=support_radius,
                      circle_radius=R, circle_z=np.zeros(0, complex),
                      circle_samples=np.zeros(0, complex),
                      circle_derivative=np.zeros(0, complex), tail=np.zeros(0, complex),
                      mu_grid=mu_grid if keep_mu else None)
    cz, cw, cd = sol.sample_circle(R, n_circle)
    sol.circle_z, sol.circle_samples, sol.circle_derivative = cz, cw, cd
    sol.tail = _tail_from_circle(cz, cw, R, n_tail)
    return sol


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass
class RecoveredDilatation:
    field: np.ndarray       # dbar w / d w on interior cells (nan where masked or on the rim)
    masked: np.ndarray      # |d w| < 1e-8
    masked_count: int
    collar: np.ndarray      # cells within two cells of a jump of mu

    def sup_error(self, reference):
        """max |field - reference| over valid cells outside the collar."""
        ok = np.isfinite(self.field) & ~self.collar
        return float(np.max(np.abs(self.field[ok] - reference[ok]), initial=0.0))


def recover_dilatation(solution: MapSolution, collar_cells=2) -> RecoveredDilatation:
    w = solution.grid
    if w.shape[0] < 128:
        raise ValueError("dilatation recovery needs a grid of at least 128 cells")
    d = solution.spacing
    wx = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2 * d)
    wy = (w[1:-1, 2:] - w[1:-1, :-2]) / (2 * d)
    dz = 0.5 * (wx - 1j * wy)
    dzb = 0.5 * (wx + 1j * wy)
    field_ = np.full(w.shape, np.nan + 0j)
    masked = np.zeros(w.shape, bool)
    small = np.abs(dz) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(small, np.nan, dzb / dz)
    field_[1:-1, 1:-1] = inner
    masked[1:-1, 1:-1] = small

    collar = np.zeros(w.shape, bool)
    mu = solution.mu_grid
    if mu is not None:
        jump = np.zeros(w.shape, bool)
        jump[:-1, :] |= np.abs(mu[1:, :] - mu[:-1, :]) > 1e-12
        jump[1:, :] |= np.abs(mu[1:, :] - mu[:-1, :]) > 1e-12
        jump[:, :-1] |= np.abs(mu[:, 1:] - mu[:, :-1]) > 1e-12
        jump[:, 1:] |= np.abs(mu[:, 1:] - mu[:, :-1]) > 1e-12
        # only jumps across the support edge count, not smooth variation inside
        edge = jump & (ndimage.binary_dilation(mu == 0) & ndimage.binary_dilation(mu != 0))
        if collar_cells > 0:
            collar = ndimage.binary_dilation(edge, iterations=collar_cells)
    return RecoveredDilatation(field=field_, masked=masked, masked_count=int(small.sum()),
                               collar=collar)
