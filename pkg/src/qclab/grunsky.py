"""Grunsky coefficient matrices from samples of a map on a circle.

For f(z) = z + b0 + b1/z + ... univalent outside |z| = R the kernel

    G(z, zeta) = log((f(z) - f(zeta)) / (z - zeta)) = sum_{m,n>=1} alpha_mn z^-m zeta^-n

is sampled on the torus of M x M circle points, with the diagonal replaced by
log f'(z).  A two-dimensional FFT then gives alpha_mn R^{-m-n}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from ._config import fft_workers
from .errors import BranchError, SymmetryError, UnivalenceError


@dataclass(frozen=True)
class GrunskyMatrix:
    entries: np.ndarray     # B_mn, m, n = 1..N
    kind: str               # "classical" or "generalized"
    R: float

    @property
    def N(self):
        return self.entries.shape[0]

    def truncate(self, n):
        return GrunskyMatrix(self.entries[:n, :n], self.kind, self.R)

    def alpha(self):
        """alpha_mn = B_mn / sqrt(mn) (classical convention)."""
        k = np.arange(1, self.N + 1)
        return self.entries / np.sqrt(np.outer(k, k))

    def to_dict(self):
        return {"N": self.N, "kind": self.kind, "R": self.R,
                "entries": [[float(v.real), float(v.imag)] for v in self.entries.ravel()]}

    @classmethod
    def from_dict(cls, d):
        n = int(d["N"])
        vals = np.array([complex(a, b) for a, b in d["entries"]]).reshape(n, n)
        return cls(vals, d["kind"], float(d["R"]))


def _log_kernel(z, w, dw):
    """Continuous branch of log((w_j - w_k)/(z_j - z_k)) on the sample torus."""
    M = z.size
    dz = z[:, None] - z[None, :]
    dwm = w[:, None] - w[None, :]
    eye = np.eye(M, dtype=bool)
    scale = np.max(np.abs(w))
    if np.any(np.abs(dwm[~eye]) <= 1e-13 * scale):
        raise UnivalenceError("f takes the same value at two distinct sample points")
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(eye, 0, dwm / np.where(eye, 1, dz))
    q[eye] = dw
    if np.any(q == 0):
        raise UnivalenceError("vanishing derivative on the sampling circle")
    G = np.log(q)
    # unwrap each row cyclically; the kernel has no constant term, so each row
    # is then shifted by the multiple of 2 pi that makes its mean phase vanish
    ph = np.unwrap(np.concatenate([G.imag, G.imag[:, :1]], axis=1), axis=1)
    closing = np.abs(ph[:, -1] - ph[:, 0])
    if np.any(closing > 1.0):
        raise BranchError("log kernel does not close around the circle; increase R")
    ph = ph[:, :-1]
    ph -= 2 * np.pi * np.round(ph.mean(axis=1, keepdims=True) / (2 * np.pi))
    return G.real + 1j * ph


def _torus_coefficients(G, R, N):
    """c_mn with G = sum c_mn (R e^{i theta})^-m (R e^{i theta'})^-n, m, n = 1..N."""
    M = G.shape[0]
    A = sfft.fft2(G, workers=fft_workers()) / (M * M)
    k = np.arange(1, N + 1)
    # numpy's forward FFT returns the coefficient of e^{+ik theta} at index k
    C = A[np.ix_((-k) % M, (-k) % M)]
    return C * R ** (k[:, None] + k[None, :])


def coefficients_from_map(samples, derivative, R, N=32):
    """Classical Grunsky matrix B_mn = sqrt(mn) alpha_mn from samples
    f(R e^{2 pi i j/M}) and f'(R e^{2 pi i j/M}), j = 0..M-1."""
    w = np.asarray(samples, dtype=complex)
    dw = np.asarray(derivative, dtype=complex)
    M = w.size
    if M < 4 * N:
        raise ValueError(f"need at least 4N = {4 * N} samples, got {M}")
    z = R * np.exp(2j * np.pi * np.arange(M) / M)
    G = _log_kernel(z, w, dw)
    alpha = _torus_coefficients(G, R, N)
    k = np.arange(1, N + 1)
    B = np.sqrt(np.outer(k, k)) * alpha
    return GrunskyMatrix(0.5 * (B + B.T), "classical", float(R))


def sample_map(f, R, M=256, derivative=None):
    """(values, derivatives) of f on |z| = R.  ``f`` is a MapSolution or a callable."""
    z = R * np.exp(2j * np.pi * np.arange(M) / M)
    if hasattr(f, "evaluate") and hasattr(f, "derivative"):
        return f.evaluate(z), f.derivative(z)
    if derivative is None:
        raise ValueError("a derivative is needed for callables")
    return np.asarray(f(z), dtype=complex), np.asarray(derivative(z), dtype=complex)


def classical_matrix(f, N=32, R=None, M=256, derivative=None):
    if R is None:
        R = 1.2 * getattr(f, "support_radius", 1.0) or 1.2
    w, dw = sample_map(f, R, M, derivative)
    return coefficients_from_map(w, dw, R, N)


def generalized_coefficients(f, chi, N=32, R=1.2, M=256, derivative=None):
    """Generalized Grunsky matrix with entries beta_mn, from

        -log((f(z) - f(zeta)) / (z - zeta)) = sum beta_mn / (sqrt(mn) chi(z)^m chi(zeta)^n),

    sampled at z = chi^{-1}(R e^{i theta}).  ``chi`` is a ConformalMap from the
    exterior domain onto the exterior disk; ``chi.inverse`` is used.
    """
    if M < 4 * N:
        raise ValueError(f"need at least 4N = {4 * N} samples, got {M}")
    u = R * np.exp(2j * np.pi * np.arange(M) / M)
    z = np.asarray(chi.inverse(u), dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("chi inversion failed on the sampling circle")
    if hasattr(f, "evaluate") and hasattr(f, "derivative"):
        w, dw = f.evaluate(z), f.derivative(z)
    else:
        if derivative is None:
            raise ValueError("a derivative is needed for callables")
        w, dw = np.asarray(f(z), dtype=complex), np.asarray(derivative(z), dtype=complex)
    G = _log_kernel(z, w, dw)
    c = -_torus_coefficients(G, R, N)
    k = np.arange(1, N + 1)
    B = np.sqrt(np.outer(k, k)) * c
    return GrunskyMatrix(0.5 * (B + B.T), "generalized", float(R))


def grunsky_norm(B, tol=1e-8):
    """Largest singular value, which for a complex symmetric matrix equals
    sup |x^T B x| over unit vectors x."""
    A = B.entries if isinstance(B, GrunskyMatrix) else np.asarray(B, dtype=complex)
    if A.size == 0:
        return 0.0
    if np.max(np.abs(A - A.T)) > tol:
        raise SymmetryError("Grunsky matrix is not symmetric")
    return float(np.linalg.norm(A, 2))


@dataclass(frozen=True)
class ConvergenceStudy:
    N_list: tuple
    kappa: tuple
    mu_norm: float

    @property
    def gaps(self):
        return tuple(self.mu_norm - k for k in self.kappa)

    def rows(self):
        return list(zip(self.N_list, self.kappa, self.gaps))


def convergence_study(solution, N_list, mu_norm, chi=None, R=None, M=256):
    """kappa_N for each N in N_list from one matrix of size max(N_list).

    Leading principal submatrices of one symmetric matrix give nondecreasing
    kappa_N by construction.
    """
    N_list = tuple(int(n) for n in N_list)
    nmax = max(N_list)
    M = max(M, 4 * nmax)
    if chi is None:
        B = classical_matrix(solution, nmax, R=R, M=M)
    else:
        B = generalized_coefficients(solution, chi, nmax, R=R or 1.2, M=M)
    kap = tuple(grunsky_norm(B.truncate(n)) for n in N_list)
    return ConvergenceStudy(N_list, kap, float(mu_norm))
