"""Top-level quasi-invariants and the pipeline that compares them."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from .beltrami import BeltramiCoefficient, solve
from .degeneration import DegenerationReport, limit_report, pullback
from .errors import DomainError, QCError
from .grunsky import convergence_study
from .pairing import moments, pairing_ellipse, sup_pairing


def teichmuller_upper(mu: BeltramiCoefficient, n=20000, seed=3):
    """Essential sup of |mu| on a dense deterministic sample of its support."""
    z = geo.sample_interior(mu.support, n, seed)
    if z.size == 0:
        return 0.0
    return float(np.max(np.abs(mu.func(z))))


def fredholm_eigenvalue(kappa):
    """rho = 1/kappa; +inf for kappa = 0 (a circle)."""
    kappa = float(kappa)
    if kappa < 0 or kappa > 1 + 1e-12:
        raise DomainError("Grunsky norm must lie in [0, 1]")
    if kappa == 0:
        return math.inf
    return 1.0 / kappa


def reflection_from_kL(k_L):
    """(Q_L, q_L) with Q = ((1 + k)/(1 - k))^2 and q = (Q - 1)/(Q + 1) = 2k/(1 + k^2)."""
    k = float(k_L)
    if not 0 <= k < 1:
        raise DomainError("k_L must lie in [0, 1)")
    Q = (1 + k) ** 2 / (1 - k) ** 2
    q = 2 * k / (1 + k * k)
    return Q, q


class StageError(QCError):
    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class FunctionalReport:
    mu_norm: float
    k_upper: float
    kappa_sequence: list
    grunsky_kind: Optional[str]
    rho_estimate: Optional[float]
    q_estimate: Optional[float]
    gap: Optional[float]
    pairing: Optional[float] = None
    degeneration: Optional[DegenerationReport] = None
    Q_from_kL: Optional[float] = None
    solver: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def ordering_checks(self, tol=2e-2):
        out = {}
        if self.kappa_sequence:
            kap = self.kappa_sequence[-1][1]
            out["kappa<=k_upper"] = kap <= self.k_upper + tol
            if self.pairing is not None:
                out["pairing<=kappa"] = self.pairing <= kap + tol
        return out

    def to_dict(self):
        d = {
            "mu_norm": self.mu_norm,
            "k_upper": self.k_upper,
            "grunsky_kind": self.grunsky_kind,
            "kappa": [{"N": n, "kappa_N": k, "gap": self.mu_norm - k}
                      for n, k in self.kappa_sequence],
            "rho_estimate": _finite(self.rho_estimate),
            "q_estimate": self.q_estimate,
            "gap": self.gap,
            "pairing": self.pairing,
            "Q_from_kL": self.Q_from_kL,
            "ordering": self.ordering_checks(),
            "solver": self.solver,
            "provenance": self.provenance,
            "warnings": self.warnings,
        }
        d["degeneration"] = self.degeneration.to_dict() if self.degeneration else None
        return d

    def kappa_csv(self):
        lines = ["N,kappa_N,gap"]
        for n, k in self.kappa_sequence:
            lines.append(f"{n},{k!r},{self.mu_norm - k!r}")
        return "\n".join(lines) + "\n"


def _finite(x):
    if x is None:
        return None
    return "inf" if math.isinf(x) else x


def exterior_map_for(domain: geo.DomainSpec):
    """chi from the complement of a bounded model domain onto the exterior disk,
    or None when the classical Grunsky coefficients apply."""
    if domain.kind == "unit-disk":
        return None
    if domain.kind == "rectangle":
        a, b = domain.params["a"], domain.params["b"]
        return geo.exterior_rectangle_map(a, b, center=complex(a / 2, b / 2))
    if domain.kind == "ellipse":
        return geo.ellipse_maps(domain.params["a"], domain.params["b"])[1]
    raise DomainError(f"no exterior map for {domain.kind}")


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # label and re-raise
        raise StageError(name, exc) from exc


def equality_report(mu: BeltramiCoefficient, domain: Optional[geo.DomainSpec] = None,
                    N_list=(4, 8, 16, 32), *, grid=256, box=4.0, tol=1e-10,
                    max_iter=200, R=None, m_list=(1, 2, 4, 8, 16, 32), xi_cut_factor=40.0, xi_cut=None,
                    degeneration=True, pairing=True, k_L=None,
                    provenance=None) -> FunctionalReport:
    """solve -> Grunsky (classical or generalized) -> pairing -> degeneration."""
    domain = domain or mu.support
    caught = []
    k_upper = _stage("teichmuller", teichmuller_upper, mu)
    mu_norm = float(mu.sup_norm)
    bounded = domain.kind in ("unit-disk", "rectangle", "ellipse")

    if mu_norm >= 1:
        caught.append(f"sup |mu| = {mu_norm:.6g} >= 1: not a Beltrami coefficient; "
                      "only the sup-norm stage is meaningful")
        bounded = False

    kappa_seq, kind, solver_info = [], None, {}
    if bounded and N_list and mu_norm == 0:
        # the normalized solution is the identity, whose Grunsky matrix vanishes
        kind = "classical" if domain.kind == "unit-disk" else "generalized"
        kappa_seq = [(int(n), 0.0) for n in N_list]
        solver_info = {"grid": grid, "box": box, "residual": 0.0, "iterations": 0,
                       "support_radius": None}
    elif bounded and N_list:
        sol = _stage("solve", solve, mu, grid, box, tol=tol, max_iter=max_iter)
        solver_info = {"grid": grid, "box": box, "residual": sol.residual,
                       "iterations": sol.iterations, "support_radius": sol.support_radius}
        chi = _stage("exterior-map", exterior_map_for, domain)
        kind = "classical" if chi is None else "generalized"
        study = _stage("grunsky", convergence_study, sol, N_list, mu_norm, chi=chi, R=R)
        kappa_seq = list(zip(study.N_list, study.kappa))

    pair = None
    if pairing and bounded:
        if domain.kind == "unit-disk":
            nmax = max(N_list) if N_list else 8
            pair = _stage("pairing", lambda: sup_pairing(moments(mu, 2 * nmax - 2)))
        elif domain.kind == "ellipse":
            pair = _stage("pairing", pairing_ellipse, mu)

    deg = None
    if degeneration and mu.substantial_point is not None and mu.arc is not None:
        def run_deg():
            chi_h = geo.halfstrip_map(domain, mu.substantial_point, mu.arc)
            with warnings.catch_warnings(record=True) as rec:
                warnings.simplefilter("always")
                rep = limit_report(pullback(mu, chi_h), m_list, xi_cut_factor, xi_cut=xi_cut)
            caught.extend(str(w.message) for w in rec)
            return rep
        deg = _stage("degeneration", run_deg)

    if kappa_seq:
        kap = kappa_seq[-1][1]
        rho = fredholm_eigenvalue(min(kap, 1.0)) if kap > 0 else math.inf
        q_est = kap
        gap = mu_norm - kap
    elif mu_norm == 0:
        rho, q_est, gap = math.inf, 0.0, 0.0
    else:
        rho = q_est = gap = None
    Q = reflection_from_kL(k_L)[0] if k_L is not None else None
    return FunctionalReport(mu_norm=mu_norm, k_upper=k_upper, kappa_sequence=kappa_seq,
                            grunsky_kind=kind, rho_estimate=rho, q_estimate=q_est, gap=gap,
                            pairing=pair, degeneration=deg, Q_from_kL=Q, solver=solver_info,
                            provenance=provenance or {}, warnings=caught)
