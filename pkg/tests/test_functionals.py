import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qclab import coefficients as co
from qclab import functionals as fn
from qclab import geometry as geo
from qclab.errors import DomainError, PaddingError


@pytest.mark.parametrize("k,Q,q", [(0.0, 1.0, 0.0), (1 / 3, 4.0, 0.6), (0.5, 9.0, 0.8)])
def test_reflection_triples(k, Q, q):
    Qc, qc = fn.reflection_from_kL(k)
    assert Qc == pytest.approx(Q, abs=1e-12)
    assert qc == pytest.approx(q, abs=1e-12)
    assert (1 + qc) / (1 - qc) == pytest.approx(Qc, abs=1e-12)


@settings(max_examples=50)
@given(k=st.floats(0, 0.99))
def test_reflection_round_trip(k):
    Q, q = fn.reflection_from_kL(k)
    assert (1 + q) / (1 - q) == pytest.approx(Q, rel=1e-10)
    assert 0 <= q < 1 and q >= k


def test_reflection_domain():
    with pytest.raises(DomainError):
        fn.reflection_from_kL(1.0)


@settings(max_examples=100)
@given(kappa=st.floats(1e-6, 1.0))
def test_fredholm_reciprocal(kappa):
    assert abs(fn.fredholm_eigenvalue(kappa) * kappa - 1) <= 2 ** -52


def test_fredholm_edge_cases():
    assert fn.fredholm_eigenvalue(0) == math.inf
    with pytest.raises(DomainError):
        fn.fredholm_eigenvalue(1.5)


def test_teichmuller_upper():
    assert fn.teichmuller_upper(co.constant_disk(0.3)) == pytest.approx(0.3)
    assert fn.teichmuller_upper(co.example4()) == pytest.approx(0.6, abs=2e-3)


def test_exterior_maps():
    assert fn.exterior_map_for(geo.unit_disk()) is None
    chi = fn.exterior_map_for(geo.rectangle(2.0, 1.0))
    assert abs(chi.info["center"] - (1 + 0.5j)) < 1e-15
    assert fn.exterior_map_for(geo.ellipse(1.25, 0.75)).info["R"] == pytest.approx(2.0)
    with pytest.raises(DomainError):
        fn.exterior_map_for(geo.upper_half_plane())


def test_constant_disk_report():
    rep = fn.equality_report(co.constant_disk(0.3), N_list=(4, 8), grid=256, k_L=1 / 3)
    assert rep.grunsky_kind == "classical"
    assert all(abs(k - 0.3) < 1e-2 for _, k in rep.kappa_sequence)
    assert rep.pairing == pytest.approx(0.3, abs=1e-10)
    assert rep.rho_estimate * rep.kappa_sequence[-1][1] == pytest.approx(1.0, rel=1e-15)
    assert rep.Q_from_kL == pytest.approx(4.0)
    assert all(rep.ordering_checks().values())
    assert rep.degeneration is None
    assert rep.kappa_csv().splitlines()[0] == "N,kappa_N,gap"


def test_zero_report():
    rep = fn.equality_report(co.zero(), grid=64)
    d = rep.to_dict()
    assert d["mu_norm"] == 0 and d["k_upper"] == 0 and d["pairing"] == 0
    assert all(r["kappa_N"] == 0 for r in d["kappa"])
    assert d["rho_estimate"] == "inf"


def test_oversized_coefficient_only_gets_sup_norm():
    ps = co.polygon_schwarzian([1.5], [0.0])
    rep = fn.equality_report(co.pseudo_harmonic_halfplane(ps, 2.0))
    assert rep.mu_norm == pytest.approx(2.125, rel=1e-6)
    assert rep.kappa_sequence == [] and rep.pairing is None
    assert any("not a Beltrami coefficient" in w for w in rep.warnings)


def test_stage_errors_are_labelled():
    with pytest.raises(fn.StageError) as exc:
        fn.equality_report(co.constant_disk(0.3), grid=32, box=1.0)
    assert exc.value.stage == "solve"
    assert isinstance(exc.value.cause, PaddingError)


def test_ordering_chain_on_runs():
    for mu in (co.constant_disk(0.3), co.ellipse_ramp(1.25, 0.75, 0.4)):
        rep = fn.equality_report(mu, N_list=(4, 8), grid=128, degeneration=False)
        kap = rep.kappa_sequence[-1][1]
        assert kap <= rep.k_upper + 2e-2
        assert rep.pairing <= kap + 2e-2
        assert all(rep.ordering_checks().values())
