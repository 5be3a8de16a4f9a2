import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import eval_chebyu

from qclab import beltrami as bt
from qclab import coefficients as co
from qclab import geometry as geo
from qclab import pairing as pr
from qclab.errors import BasisError, DomainError


def disk_coef(fn, sup):
    return bt.BeltramiCoefficient(fn, geo.unit_disk(), sup)


def test_constant_pairing():
    m = pr.moments(co.constant_disk(0.3), 14)
    assert m.c[0] == pytest.approx(0.3, abs=1e-12)
    assert np.max(np.abs(m.c[1:])) < 1e-12
    assert pr.sup_pairing(m) == pytest.approx(0.3, abs=1e-12)


@pytest.mark.parametrize("p", [0, 1, 2, 5])
def test_moments_of_conjugate_powers(p):
    # (1/pi) int_D conj(z)^p z^j = delta_jp / (p + 1)
    m = pr.moments(disk_coef(lambda z: np.conj(z) ** p, 1.0), 8)
    ref = np.zeros(9)
    ref[p] = 1 / (p + 1)
    assert np.allclose(m.c, ref, atol=1e-12)


def test_linear_conjugate_pairing():
    mu = disk_coef(lambda z: 0.5 * np.conj(z), 0.5)
    assert pr.sup_pairing(pr.moments(mu, 14)) == pytest.approx(0.25 * np.sqrt(2), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(a=st.complex_numbers(max_magnitude=0.3), b=st.complex_numbers(max_magnitude=0.3),
       c=st.complex_numbers(max_magnitude=0.3))
def test_pairing_bounded_by_sup(a, b, c):
    mu = disk_coef(lambda z: a + b * np.conj(z) + c * z ** 2, abs(a) + abs(b) + abs(c))
    assert pr.sup_pairing(pr.moments(mu, 10, n_r=60, n_theta=64)) <= mu.sup_norm + 1e-9


def test_hankel_structure():
    m = pr.MomentVector(np.arange(7, dtype=complex))
    H = pr.hankel_form(m)
    assert H.shape == (4, 4)
    assert np.allclose(H, H.T)
    assert H[1, 2] == pytest.approx(np.sqrt(6) * 3)
    with pytest.raises(ValueError):
        pr.hankel_form(m, 5)


def test_moments_need_disk_support():
    with pytest.raises(DomainError):
        pr.moments(co.zero(geo.rectangle(1, 1)), 4)


def test_chebyshev_recurrence():
    x = np.linspace(-1.5, 1.5, 7)
    U = pr.chebyshev_u(6, x)
    for n in range(7):
        assert np.allclose(U[n].real, eval_chebyu(n, x))


def test_ellipse_gram_identity():
    G = pr.ellipse_gram(9, 1.25, 0.75)
    assert np.max(np.abs(G - np.eye(10))) <= 1e-6


def test_ellipse_basis_check_rejects_poor_quadrature():
    q = pr.ellipse_quadrature(1.25, 0.75, n_s=3, n_t=8)
    mu = co.ellipse_ramp(1.25, 0.75, 0.3)
    with pytest.raises(BasisError):
        pr.pairing_ellipse(mu, quad=q)


def test_ellipse_constant_pairing():
    mu = bt.BeltramiCoefficient(lambda z: np.full(np.shape(z), 0.3 + 0j),
                                geo.ellipse(1.25, 0.75), 0.3)
    assert pr.pairing_ellipse(mu) == pytest.approx(0.3, abs=1e-4)
    assert pr.pairing_ellipse_squares(mu) <= 0.3 + 1e-9


def test_ellipse_pairing_bounded():
    mu = co.ellipse_ramp(1.25, 0.75, 0.4)
    assert 0 < pr.pairing_ellipse(mu) <= mu.sup_norm + 1e-6
