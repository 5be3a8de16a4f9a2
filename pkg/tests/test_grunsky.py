import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qclab import geometry as geo
from qclab import grunsky as gr
from qclab.errors import BranchError, SymmetryError, UnivalenceError


def joukowski(c):
    return (lambda z: z + c / z), (lambda z: 1 - c / z ** 2)


def test_joukowski_diagonal():
    f, df = joukowski(0.5)
    B = gr.classical_matrix(f, 8, R=1.0, M=256, derivative=df)
    m = np.arange(1, 9)
    assert np.allclose(np.diag(B.alpha()), -0.5 ** m / m, atol=1e-14)
    off = B.entries - np.diag(np.diag(B.entries))
    assert np.max(np.abs(off)) < 1e-14


@pytest.mark.parametrize("k", [0.1, 0.3, 0.5])
def test_exact_constant_disk_map(k):
    # exterior of the unit disk the normalized solution is z + k/z
    f, df = joukowski(k)
    B = gr.classical_matrix(f, 6, R=1.5, M=256, derivative=df)
    m = np.arange(1, 7)
    assert np.allclose(np.diag(B.alpha()), -k ** m / m, atol=1e-6)
    assert gr.grunsky_norm(B) == pytest.approx(k, abs=1e-12)


def test_translation_has_zero_matrix():
    B = gr.classical_matrix(lambda z: z + 0.3 - 0.2j, 6, R=1.0,
                            derivative=lambda z: np.ones_like(z))
    assert np.max(np.abs(B.entries)) < 1e-14


@settings(max_examples=30, deadline=None)
@given(r=st.floats(0, 0.9), t=st.floats(0, 6.28))
def test_norm_equals_joukowski_parameter(r, t):
    c = r * np.exp(1j * t)
    f, df = joukowski(c)
    B = gr.classical_matrix(f, 12, R=1.0, M=512, derivative=df)
    assert np.max(np.abs(B.entries - B.entries.T)) < 1e-12
    assert gr.grunsky_norm(B) == pytest.approx(r, abs=1e-10)
    assert gr.grunsky_norm(B) <= 1


def test_generalized_ellipse_oracle():
    # with f = chi itself, -log((chi(z)-chi(w))/(z-w)) = const + log(1 - 1/(R^2 chi(z) chi(w)))
    _, chi = geo.ellipse_maps(1.25, 0.75)
    R2 = chi.info["R"] ** 2
    B = gr.generalized_coefficients(chi.forward, chi, 6, R=1.2, derivative=chi.derivative)
    m = np.arange(1, 7)
    assert np.allclose(np.diag(B.entries), -R2 ** (-m.astype(float)), atol=1e-12)
    assert np.max(np.abs(B.entries - np.diag(np.diag(B.entries)))) < 1e-12


def test_generalized_identity_vanishes():
    chi = geo.exterior_rectangle_map(2.0, 1.0, center=1 + 0.5j)
    B = gr.generalized_coefficients(lambda z: z, chi, 8, R=1.2,
                                    derivative=lambda z: np.ones_like(z))
    assert np.max(np.abs(B.entries)) < 1e-12


def test_kernel_errors():
    with pytest.raises(UnivalenceError):
        gr.classical_matrix(lambda z: z ** 2, 4, R=1.0, M=64, derivative=lambda z: 2 * z)
    f, df = joukowski(2.0)
    with pytest.raises(BranchError):
        gr.classical_matrix(f, 4, R=1.2, M=64, derivative=df)
    with pytest.raises(SymmetryError):
        gr.grunsky_norm(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        gr.coefficients_from_map(np.ones(16), np.ones(16), 1.0, N=8)


def test_matrix_round_trip_and_truncation():
    f, df = joukowski(0.4 + 0.1j)
    B = gr.classical_matrix(f, 6, R=1.0, derivative=df)
    C = gr.GrunskyMatrix.from_dict(B.to_dict())
    assert np.array_equal(C.entries, B.entries) and C.kind == B.kind
    assert B.truncate(3).N == 3


def test_convergence_study_monotone(disk_solution):
    st_ = gr.convergence_study(disk_solution, (4, 8, 16, 32), 0.3)
    assert all(b >= a for a, b in zip(st_.kappa, st_.kappa[1:]))
    assert all(abs(k - 0.3) < 1e-2 for k in st_.kappa)
    assert len(st_.rows()) == 4


def test_sampling_radius_independence(disk_solution):
    R = 1.2 * disk_solution.support_radius
    A = gr.classical_matrix(disk_solution, 9, R=R).alpha()
    B = gr.classical_matrix(disk_solution, 9, R=1.2 * R).alpha()
    m = np.arange(1, 10)
    low = (m[:, None] + m[None, :]) <= 10
    assert np.max(np.abs(A - B)[low]) < 1e-6


@pytest.mark.parametrize("k", [0.5, 0.9])
def test_solved_maps_respect_univalence_bound(k):
    from qclab import beltrami as bt
    from qclab import coefficients as co
    mu = co.constant_disk(k)
    study = gr.convergence_study(bt.solve(mu, 128, 4.0, max_iter=2000), (4, 8, 16), k)
    assert max(study.kappa) <= 1 + 1e-8
    assert max(study.kappa) <= k + 2e-2
