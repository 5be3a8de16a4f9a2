import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qclab import beltrami as bt
from qclab import coefficients as co
from qclab import geometry as geo
from qclab.errors import InadmissibleError, ResolutionError, SchemaError, UnivalenceError


def example1():
    return co.rectangle_coefficient(2.0, 1.0, co.Profile("power", c=0.25, s=1.0),
                                    co.Profile("linear", nodes=((0.0, 0.5), (1.0, 0.5))))


def test_rectangle_example():
    mu = example1()
    assert mu.sup_norm == pytest.approx(math.sqrt(2) / 4, abs=1e-15)
    y = np.linspace(0.01, 0.99, 9)
    assert np.all(mu.func(0j + 1j * y) == 0)
    assert abs(mu.func(np.array([2 + 0.5j]))[0]) == pytest.approx(mu.sup_norm)
    assert mu.substantial_point == 2 + 0.5j and mu.arc == (0j, 1j)


def test_rectangle_profiles_checked():
    with pytest.raises(InadmissibleError):
        co.rectangle_coefficient(2.0, 1.0, co.Profile("power", c=0.25, s=0.5),
                                 co.Profile("power", c=0.5, s=1.0))
    with pytest.raises(InadmissibleError):
        co.rectangle_coefficient(2.0, 1.0, co.Profile("linear", nodes=((0, 0.5), (2, 0.2))),
                                 co.Profile("power", c=0.5, s=1.0))
    with pytest.raises(InadmissibleError):
        co.rectangle_coefficient(2.0, 1.0, co.Profile("power", c=0.45, s=1.0),
                                 co.Profile("power", c=0.9, s=1.0))


def test_ellipse_ramp():
    mu = co.ellipse_ramp(1.25, 0.75, 0.4)
    assert mu.sup_norm == pytest.approx(0.4)
    assert np.all(mu.func(np.array([-0.5 + 0.1j, -0.01j])) == 0)
    assert mu.func(np.array([1.25 + 0j]))[0] == pytest.approx(0.4)


def test_poisson_reproduces_analytic_data():
    mu = co.poisson_harmonic(lambda t: 0.5 * np.exp(1j * t), M=64)
    z = np.array([0.3 + 0.2j, -0.5j, 0.9])
    assert np.allclose(mu.func(z), 0.5 * z, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(a=st.complex_numbers(max_magnitude=0.2), b=st.complex_numbers(max_magnitude=0.2),
       n=st.integers(0, 5), m=st.integers(1, 5))
def test_poisson_extension_of_trig_polynomials(a, b, n, m):
    mu = co.poisson_harmonic(lambda t: a * np.exp(1j * n * t) + b * np.exp(-1j * m * t), M=64)
    z = np.array([0.3 + 0.2j, -0.5j, 0.7 - 0.1j])
    ref = a * z ** n + b * np.conj(z) ** m
    assert np.allclose(mu.func(z), ref, atol=1e-14)


def test_poisson_mean_value_property():
    data = co.affine_like_data(0.2, 0.1, 0.3, q=0.1)
    mu = co.poisson_harmonic(data, M=4096)
    t = 2 * np.pi * np.arange(4096) / 4096
    assert abs(mu.func(np.array([0j]))[0] - data(t).mean()) < 1e-15


def test_example4_values():
    mu = co.example4(q=0.1)
    assert mu.sup_norm == pytest.approx(0.6, abs=1e-12)
    assert abs(mu.func(np.array([1 + 0j]))[0] - 0.6) < 1e-3
    # boundary value q on gamma
    th = np.linspace(3 * np.pi / 4 + 0.05, 5 * np.pi / 4 - 0.05, 5)
    assert np.allclose(mu.func(0.99999 * np.exp(1j * th)), 0.1, atol=1e-3)
    with pytest.raises(InadmissibleError):
        co.affine_like_data(0.2, 0.1, 0.3, arc_u=(0, 2), gamma=(1, 3))


def test_single_vertex_quadratic():
    ps = co.polygon_schwarzian([1.5], [0.0])
    assert ps.C[0] == pytest.approx(-0.625, abs=1e-12)
    assert ps.r0 == pytest.approx(4.0, abs=1e-12)
    A, B, C0 = ps.quadratic
    r = (-B + math.sqrt(B * B - 4 * A * C0)) / (2 * A)
    assert r == pytest.approx(4.0, abs=1e-12)
    two = co.polygon_schwarzian([1.5, 1.5], [-1.0, 1.0])
    assert two.C_pair[0, 1] == pytest.approx(0.25)


def test_schwarzian_of_polygon_map():
    ps = co.polygon_schwarzian([1.5, 1.25], [-1.0, 2.0])
    z = np.array([0.3 - 0.7j, 5 - 2j])
    # b' - b^2/2 is the Schwarzian of the map with f''/f' = b
    h = 1e-5
    db = (ps.b(z + h) - ps.b(z - h)) / (2 * h)
    assert np.allclose(ps.S_t(z, 1.0), db - ps.b(z) ** 2 / 2, rtol=1e-8)
    # the single-vertex closed form C/(z - a)^2
    one = co.polygon_schwarzian([1.5], [0.0])
    assert np.allclose(one.schwarzian(z), -0.625 / z ** 2)
    assert np.allclose(one.S_t(z, 1.0), one.schwarzian(z))


def test_pseudo_harmonic_halfplane():
    ps = co.polygon_schwarzian([1.5], [0.0])
    nu1 = co.pseudo_harmonic_halfplane(ps, 1.0)
    nu2 = co.pseudo_harmonic_halfplane(ps, 2.0)
    z = np.array([0.5 + 1e-300j, 1 + 1j, -3 + 0.2j])
    assert nu1.func(np.array([0.7 + 0j, -2 + 0j])).tolist() == [0, 0]
    assert np.array_equal(nu2.func(z), 2 * nu1.func(z))
    # -(r/2) y^2 S(conj z) with S = -2.125/z^2 has modulus (r/2) 2.125 sin^2(arg z)
    assert nu1.sup_norm == pytest.approx(1.0625, rel=1e-6)
    assert nu1.params["bers_bound"] == pytest.approx(4 * 1.0625, rel=1e-6)
    with pytest.raises(InadmissibleError):
        co.pseudo_harmonic_halfplane(ps, 4.5)


def test_ahlfors_weill():
    mu = co.ahlfors_weill(lambda w: np.full(np.shape(w), 0.8 + 0j))
    assert mu.sup_norm == pytest.approx(0.4, abs=1e-6)
    t = np.linspace(0, 2 * np.pi, 7)
    assert np.allclose(mu.func(np.exp(1j * t)), 0)
    with pytest.raises(UnivalenceError):
        co.ahlfors_weill(lambda w: np.full(np.shape(w), 2.5 + 0j))


def test_pseudo_harmonic_general_disk():
    mu = co.pseudo_harmonic_general(lambda z: np.full(np.shape(z), 0.5j), geo.unit_disk())
    z = np.array([0.2 + 0.1j])
    assert mu.func(z)[0] == pytest.approx((1 - abs(z[0]) ** 2) ** 2 * -0.5j)
    with pytest.raises(InadmissibleError):
        co.pseudo_harmonic_general(lambda z: np.full(np.shape(z), 3.0), geo.unit_disk())


SPECS = [
    {"generator": "zero", "params": {}},
    {"generator": "constant-disk", "params": {"k": [0.3, 0.1]}},
    {"generator": "rectangle", "params": {"a": 2.0, "b": 1.0,
                                          "h1": {"kind": "power", "c": 0.25, "s": 1.0},
                                          "h2": {"kind": "linear", "nodes": [[0, 0.5], [1, 0.5]]}}},
    {"generator": "ellipse-ramp", "params": {"a": 1.25, "b": 0.75, "k": 0.4}},
    {"generator": "poisson-harmonic", "params": {"q": 0.1}},
    {"generator": "polygon-pseudo-harmonic", "params": {"angles": [1.5], "prevertices": [0.0],
                                                        "r_fraction": 0.25}},
    {"generator": "ahlfors-weill", "params": {"phi": [0.8]}},
    {"generator": "pseudo-harmonic", "params": {"psi": [0.2, [0, 0.1]],
                                                "domain": {"kind": "unit-disk"}}},
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s["generator"])
def test_registry_builds_and_rebuilds(spec):
    mu = co.build_coefficient(spec)
    assert mu.generator == spec["generator"]
    again = co.build_coefficient({"generator": mu.generator, "params": mu.params})
    z = geo.sample_interior(mu.support, 20, seed=2)
    assert np.allclose(mu.func(z), again.func(z))
    assert set(spec["generator"] for spec in SPECS) == set(co.GENERATORS)


def test_registry_errors():
    with pytest.raises(SchemaError, match="registered: .*constant-disk"):
        co.build_coefficient({"generator": "nope"})
    with pytest.raises(SchemaError):
        co.build_coefficient({"generator": "constant-disk", "params": {}})
    with pytest.raises(SchemaError):
        co.build_coefficient([1, 2])


def test_affine_compose_identity_case():
    mu = co.constant_disk(0.3)
    sol = bt.solve(mu, 512, 4.0)
    out = co.affine_compose(mu, 0.3, sol)
    z = geo.sample_interior(geo.unit_disk(), 200, seed=5)
    assert np.all(out.func(z) == 0)
    assert out.sup_norm == 0
    with pytest.raises(ResolutionError):
        co.affine_compose(mu, 0.3, bt.solve(mu, 64, 4.0))


@pytest.mark.parametrize("spec", SPECS[1:], ids=lambda s: s["generator"])
def test_reported_sup_matches_dense_sampling(spec):
    mu = co.build_coefficient(spec)
    z = geo.sample_interior(mu.support, 20000, seed=8)
    dense = float(np.max(np.abs(mu.func(z))))
    assert dense <= mu.sup_norm + 1e-6
    assert mu.sup_norm - dense <= 1e-2


@pytest.mark.parametrize("mu", [example1(), co.ellipse_ramp(1.25, 0.75, 0.4, x_c=0.2),
                                co.example4(q=0.0)], ids=["rectangle", "ellipse", "harmonic"])
def test_vanishing_on_declared_arc(mu):
    dom = mu.support
    z0, z1 = mu.arc
    if dom.kind == "unit-disk":
        t0, t1 = np.angle(z0), np.angle(z1) % (2 * np.pi)
        t = np.linspace(t0, t1, 50)
        pts = (1 - 1e-3) * np.exp(1j * t)
    elif dom.kind == "rectangle":
        pts = 1e-3 + 1j * np.linspace(0, dom.params["b"], 50)
    else:
        a, b = dom.params["a"], dom.params["b"]
        t = np.linspace(np.pi / 2, 3 * np.pi / 2, 50)
        pts = (1 - 1e-3) * (a * np.cos(t) + 1j * b * np.sin(t))
    assert np.max(np.abs(mu.func(pts))) <= 1e-3


def test_poisson_mean_value_on_interior_circles():
    mu = co.example4(q=0.1)
    t = 2 * np.pi * np.arange(512) / 512
    centre = 0.2 - 0.3j
    for rad in (0.1, 0.4):
        ring = mu.func(centre + rad * np.exp(1j * t)).mean()
        assert abs(ring - mu.func(np.array([centre]))[0]) < 1e-6


def test_ahlfors_weill_equals_pseudo_harmonic_form():
    c = np.array([0.3, -0.2j, 0.1])
    phi = lambda w: np.polynomial.polynomial.polyval(w, c)
    aw = co.ahlfors_weill(phi)
    # psi(z) = -(1/2) conj(phi(1/conj z)) / z^4 is holomorphic on the exterior disk
    psi = lambda z: -0.5 * np.polynomial.polynomial.polyval(1 / z, np.conj(c)) / z ** 4
    ph = co.pseudo_harmonic_general(psi, geo.exterior_disk())
    z = geo.sample_interior(geo.exterior_disk(), 300, seed=12)
    assert np.allclose(aw.func(z), ph.func(z), atol=1e-10, rtol=0)
