import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from bergweight import sections as sec
from bergweight.errors import (
    DimensionMismatch,
    InvalidParams,
    NonPositiveVolume,
    NotConvex,
    NotRotationInvariant,
)


# --- points and evaluation -------------------------------------------


def test_point_normalization():
    x = sec.PointP1.of(-2.0, 2.0j)
    assert abs(x.a) ** 2 + abs(x.b) ** 2 == pytest.approx(1.0)
    assert x.a.imag == pytest.approx(0.0) and x.a.real > 0
    assert x.b == pytest.approx(-1j / np.sqrt(2))


def test_point_rejects_origin_and_bad_moment():
    with pytest.raises(InvalidParams):
        sec.PointP1.of(0, 0)
    with pytest.raises(InvalidParams):
        sec.PointP1.from_moment(1.5)


def test_evaluate_at_coordinate_points():
    space = sec.SectionSpace(4)
    e0 = sec.evaluate_sections(space, sec.PointP1.of(1, 0))
    assert np.allclose(e0, [1, 0, 0, 0, 0])
    e1 = sec.evaluate_sections(space, sec.PointP1.of(0, 1))
    assert np.allclose(e1, [0, 0, 0, 0, 1])
    mid = sec.evaluate_sections(space, sec.PointP1.from_moment(0.5))
    assert np.allclose(np.abs(mid), (0.5**2) * np.ones(5))


def test_moment_coordinate_roundtrip():
    for s in (0.0, 0.3, 1.0):
        assert sec.PointP1.from_moment(s).s == pytest.approx(s)


# --- multiplication map ----------------------------------------------


def test_multiplication_matrix_shape_and_entries():
    p = sec.multiplication_matrix(1, 1)
    assert p.shape == (3, 4)
    assert np.allclose(p.sum(axis=0), 1.0)  # one target per tensor monomial
    assert p[1, 1] == 1.0 and p[1, 2] == 1.0  # xy from both factor orders
    assert np.linalg.matrix_rank(p) == 3


def test_multiplication_compatible_with_evaluation():
    rng = np.random.default_rng(2)
    for k, l in [(1, 1), (2, 3), (4, 4)]:
        p = sec.multiplication_matrix(k, l)
        for _ in range(5):
            x = sec.PointP1.of(rng.normal() + 1j * rng.normal(),
                               rng.normal() + 1j * rng.normal())
            ek = sec.evaluate_sections(sec.SectionSpace(k), x)
            el = sec.evaluate_sections(sec.SectionSpace(l), x)
            ekl = sec.evaluate_sections(sec.SectionSpace(k + l), x)
            assert np.allclose(ekl @ p, np.kron(ek, el), atol=1e-12)


# --- quadrature rules -------------------------------------------------


def test_gauss_legendre_weights_sum_to_one():
    rule = sec.QuadratureRule.gauss_legendre(32)
    assert rule.weights.sum() == pytest.approx(1.0)
    split = sec.QuadratureRule.gauss_legendre(16, breakpoints=(0.5,))
    assert split.weights.sum() == pytest.approx(1.0)
    assert split.nodes.size == 32


def test_refined_doubles_order_and_keeps_breakpoints():
    rule = sec.QuadratureRule.gauss_legendre(16, breakpoints=(0.25, 0.5))
    fine = rule.refined()
    assert fine.order == 32
    assert fine.breakpoints == rule.breakpoints


def test_breakpoint_exactness_on_kinked_integrand():
    rule = sec.QuadratureRule.gauss_legendre(8, breakpoints=(0.5,))
    val = rule.weights @ np.abs(rule.nodes - 0.5)
    assert val == pytest.approx(0.25, abs=1e-14)


# --- metric potentials ------------------------------------------------


def test_constant_potential_profile():
    u = sec.MetricPotential.constant(0.3, d=2)
    assert u.rotation_invariant and u.smooth_profile
    assert u.at_s(0.7) == pytest.approx(0.3)
    assert np.allclose(u.curvature_density([0.1, 0.9]), 2.0)


def test_moment_linear_density_mass():
    u = sec.MetricPotential.moment_linear(0.4, d=1)
    rule = sec.QuadratureRule.gauss_legendre(16)
    mass = rule.weights @ u.curvature_density(rule.nodes)
    assert mass == pytest.approx(1.0)


def test_radial_samples_interpolates():
    s = np.linspace(0, 1, 101)
    u = sec.MetricPotential.radial_samples(s, 0.2 * s**2)
    assert u.at_s(0.5) == pytest.approx(0.05, abs=1e-4)
    assert u.dprofile(0.5) == pytest.approx(0.2, abs=1e-6)
    with pytest.raises(InvalidParams):
        sec.MetricPotential.radial_samples([0, 1], [0, 0])


def test_potential_json_roundtrip():
    for u in (sec.MetricPotential.constant(0.2, d=3),
              sec.MetricPotential.moment_linear(-0.1, d=1),
              sec.MetricPotential.radial_samples(
                  np.linspace(0, 1, 5), [0, 1, 0, 1, 0], d=2)):
        v = sec.MetricPotential.from_json(u.to_json())
        assert v.d == u.d and v.kind == u.kind
        assert np.allclose(v.at_s([0.0, 0.5, 1.0]), u.at_s([0.0, 0.5, 1.0]))
    with pytest.raises(InvalidParams):
        sec.MetricPotential.from_json({"type": "nope"})


def test_function_potential_not_invariant():
    u = sec.MetricPotential.from_function(lambda x: abs(x.a), 1.0)
    assert not u.rotation_invariant
    with pytest.raises(NotRotationInvariant):
        u.at_s(0.5)


# --- Gram matrices ----------------------------------------------------


def test_round_gram_closed_forms():
    assert np.allclose(sec.hilb_fs_closed_form(0).gram, [[1.0]])
    assert np.allclose(sec.hilb_fs_closed_form(1).gram, np.diag([0.5, 0.5]))
    assert np.allclose(sec.hilb_fs_closed_form(2).gram,
                       np.diag([1 / 3, 1 / 6, 1 / 3]))


def test_round_gram_closed_form_large_degree():
    # gamma-function branch must agree with factorials at the crossover
    g150 = sec.hilb_fs_closed_form(150).gram
    g151 = np.diag(sec.hilb_fs_closed_form(151).gram).real
    # ratio identity: diag_{m+1}[0] / diag_m[0] = (m+1)/(m+2)
    assert g151[0] / g150[0, 0].real == pytest.approx(151 / 152, rel=1e-12)


def test_quadrature_matches_closed_form_round_metric():
    rule = sec.QuadratureRule.gauss_legendre(256)
    u = sec.MetricPotential.zero()
    for k in (1, 8, 64):
        num = sec.hilb_quadrature(k, u, rule)
        ref = sec.hilb_fs_closed_form(k)
        assert num.meta["volume"] == "curvature"
        assert np.allclose(num.gram, ref.gram, rtol=1e-10, atol=0)


def test_constant_potential_rescales_gram():
    rule = sec.QuadratureRule.gauss_legendre(64)
    u = sec.MetricPotential.constant(0.3)
    k = 5
    num = sec.hilb_quadrature(k, u, rule)
    ref = sec.hilb_fs_closed_form(k)
    assert np.allclose(num.gram, np.exp(-0.3 * k) * ref.gram, rtol=1e-12)


def test_quadrature_converged_for_smooth_potential():
    u = sec.MetricPotential.moment_linear(0.1)
    coarse = sec.hilb_quadrature(6, u, sec.QuadratureRule.gauss_legendre(64))
    fine = sec.hilb_quadrature(6, u, sec.QuadratureRule.gauss_legendre(512))
    assert np.max(np.abs(coarse.gram - fine.gram)) <= 1e-9


def test_background_route_flagged_and_consistent():
    u = sec.MetricPotential.from_function(lambda x: 0.3, 0.3)
    k = 3
    num = sec.hilb_quadrature(k, u, sec.QuadratureRule.gauss_legendre(64))
    assert num.meta["volume"] == "background"
    ref = sec.hilb_fs_closed_form(k)
    assert np.allclose(num.gram, np.exp(-0.3 * k) * ref.gram, rtol=1e-10,
                       atol=1e-14)


def test_nonpositive_curvature_volume_raises():
    u = sec.MetricPotential.moment_linear(1.5, d=1)
    with pytest.raises(NonPositiveVolume):
        sec.hilb_quadrature(2, u, sec.QuadratureRule.gauss_legendre(32))


# --- Legendre-transform symbol ----------------------------------------


def test_phi_vanishes_for_equal_metrics():
    u = sec.MetricPotential.moment_linear(0.2)
    phi = sec.toric_geodesic_phi(u, u)
    assert np.max(np.abs(phi.at_s(np.linspace(0, 1, 50)))) <= 1e-10


def test_phi_constant_shift():
    u0 = sec.MetricPotential.zero()
    u1 = sec.MetricPotential.constant(0.7)
    phi = sec.toric_geodesic_phi(u0, u1)
    s = np.linspace(0, 1, 50)
    assert np.max(np.abs(phi.at_s(s) - 0.7)) <= 1e-10


def _conjugate(u, sigma):
    f = lambda t: -(sigma * t - (u.d * np.logaddexp(0.0, t)
                                 + float(u.at_s(1 / (1 + np.exp(-t))))))
    res = minimize_scalar(f, bounds=(-60, 60), method="bounded",
                          options={"xatol": 1e-12})
    return -res.fun


def test_phi_against_direct_optimization():
    u0 = sec.MetricPotential.zero()
    u1 = sec.MetricPotential.moment_linear(0.4)
    phi = sec.toric_geodesic_phi(u0, u1)
    for s in (0.1, 0.3, 0.5, 0.7, 0.9):
        sigma = 1.0 * s  # moment map of the round metric, d = 1
        expected = _conjugate(u0, sigma) - _conjugate(u1, sigma)
        assert phi.at_s(s) == pytest.approx(expected, abs=1e-4)


def test_phi_sup_bound():
    u0 = sec.MetricPotential.moment_linear(-0.2, d=2)
    u1 = sec.MetricPotential.moment_linear(0.3, d=2)
    phi = sec.toric_geodesic_phi(u0, u1)
    sup_diff = 0.5  # sup |u1 - u0| over the moment interval
    s = np.linspace(0, 1, 200)
    assert np.max(np.abs(phi.at_s(s))) <= sup_diff + 1e-6


def test_phi_rejects_nonconvex_and_mismatched():
    s = np.linspace(0, 1, 201)
    bumpy = sec.MetricPotential.radial_samples(s, 4 * s * (1 - s))
    u0 = sec.MetricPotential.zero()
    with pytest.raises(NotConvex):
        sec.toric_geodesic_phi(u0, bumpy)
    with pytest.raises(DimensionMismatch):
        sec.toric_geodesic_phi(sec.MetricPotential.zero(d=1),
                               sec.MetricPotential.zero(d=2))
    with pytest.raises(NotRotationInvariant):
        sec.toric_geodesic_phi(
            u0, sec.MetricPotential.from_function(lambda x: 0.0, 0.0))
