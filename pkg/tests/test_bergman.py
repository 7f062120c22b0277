import numpy as np
import pytest

from bergweight import bergman as bg
from bergweight import hermitian as hm
from bergweight import filtrations as flt
from bergweight.errors import DimensionMismatch, QuadratureUnderResolved
from bergweight.sections import (
    MetricPotential,
    PointP1,
    QuadratureRule,
    SectionSpace,
    evaluate_sections,
    hilb_fs_closed_form,
)

U0 = MetricPotential.zero()


def fs(k):
    return hilb_fs_closed_form(k)


# --- diagonal and off-diagonal kernels ---------------------------------


def test_round_kernel_is_constant():
    for k in (1, 4, 16):
        norm = fs(k)
        for s in (0.0, 0.3, 0.8, 1.0):
            x = PointP1.from_moment(s, theta=0.4)
            assert bg.bergman_diag(k, norm, U0, x) == pytest.approx(
                k + 1, rel=1e-12)


def test_degree_zero_kernel():
    x = PointP1.from_moment(0.5)
    assert bg.bergman_diag(0, fs(0), U0, x) == pytest.approx(1.0)


def test_offdiag_antipodal_and_symmetric():
    k = 6
    norm = fs(k)
    x, y = PointP1.of(1, 0), PointP1.of(0, 1)
    assert bg.bergman_offdiag_sq(k, norm, U0, x, y) == pytest.approx(0.0)
    z = PointP1.from_moment(0.37, theta=1.1)
    w = PointP1.from_moment(0.81, theta=-0.3)
    assert bg.bergman_offdiag_sq(k, norm, U0, z, w) == pytest.approx(
        bg.bergman_offdiag_sq(k, norm, U0, w, z), rel=1e-12)
    assert bg.bergman_offdiag_sq(k, norm, U0, z, z) == pytest.approx(
        bg.bergman_diag(k, norm, U0, z) ** 2, rel=1e-12)


def test_offdiag_cauchy_schwarz():
    rng = np.random.default_rng(4)
    k = 5
    norm = fs(k)
    for _ in range(10):
        x = PointP1.from_moment(rng.uniform(), theta=rng.uniform(0, 6))
        y = PointP1.from_moment(rng.uniform(), theta=rng.uniform(0, 6))
        lhs = bg.bergman_offdiag_sq(k, norm, U0, x, y)
        rhs = bg.bergman_diag(k, norm, U0, x) * bg.bergman_diag(k, norm, U0, y)
        assert lhs <= rhs + 1e-10


def test_kernel_reproduction_identity():
    # B(x, x) = integral of |B(x, y)|^2 dvol(y)
    k = 8
    norm = fs(k)
    x = PointP1.from_moment(0.42, theta=0.7)
    rule = QuadratureRule.gauss_legendre(64)
    n_ang = 4 * (k + 1)
    total = 0.0
    for s, w in zip(rule.nodes, rule.weights):
        ang = np.mean([
            bg.bergman_offdiag_sq(k, norm, U0, x,
                                  PointP1.from_moment(float(s), th))
            for th in 2 * np.pi * np.arange(n_ang) / n_ang])
        total += w * ang
    assert total == pytest.approx(bg.bergman_diag(k, norm, U0, x), abs=1e-8)


# --- peak sections ------------------------------------------------------


def test_peak_section_at_coordinate_point():
    k = 2
    peak = bg.peak_section(k, fs(k), U0, PointP1.of(1, 0))
    assert np.allclose(peak, [1, 0, 0], atol=1e-14)
    assert np.linalg.norm(peak) == pytest.approx(1.0)


def test_peak_value_is_sqrt_of_kernel():
    k = 7
    norm = fs(k)
    x = PointP1.from_moment(0.6, theta=0.2)
    peak = bg.peak_section(k, norm, U0, x)
    v = bg._onb_values(norm, x)
    val = abs(np.dot(v, peak))
    assert val**2 == pytest.approx(bg.bergman_diag(k, norm, U0, x), rel=1e-12)


def test_peak_product_norm_closed_form():
    # product of round unit peaks at (1, 0) is x^(k+l) / (|x^k| |x^l|);
    # its norm is sqrt((k+1)(l+1)/(k+l+1))
    for k, l in [(2, 3), (8, 8)]:
        norm = fs(k + l)
        coeff = np.zeros(k + l + 1, dtype=complex)
        coeff[0] = np.sqrt((k + 1) * (l + 1))
        assert norm.norm_of(coeff) == pytest.approx(
            np.sqrt((k + 1) * (l + 1) / (k + l + 1)), rel=1e-12)


# --- weighted kernels ---------------------------------------------------


def test_weighted_kernel_with_trivial_weight():
    k = 5
    norm = fs(k)
    filt = flt.VanishingOrderFiltration(1, "scaled-cap").flag_at(k)
    x = PointP1.from_moment(0.3)
    assert bg.weighted_bergman(filt, lambda t: 1.0, k, norm, U0, x) == \
        pytest.approx(bg.bergman_diag(k, norm, U0, x), rel=1e-12)


def test_weighted_kernel_closed_form_round_metric():
    # scaled-cap weights on O(1): g = id keeps every monomial except y^k,
    # so the kernel is (k+1)(1 - (1-s)^k)
    k = 6
    norm = fs(k)
    filt = flt.VanishingOrderFiltration(1, "scaled-cap").flag_at(k)
    for s in (0.0, 0.2, 0.5, 0.9):
        x = PointP1.from_moment(s)
        got = bg.weighted_bergman(filt, lambda t: t, k, norm, U0, x)
        assert got == pytest.approx((k + 1) * (1 - (1 - s) ** k), abs=1e-10)


def test_weighted_kernel_agrees_with_adapted_basis_sum():
    # dual route: direct sum over an adapted orthonormal basis
    rng = np.random.default_rng(19)
    k = 4
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    norm = hm.make_norm(a @ a.conj().T + 0.5 * np.eye(5),
                        basis_label=SectionSpace(4).basis_label())
    filt = hm.Filtration.from_diagonal([4.0, 4.0, 2.0, 1.0, 0.0])
    g = lambda t: t**2 + 0.3
    basis, w = hm.adapted_basis(filt, norm)
    for s in (0.1, 0.55, 0.95):
        x = PointP1.from_moment(s, theta=0.9)
        e = evaluate_sections(SectionSpace(k), x)
        direct = float(np.sum(g(w / k) * np.abs(e @ basis) ** 2))
        got = bg.weighted_bergman(filt, g, k, norm, U0, x)
        assert got == pytest.approx(direct, rel=1e-10)


# --- diagonal kernels of operators and Toeplitz operators ---------------


def test_diagonal_kernel_alternating_closed_form():
    k = 9
    norm = fs(k)
    signs = (-1.0) ** (k - np.arange(k + 1))  # (-1)^xpower in basis order
    op = hm.OperatorOnSections(matrix=np.diag(signs).astype(complex),
                               reference_norm=norm)
    for s in (0.0, 0.25, 0.5, 0.8):
        x = PointP1.from_moment(s)
        got = bg.diagonal_kernel(op, k, norm, U0, x)
        assert got == pytest.approx((k + 1) * (1 - 2 * s) ** k, abs=1e-9)


def test_diagonal_kernel_dimension_check():
    op = hm.OperatorOnSections(matrix=np.eye(3, dtype=complex),
                               reference_norm=fs(2))
    with pytest.raises(DimensionMismatch):
        bg.diagonal_kernel(op, 3, fs(3), U0, PointP1.from_moment(0.5))


def test_diagonal_kernel_contraction_bound():
    # |T(x)| <= ||T|| * B(x) = (k+1) ||T|| for the round metric
    rng = np.random.default_rng(23)
    for k in (2, 8, 16):
        norm = fs(k)
        for _ in range(30):
            m = rng.normal(size=(k + 1, k + 1)) + 1j * rng.normal(
                size=(k + 1, k + 1))
            m = (m + m.conj().T) / 2
            m /= np.linalg.norm(m, ord=2)
            op = hm.OperatorOnSections(matrix=m, reference_norm=norm)
            x = PointP1.from_moment(rng.uniform(), theta=rng.uniform(0, 6))
            assert abs(bg.diagonal_kernel(op, k, norm, U0, x)) <= k + 1 + 1e-9


def test_toeplitz_of_one_is_identity():
    k = 6
    rule = QuadratureRule.gauss_legendre(64)
    t = bg.toeplitz_matrix(lambda s: np.ones_like(s), k, fs(k), U0, rule)
    assert np.allclose(t.matrix, np.eye(k + 1), atol=1e-13)


def test_toeplitz_moment_symbol_beta_diagonal():
    # f(s) = s against the round metric: diagonal (i+1)/(k+2) in x-power i
    k = 5
    rule = QuadratureRule.gauss_legendre(64)
    t = bg.toeplitz_matrix(lambda s: s, k, fs(k), U0, rule)
    i = np.arange(k, -1, -1)
    assert np.allclose(t.matrix, np.diag((i + 1) / (k + 2)), atol=1e-13)


def test_toeplitz_spectrum_within_symbol_range():
    k = 12
    rule = QuadratureRule.gauss_legendre(128)
    u = MetricPotential.moment_linear(0.2)
    f = lambda s: 0.5 + 0.4 * np.sin(3 * s)
    from bergweight.sections import hilb_quadrature
    norm = hilb_quadrature(k, u, rule)
    t = bg.toeplitz_matrix(f, k, norm, u, rule)
    ev = np.linalg.eigvalsh(t.matrix)
    assert ev.min() >= 0.1 - 1e-10 and ev.max() <= 0.9 + 1e-10


def test_toeplitz_quadrature_self_check():
    k = 4
    kinked = lambda s: np.abs(s - 0.5)
    coarse = QuadratureRule.gauss_legendre(3)
    with pytest.raises(QuadratureUnderResolved):
        bg.toeplitz_matrix(kinked, k, fs(k), U0, coarse, check_tol=1e-12)
    split = QuadratureRule.gauss_legendre(16, breakpoints=(0.5,))
    t = bg.toeplitz_matrix(kinked, k, fs(k), U0, split, check_tol=1e-12)
    assert t.matrix.shape == (k + 1, k + 1)


def test_symbol_distance_zero_for_matching_operator():
    k = 6
    rule = QuadratureRule.gauss_legendre(64)
    f = lambda s: 1 + 0.5 * s
    t = bg.toeplitz_matrix(f, k, fs(k), U0, rule)
    assert bg.symbol_distance(t, f, k, fs(k), U0, 2, rule) <= 1e-13
    assert bg.symbol_distance(t, lambda s: np.ones_like(s), k, fs(k), U0,
                              float("inf"), rule) == pytest.approx(
        0.5 * (k + 1) / (k + 2), abs=1e-12)


def test_trace_and_spectral_measure():
    norm = fs(2)
    op = hm.OperatorOnSections(matrix=np.diag([3.0, 1.0, -1.0]).astype(complex),
                               reference_norm=norm)
    assert bg.trace_of(op) == pytest.approx(3.0)
    mu = bg.spectral_measure(op)
    assert np.allclose(mu.locations, [-1.0, 1.0, 3.0])
    assert np.allclose(mu.masses, 1 / 3)


# --- measures -----------------------------------------------------------


def test_pushforward_of_moment_coordinate_is_uniform():
    mu = bg.pushforward_measure(lambda s: s, U0)
    assert mu.total == pytest.approx(1.0)
    for t in (0.1, 0.5, 0.9):
        assert mu.cdf(t) == pytest.approx(t, abs=1e-3)


def test_jumping_measure_approaches_symbol_pushforward():
    # hard-cap on O(2): normalized weights distribute like min(2s, 1)
    # under the round volume
    k = 256
    jm = flt.jumping_measure(flt.VanishingOrderFiltration(2, "hard-cap"), k)
    pf = bg.pushforward_measure(lambda s: np.minimum(2 * s, 1.0),
                                MetricPotential.zero(d=2))
    assert flt.kolmogorov_distance(jm, pf) <= 0.01


# --- Fubini-Study ratios -------------------------------------------------


def test_fs_ratio_scaling_and_identity():
    k = 5
    na = fs(k)
    nb = hm.make_norm(np.e * na.gram, basis_label=na.basis_label)
    x = PointP1.from_moment(0.4)
    assert bg.fs_ratio(na, na, x) == pytest.approx(1.0)
    assert bg.fs_ratio(na, nb, x) == pytest.approx(1 / np.e, rel=1e-12)


def test_fs_ratio_along_geodesic_ray_closed_form():
    # ray from the round norm driven by the scaled-cap weights: the
    # kernel ratio is 1 / (e^(tk) + (1 - e^(tk))(1 - s)^k)
    k, t = 4, 0.3
    norm = fs(k)
    filt = flt.VanishingOrderFiltration(1, "scaled-cap").flag_at(k)
    moved = hm.geodesic_ray_filtration(norm, filt, t)
    for s in (0.0, 0.3, 0.7, 1.0):
        x = PointP1.from_moment(s)
        got = bg.fs_ratio(moved, norm, x)
        expect = 1.0 / (np.exp(t * k) + (1 - np.exp(t * k)) * (1 - s) ** k)
        assert got == pytest.approx(expect, rel=1e-10)
