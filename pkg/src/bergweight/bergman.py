"""Bergman kernels, Toeplitz operators and spectral measures on P^1.

All kernels are taken relative to a Hilbert norm on H^0(O(m)) given by
its Gram matrix in the monomial basis, together with the potential u of
the underlying metric on O(d) (k-th tensor power, m = k*d).  Pointwise
quantities carry the metric frame factor e^(-k*u(x)).
"""

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    NotRotationInvariant,
    QuadratureUnderResolved,
    ZeroKernel,
)
from .filtrations import DiscreteMeasure
from .hermitian import (
    OperatorOnSections,
    cholesky_factor,
    functional_calculus,
    schatten_norm,
    weight_operator,
)
from .sections import SectionSpace, evaluate_sections


def _space_of(norm):
    return SectionSpace(norm.dim - 1)


def _onb_values(norm, x):
    """Vector v with v_i = value of the i-th orthonormal basis section
    at x (against the round unit frame)."""
    e = evaluate_sections(_space_of(norm), x)
    c = cholesky_factor(norm)
    return np.conj(sla.solve_triangular(c, np.conj(e), lower=True))


def bergman_diag(k, norm, u, x):
    """On-diagonal Bergman kernel: sum of |s_i(x)|^2 over an orthonormal
    basis, in the metric e^(-ku) * round^(kd)."""
    v = _onb_values(norm, x)
    return float(np.exp(-k * u(x)) * np.vdot(v, v).real)


def bergman_offdiag_sq(k, norm, u, x, y):
    """|B(x, y)|^2, the squared pointwise norm of the off-diagonal kernel."""
    vx = _onb_values(norm, x)
    vy = _onb_values(norm, y)
    return float(np.exp(-k * (u(x) + u(y))) * abs(np.vdot(vy, vx)) ** 2)


def peak_section(k, norm, u, x):
    """Coefficients, in the orthonormal basis, of the unit section with
    the largest value at x; the value there is positive real."""
    v = _onb_values(norm, x)
    nv = np.linalg.norm(v)
    if nv <= 1e-300:
        raise ZeroKernel(f"Bergman kernel vanishes at ({x.a}, {x.b})")
    return np.conj(v) / nv


def weighted_bergman(filt_flag, g, k, norm, u, x):
    """Weighted kernel: sum of g(w_i / k) |s_i(x)|^2 over an adapted
    orthonormal basis of weights w_i, equal to the diagonal kernel of
    g(A/k) for the weight operator A of the filtration."""
    a = weight_operator(filt_flag, norm)
    ga = functional_calculus(a, lambda t: g(t / k))
    return diagonal_kernel(ga, k, norm, u, x)


def diagonal_kernel(op, k, norm, u, x):
    """Diagonal kernel T(x) of an operator given in orthonormal
    coordinates of the norm."""
    if op.reference_norm is not norm and op.reference_norm.dim != norm.dim:
        raise DimensionMismatch("operator does not act on this space")
    v = _onb_values(norm, x)
    val = np.vdot(v, op.matrix @ v)
    return float(np.exp(-k * u(x)) * val.real)


def trace_of(op):
    return float(np.trace(op.matrix).real)


def _radial_toeplitz_gram(f, k, u, rule, m):
    """Pairing matrix integral of f * val_i * conj(val_j) e^(-ku) dvol for
    a rotation-invariant symbol (diagonal)."""
    s = rule.nodes
    dens = np.asarray(u.curvature_density(s), dtype=float)
    wts = rule.weights * dens * f(s) * np.exp(-k * u.at_s(s))
    log_s = np.log(np.clip(s, 1e-300, None))
    log_1ms = np.log(np.clip(1.0 - s, 1e-300, None))
    i = np.arange(m + 1)
    vals = np.exp(np.outer(i, log_s) + np.outer(m - i, log_1ms))
    diag = vals @ wts
    order = np.arange(m, -1, -1)  # basis order: decreasing x-power
    return np.diag(diag[order]).astype(complex)


def toeplitz_matrix(f, k, norm, u, rule, check_tol=None):
    """Toeplitz operator of a rotation-invariant symbol f(s), compressed
    to H^0(O(kd)) with the given Hilbert norm; matrix in orthonormal
    coordinates.

    When check_tol is set, the assembly is repeated with a refined rule
    and QuadratureUnderResolved is raised if entries move by more."""
    if not (u.rotation_invariant and u.smooth_profile):
        raise NotRotationInvariant("Toeplitz assembly needs a smooth radial potential")
    m = norm.dim - 1
    pair = _radial_toeplitz_gram(f, k, u, rule, m)
    if check_tol is not None:
        pair2 = _radial_toeplitz_gram(f, k, u, rule.refined(), m)
        gap = float(np.max(np.abs(pair - pair2)))
        if gap > check_tol:
            raise QuadratureUnderResolved(
                f"Toeplitz entries moved by {gap:.3e} under refinement")
    c = cholesky_factor(norm)
    y = sla.solve_triangular(c, pair, lower=True)
    t = sla.solve_triangular(c, y.conj().T, lower=True).conj().T
    t = (t + t.conj().T) / 2
    return OperatorOnSections(matrix=t, reference_norm=norm)


def symbol_distance(op, f, k, norm, u, p, rule):
    """Schatten p-distance between an operator and the Toeplitz operator
    of the symbol f."""
    t = toeplitz_matrix(f, k, norm, u, rule)
    diff = OperatorOnSections(matrix=op.matrix - t.matrix, reference_norm=norm,
                              hermitian=op.hermitian)
    return schatten_norm(diff, p)


def spectral_measure(op):
    """Uniform-weight spectral measure (1/dim per eigenvalue)."""
    w = np.linalg.eigvalsh((op.matrix + op.matrix.conj().T) / 2)
    return DiscreteMeasure(locations=np.sort(w),
                           masses=np.full(w.size, 1.0 / w.size))


def pushforward_measure(f, u, resolution=4096):
    """Pushforward of the normalized curvature volume of e^(-u)*round^d
    under a rotation-invariant function f(s), as a discrete measure."""
    s = (np.arange(resolution) + 0.5) / resolution
    dens = np.asarray(u.curvature_density(s), dtype=float) / u.d
    masses = dens / resolution
    locs = np.asarray(f(s), dtype=float)
    order = np.argsort(locs)
    return DiscreteMeasure(locations=locs[order], masses=masses[order])


def fs_ratio(norm_a, norm_b, x):
    """Ratio FS(norm_a)/FS(norm_b) of induced Fubini-Study metrics at x,
    i.e. the Bergman kernel of norm_b over that of norm_a (frame factors
    cancel)."""
    va = _onb_values(norm_a, x)
    vb = _onb_values(norm_b, x)
    den = np.vdot(va, va).real
    if den <= 1e-300:
        raise ZeroKernel("reference Bergman kernel vanishes")
    return float(np.vdot(vb, vb).real / den)
