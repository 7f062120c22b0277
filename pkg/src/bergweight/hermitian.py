"""Hermitian norms on finite-dimensional complex vector spaces.

A norm is stored as its Gram matrix in a fixed reference basis.  The
module provides the geodesic structure of the space of norms (transfer
maps, geodesics, geodesic rays driven by a filtration), weight operators
of filtrations, Schatten norms, functional calculus, quotient norms and
the Cholesky-based stability bound for weight operators.

Conventions
-----------
* inner product: <u, v>_H = v^H G u  (linear in the first argument);
* orthonormal coordinates: with G = C C^H the lower Cholesky
  factorization, a vector v in reference coordinates has orthonormal
  coordinates C^H v, and an operator A has matrix C^H A C^{-H};
* all operator matrices returned here live in the orthonormal
  coordinates of their reference norm.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    DegenerateFlag,
    DimensionMismatch,
    InvalidP,
    NotHermitian,
    NotPositiveDefinite,
    RankDeficient,
)

HERMITIAN_TOL = 1e-12


def _as_complex(m):
    return np.asarray(m, dtype=complex)


def _hermitian_part(m, tol=HERMITIAN_TOL, what="matrix"):
    """Return (m + m^H)/2, raising NotHermitian beyond relative tol."""
    m = _as_complex(m)
    scale = max(1.0, np.linalg.norm(m))
    asym = np.linalg.norm(m - m.conj().T)
    if asym > tol * scale:
        raise NotHermitian(f"{what} deviates from Hermitian by {asym:.3e}")
    return (m + m.conj().T) / 2


@dataclass(frozen=True)
class HermitianNorm:
    """A positive definite Hermitian form, as a Gram matrix."""

    gram: np.ndarray
    basis_label: str = "std"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.gram.shape[0]

    def norm_of(self, v):
        v = _as_complex(v)
        return float(np.sqrt((v.conj() @ self.gram @ v).real))

    def inner(self, u, v):
        """<u, v>: linear in u, conjugate-linear in v."""
        return complex(_as_complex(v).conj() @ self.gram @ _as_complex(u))


def make_norm(gram, basis_label="std", meta=None):
    """Validate a Gram matrix and wrap it as a HermitianNorm.

    Raises NotHermitian for an asymmetric input and NotPositiveDefinite
    when the smallest eigenvalue is <= 0.
    """
    g = _hermitian_part(gram, what="gram matrix")
    evals = np.linalg.eigvalsh(g)
    if evals[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {evals[0]:.3e}")
    return HermitianNorm(gram=g, basis_label=basis_label, meta=dict(meta or {}))


def cholesky_factor(norm):
    """Lower Cholesky factor C with gram = C C^H."""
    return np.linalg.cholesky(norm.gram)


def vector_to_onb(norm, v):
    return cholesky_factor(norm).conj().T @ _as_complex(v)


def operator_to_onb(norm, a_ref):
    """Reference-basis operator matrix -> orthonormal coordinates."""
    c = cholesky_factor(norm)
    return c.conj().T @ _as_complex(a_ref) @ np.linalg.inv(c).conj().T


def operator_from_onb(norm, a_onb):
    """Orthonormal-coordinate operator matrix -> reference basis."""
    c = cholesky_factor(norm)
    cinv = np.linalg.inv(c)
    return cinv.conj().T @ _as_complex(a_onb) @ c.conj().T


def _check_same_space(h0, h1):
    if h0.dim != h1.dim:
        raise DimensionMismatch(f"dims {h0.dim} != {h1.dim}")
    if h0.basis_label != h1.basis_label:
        raise DimensionMismatch(
            f"basis labels differ: {h0.basis_label!r} vs {h1.basis_label!r}"
        )


@dataclass(frozen=True)
class TransferMap:
    """Hermitian generator T of the geodesic from source to target.

    The matrix is expressed in source-orthonormal coordinates; the
    geodesic of Gram matrices is G_t = C exp(-t T) C^H where C is the
    Cholesky factor of the source.
    """

    matrix: np.ndarray
    source: HermitianNorm
    target: HermitianNorm


def _relative_matrix(h0, h1):
    """M = C^{-1} G_1 C^{-H} in h0-orthonormal coordinates (SPD)."""
    c = cholesky_factor(h0)
    y = sla.solve_triangular(c, h1.gram, lower=True)
    m = sla.solve_triangular(c, y.conj().T, lower=True).conj().T
    return _hermitian_part(m, tol=1e-10, what="relative gram")


def transfer_map(h0, h1):
    """Transfer map between two norms on the same space.

    Satisfies <exp(-T/2) u, exp(-T/2) v>_{h0} = <u, v>_{h1} for vectors
    in h0-orthonormal coordinates.
    """
    _check_same_space(h0, h1)
    m = _relative_matrix(h0, h1)
    w, u = np.linalg.eigh(m)
    t = u @ np.diag(-np.log(w)) @ u.conj().T
    return TransferMap(matrix=_hermitian_part(t, tol=1e-9), source=h0, target=h1)


def geodesic(h0, h1, t):
    """Point at time t on the geodesic of norms from h0 to h1."""
    _check_same_space(h0, h1)
    m = _relative_matrix(h0, h1)
    w, u = np.linalg.eigh(m)
    mt = u @ np.diag(w**t) @ u.conj().T
    c = cholesky_factor(h0)
    return make_norm(c @ mt @ c.conj().T, basis_label=h0.basis_label)


@dataclass(frozen=True)
class Filtration:
    """Decreasing filtration of C^n by a flag of subspaces.

    weights are strictly decreasing; flag[j] holds a basis (as columns,
    in reference coordinates) of the subspace of weight >= weights[j].
    The last flag level must be the whole space.  diagonal_weights, when
    set, gives the weight of each reference basis vector and marks the
    filtration as coordinate-diagonal.
    """

    weights: tuple
    flag: tuple
    diagonal_weights: np.ndarray | None = None

    @property
    def dim(self):
        return self.flag[-1].shape[0]

    @property
    def sup_norm(self):
        return float(max(abs(w) for w in self.weights))

    @classmethod
    def from_diagonal(cls, weights_per_vector):
        """Filtration diagonal in the reference basis."""
        w = np.asarray(weights_per_vector, dtype=float)
        n = w.size
        levels = sorted(set(w.tolist()), reverse=True)
        eye = np.eye(n, dtype=complex)
        flag = tuple(eye[:, w >= lvl] for lvl in levels)
        return cls(weights=tuple(levels), flag=flag, diagonal_weights=w)


def make_filtration(weights, flag):
    """Validate weights/flag data and build a Filtration."""
    weights = tuple(float(w) for w in weights)
    if len(weights) != len(flag):
        raise DimensionMismatch("one flag level per weight required")
    if any(a >= b for a, b in zip(weights[1:], weights[:-1])):
        raise DegenerateFlag("weights must be strictly decreasing")
    flag = tuple(_as_complex(f) for f in flag)
    n = flag[-1].shape[0]
    prev_dim = 0
    for f in flag:
        d = np.linalg.matrix_rank(f, tol=1e-10)
        if d != f.shape[1] or d <= prev_dim:
            raise DegenerateFlag("flag dimensions must strictly increase")
        prev_dim = d
    if prev_dim != n:
        raise DegenerateFlag("last flag level must span the whole space")
    for small, big in zip(flag[:-1], flag[1:]):
        q, _ = np.linalg.qr(big)
        resid = small - q @ (q.conj().T @ small)
        if np.linalg.norm(resid) > 1e-9 * max(1.0, np.linalg.norm(small)):
            raise DegenerateFlag("flag levels are not nested")
    return Filtration(weights=weights, flag=flag)


def filtration_weight(filt, v, tol=1e-10):
    """Weight of a vector: the largest level containing it."""
    v = _as_complex(v)
    if np.linalg.norm(v) == 0:
        return float("inf")
    for lvl, f in zip(filt.weights, filt.flag):
        q, _ = np.linalg.qr(f)
        resid = v - q @ (q.conj().T @ v)
        if np.linalg.norm(resid) <= tol * np.linalg.norm(v):
            return lvl
    raise DegenerateFlag("vector lies outside the last flag level")


def adapted_basis(filt, norm):
    """Orthonormal basis (for norm) compatible with the flag.

    Flag-compatible vectors are ordered by decreasing weight and
    orthonormalized by modified Gram-Schmidt in the given norm.  Returns
    (basis matrix with columns in reference coordinates, weight array).
    """
    n = norm.dim
    if filt.dim != n:
        raise DimensionMismatch(f"filtration dim {filt.dim} != norm dim {n}")
    if filt.diagonal_weights is not None:
        order = np.argsort(-filt.diagonal_weights, kind="stable")
        cols = np.eye(n, dtype=complex)[:, order]
        weights = filt.diagonal_weights[order]
    else:
        cols = np.zeros((n, 0), dtype=complex)
        weights = []
        q_span = np.zeros((n, 0), dtype=complex)
        for lvl, f in zip(filt.weights, filt.flag):
            for j in range(f.shape[1]):
                c = f[:, j]
                resid = c - q_span @ (q_span.conj().T @ c)
                if np.linalg.norm(resid) > 1e-10 * np.linalg.norm(c):
                    cols = np.column_stack([cols, c])
                    weights.append(lvl)
                    q_span = np.column_stack([q_span, resid / np.linalg.norm(resid)])
            if cols.shape[1] != f.shape[1]:
                raise DegenerateFlag("flag level does not extend the span")
        weights = np.array(weights)
    # Gram-Schmidt in the norm's inner product (with reorthogonalization)
    g = norm.gram
    basis = cols.astype(complex).copy()
    for j in range(n):
        b = basis[:, j]
        n0 = np.sqrt((b.conj() @ g @ b).real)
        for _ in range(2 if j else 0):
            b = b - basis[:, :j] @ (basis[:, :j].conj().T @ (g @ b))
        nj = np.sqrt((b.conj() @ g @ b).real)
        if nj <= 1e-12 * n0:
            raise DegenerateFlag("Gram-Schmidt breakdown: dependent flag vectors")
        basis[:, j] = b / nj
    return basis, np.asarray(weights, dtype=float)


@dataclass(frozen=True)
class OperatorOnSections:
    """An operator, as a matrix in orthonormal coordinates of a norm."""

    matrix: np.ndarray
    reference_norm: HermitianNorm
    hermitian: bool = True

    @property
    def dim(self):
        return self.matrix.shape[0]


def weight_operator(filt, norm):
    """Hermitian operator with the adapted basis as eigenvectors and the
    filtration weights as eigenvalues."""
    if len(filt.weights) == 1:
        w = filt.weights[0]
        return OperatorOnSections(
            matrix=w * np.eye(norm.dim, dtype=complex), reference_norm=norm
        )
    basis, w = adapted_basis(filt, norm)
    u = cholesky_factor(norm).conj().T @ basis  # unitary columns
    a = _hermitian_part(u @ np.diag(w) @ u.conj().T, tol=1e-10)
    return OperatorOnSections(matrix=a, reference_norm=norm)


def geodesic_ray_filtration(h0, filt, t):
    """Norm at time t on the geodesic ray exp(-t A(F, h0)) from h0."""
    a = weight_operator(filt, h0).matrix
    w, u = np.linalg.eigh(a)
    e = u @ np.diag(np.exp(-t * w)) @ u.conj().T
    c = cholesky_factor(h0)
    return make_norm(c @ e @ c.conj().T, basis_label=h0.basis_label)


def _abs_eigenvalues(op):
    if op.hermitian:
        return np.abs(np.linalg.eigvalsh(_hermitian_part(op.matrix)))
    return np.linalg.svd(op.matrix, compute_uv=False)


def schatten_norm(op, p):
    """Schatten p-norm, dimension-normalized for finite p.

    ||A||_p = ((1/dim) tr |A|^p)^(1/p); p = inf gives the operator norm
    (no normalization).
    """
    vals = _abs_eigenvalues(op)
    if p == float("inf") or p == "inf":
        return float(vals.max(initial=0.0))
    p = float(p)
    if p < 1:
        raise InvalidP(f"Schatten exponent {p} < 1")
    return float(np.mean(vals**p) ** (1.0 / p))


def functional_calculus(op, g):
    """Apply a scalar function to a Hermitian operator via eigendecomposition."""
    if not op.hermitian:
        raise NotHermitian("functional calculus needs a Hermitian operator")
    w, u = np.linalg.eigh(_hermitian_part(op.matrix))
    gw = np.array([float(g(x)) for x in w])
    m = _hermitian_part(u @ np.diag(gw) @ u.conj().T, tol=1e-10)
    return OperatorOnSections(matrix=m, reference_norm=op.reference_norm)


def _check_surjection(p, dim):
    p = _as_complex(p)
    q, n = p.shape
    if n != dim:
        raise DimensionMismatch(f"surjection has {n} columns, expected {dim}")
    if np.linalg.matrix_rank(p, tol=1e-10) < q:
        raise RankDeficient("surjection matrix is row-rank deficient")
    return p


def quotient_norm(norm, p):
    """Quotient norm induced on the image of a surjection P.

    The Gram matrix is (P G^{-1} P^H)^{-1}: the squared quotient norm of
    w is the minimum of |v|^2 over preimages v of w.
    """
    p = _check_surjection(p, norm.dim)
    x = np.linalg.solve(norm.gram, p.conj().T)
    s = _hermitian_part(p @ x, tol=1e-10)
    gq = np.linalg.inv(s)
    return make_norm(gq, basis_label=norm.basis_label + "/q")


def quotient_filtration(filt, p):
    """Pushforward filtration: level at weight w is P(F^w)."""
    p = _check_surjection(p, filt.dim)
    q_dim = p.shape[0]
    weights, flag = [], []
    prev = 0
    for lvl, f in zip(filt.weights, filt.flag):
        img = p @ f
        qmat, r, piv = sla.qr(img, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r)) if r.size else np.array([])
        rank = int(np.sum(diag > 1e-10 * max(1.0, diag.max(initial=0.0))))
        if rank > prev:
            weights.append(lvl)
            flag.append(qmat[:, :rank])
            prev = rank
    if prev != q_dim:
        raise RankDeficient("pushforward flag does not exhaust the quotient")
    return Filtration(weights=tuple(weights), flag=tuple(flag))


def restrict_to_quotient(op, p, norm):
    """Compress an operator to the quotient through a surjection P.

    op must be expressed in orthonormal coordinates of norm; the result
    is in orthonormal coordinates of the induced quotient norm.  The
    compression matrix has orthonormal rows, so the result of a
    Hermitian operator is Hermitian.
    """
    p = _check_surjection(p, norm.dim)
    hq = quotient_norm(norm, p)
    c = cholesky_factor(norm)
    cq = cholesky_factor(hq)
    p_on = cq.conj().T @ p @ np.linalg.inv(c).conj().T
    m = p_on @ op.matrix @ p_on.conj().T
    if op.hermitian:
        m = _hermitian_part(m, tol=1e-9)
    return OperatorOnSections(matrix=m, reference_norm=hq, hermitian=op.hermitian)


def operator_norm_between(h0, a0_onb, h1, a1_onb):
    """Operator norm (w.r.t. h0) of the difference of two operators given
    in the orthonormal coordinates of h0 and h1 respectively."""
    a1_ref = operator_from_onb(h1, a1_onb)
    a1_in_h0 = operator_to_onb(h0, a1_ref)
    return float(np.linalg.norm(a0_onb - a1_in_h0, ord=2))


def cholesky_stability_bound(filt, h0, h1):
    """A priori bound on the deviation of weight operators of F at two
    nearby norms, in terms of the orthonormal-coordinate deviation
    c = ||exp(-T) - Id|| of the transfer map.

    Returns (measured deviation, bound, applicable) where the bound
    16 c (1 + 2 ceil(log2 dim)) ||F|| holds whenever
    (1 + 2 ceil(log2 dim))^2 c < 1.
    """
    _check_same_space(h0, h1)
    n = h0.dim
    m = _relative_matrix(h0, h1)
    c_dev = float(np.linalg.norm(m - np.eye(n), ord=2))
    depth = 1 + 2 * int(np.ceil(np.log2(n))) if n > 1 else 1
    applicable = depth**2 * c_dev < 1
    bound = 16.0 * c_dev * depth * filt.sup_norm
    a0 = weight_operator(filt, h0).matrix
    a1 = weight_operator(filt, h1).matrix
    deviation = operator_norm_between(h0, a0, h1, a1)
    return deviation, bound, applicable


def loewner_defect(a, b):
    """Smallest eigenvalue of A - B; >= -tol means A >= B."""
    return float(np.linalg.eigvalsh(_hermitian_part(a - b, tol=1e-8))[0])
