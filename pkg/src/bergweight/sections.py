"""Section spaces of O(m) on the projective line.

The degree-m space has the monomial basis x^i y^(m-i) ordered by
decreasing x-power (i = m, m-1, ..., 0).  Points of P^1 are stored as
normalized homogeneous coordinates (a, b) with |a|^2 + |b|^2 = 1 and the
first nonzero coordinate rotated to the positive real axis; sections are
evaluated against the induced unit frame, val(x^i y^(m-i)) = a^i b^(m-i).

The moment coordinate is s = |a|^2 in [0, 1]; the normalized volume of
the round metric is Lebesgue measure ds.  Metric weights e^(-u) on O(d)
are taken relative to the d-th power of the round metric, so u = 0 is
the round case.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import expit, gammaln

from .errors import (
    DimensionMismatch,
    InvalidParams,
    NonPositiveVolume,
    NotConvex,
    NotRotationInvariant,
)
from .hermitian import make_norm

_PHASE_TOL = 1e-14


@dataclass(frozen=True)
class PointP1:
    """Normalized homogeneous coordinates on the projective line."""

    a: complex
    b: complex

    @classmethod
    def of(cls, a, b):
        a, b = complex(a), complex(b)
        r = math.hypot(abs(a), abs(b))
        if r == 0:
            raise InvalidParams("(0, 0) is not a point of P^1")
        a, b = a / r, b / r
        lead = a if abs(a) > _PHASE_TOL else b
        phase = lead / abs(lead)
        return cls(a / phase, b / phase)

    @classmethod
    def from_moment(cls, s, theta=0.0):
        """Point with |a|^2 = s and relative phase theta between a and b."""
        if not 0.0 <= s <= 1.0:
            raise InvalidParams(f"moment coordinate {s} outside [0, 1]")
        return cls.of(math.sqrt(s) * np.exp(1j * theta), math.sqrt(1.0 - s))

    @property
    def s(self):
        return abs(self.a) ** 2


@dataclass(frozen=True)
class SectionSpace:
    """H^0(P^1, O(m)) with the fixed monomial basis."""

    degree: int

    @property
    def dim(self):
        return self.degree + 1

    @property
    def xpowers(self):
        """x-exponent of each basis monomial, in basis order."""
        return np.arange(self.degree, -1, -1)

    def basis_label(self):
        return f"monomials-deg{self.degree}"


def evaluate_sections(space, x):
    """Values a^i b^(m-i) of the basis monomials at a normalized point."""
    m = space.degree
    pa = np.array([x.a**int(i) for i in range(m + 1)])
    pb = np.array([x.b**int(i) for i in range(m + 1)])
    return pa[space.xpowers] * pb[m - space.xpowers]


def multiplication_matrix(k, l):
    """Matrix of the product map H^0(O(k)) x H^0(O(l)) -> H^0(O(k+l)).

    Rows follow the degree-(k+l) basis order; columns follow the tensor
    basis in np.kron convention (degree-k index major).
    """
    rows = k + l + 1
    cols = (k + 1) * (l + 1)
    p = np.zeros((rows, cols))
    for j1 in range(k + 1):
        for j2 in range(l + 1):
            i1, i2 = k - j1, l - j2
            row = (k + l) - (i1 + i2)
            p[row, j1 * (l + 1) + j2] = 1.0
    return p


class MetricPotential:
    """Potential u of a metric e^(-u) * (round metric)^d on O(d).

    Rotation-invariant potentials are given by a profile P of the moment
    coordinate s; smooth profiles also expose first and second
    derivatives so the curvature volume density can be formed.  General
    potentials are given by a callable on points and only support the
    fixed background volume.
    """

    def __init__(self, d, kind, data, profile=None, dprofile=None,
                 d2profile=None, func=None, sup_bound=None):
        if d < 1:
            raise InvalidParams(f"bundle degree {d} < 1")
        self.d = int(d)
        self.kind = kind
        self.data = data
        self._profile = profile
        self._dprofile = dprofile
        self._d2profile = d2profile
        self._func = func
        self.sup_bound = sup_bound

    @property
    def rotation_invariant(self):
        return self._profile is not None

    @property
    def smooth_profile(self):
        return self._d2profile is not None

    def at_s(self, s):
        if not self.rotation_invariant:
            raise NotRotationInvariant("potential has no radial profile")
        return self._profile(np.asarray(s, dtype=float))

    def dprofile(self, s):
        return self._dprofile(np.asarray(s, dtype=float))

    def __call__(self, x):
        if self.rotation_invariant:
            return float(self._profile(x.s))
        return float(self._func(x))

    def curvature_density(self, s):
        """Density of the curvature volume w.r.t. ds; total mass d."""
        if not self.smooth_profile:
            raise NotRotationInvariant("no smooth radial profile available")
        s = np.asarray(s, dtype=float)
        p1, p2 = self._dprofile(s), self._d2profile(s)
        return self.d + p2 * s * (1.0 - s) + p1 * (1.0 - 2.0 * s)

    # --- constructors -------------------------------------------------

    @classmethod
    def zero(cls, d=1):
        return cls.constant(0.0, d=d)

    @classmethod
    def constant(cls, c, d=1):
        c = float(c)
        z = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        return cls(d, "constant", c, profile=lambda s: np.full_like(
            np.asarray(s, dtype=float), c), dprofile=z, d2profile=z,
            sup_bound=abs(c))

    @classmethod
    def moment_linear(cls, c, d=1):
        """u = c * s; positive curvature needs |c| < d."""
        c = float(c)
        return cls(
            d, "moment-linear", c,
            profile=lambda s: c * np.asarray(s, dtype=float),
            dprofile=lambda s: np.full_like(np.asarray(s, dtype=float), c),
            d2profile=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            sup_bound=abs(c),
        )

    @classmethod
    def radial_samples(cls, s_grid, values, d=1):
        s_grid = np.asarray(s_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if s_grid.ndim != 1 or s_grid.size != values.size or s_grid.size < 4:
            raise InvalidParams("radial samples need matching 1-d grids, >= 4 points")
        spline = CubicSpline(s_grid, values)
        return cls(
            d, "radial-samples", [s_grid.tolist(), values.tolist()],
            profile=lambda s: np.interp(np.asarray(s, dtype=float), s_grid, values),
            dprofile=spline.derivative(1),
            d2profile=spline.derivative(2),
            sup_bound=float(np.max(np.abs(values))),
        )

    @classmethod
    def from_function(cls, func, sup_bound, d=1):
        return cls(d, "function", None, func=func, sup_bound=float(sup_bound))

    @classmethod
    def from_json(cls, doc):
        kind = doc.get("type")
        d = int(doc.get("d", 1))
        data = doc.get("data")
        if kind == "constant":
            return cls.constant(float(data), d=d)
        if kind == "moment-linear":
            return cls.moment_linear(float(data), d=d)
        if kind == "radial-samples":
            return cls.radial_samples(data[0], data[1], d=d)
        raise InvalidParams(f"unknown metric potential type {kind!r}")

    def to_json(self):
        return {"type": self.kind, "d": self.d, "data": self.data}


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights for the moment interval, plus an angular count.

    Weights integrate ds exactly on polynomials, so they sum to 1; the
    angular count (0 = automatic) controls the trapezoid rule in the
    fiber angle for non-invariant integrands.
    """

    nodes: np.ndarray
    weights: np.ndarray
    angular_count: int = 0
    label: str = ""
    order: int = 0
    breakpoints: tuple = ()

    @classmethod
    def gauss_legendre(cls, n, breakpoints=(), angular_count=0):
        """Composite Gauss-Legendre rule on [0, 1] split at breakpoints."""
        pts = sorted({0.0, 1.0, *map(float, breakpoints)})
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise InvalidParams("breakpoints must lie inside [0, 1]")
        x, w = np.polynomial.legendre.leggauss(int(n))
        nodes, weights = [], []
        for lo, hi in zip(pts[:-1], pts[1:]):
            half = (hi - lo) / 2.0
            nodes.append(lo + half * (x + 1.0))
            weights.append(half * w)
        return cls(
            nodes=np.concatenate(nodes), weights=np.concatenate(weights),
            angular_count=int(angular_count),
            label=f"gl{n}x{len(pts) - 1}",
            order=int(n), breakpoints=tuple(sorted(set(map(float, breakpoints)))),
        )

    def refined(self):
        """The same rule with twice the order, for self-tests."""
        return QuadratureRule.gauss_legendre(
            2 * (self.order or self.nodes.size), breakpoints=self.breakpoints,
            angular_count=2 * self.angular_count,
        )


def _monomial_moments(m, s, weights):
    """Integrals of s^i (1-s)^(m-i) against the weighted nodes, all i."""
    out = np.empty(m + 1)
    log_s = np.log(np.clip(s, 1e-300, None))
    log_1ms = np.log(np.clip(1.0 - s, 1e-300, None))
    for i in range(m + 1):
        vals = np.exp(i * log_s + (m - i) * log_1ms)
        vals[np.asarray(s) <= 0.0] = 1.0 if i == 0 else 0.0
        vals[np.asarray(s) >= 1.0] = 1.0 if i == m else 0.0
        out[i] = float(weights @ vals)
    return out


def hilb_quadrature(k, u, rule):
    """Gram matrix of the L^2 norm on H^0(O(k*d)) for the metric e^(-ku)
    times the k-th power of (round)^d, integrated against the curvature
    volume of that metric.

    Rotation-invariant smooth potentials give an exactly diagonal Gram
    with the curvature density as radial weight.  Non-invariant (or
    non-smooth) potentials fall back to the fixed background volume and
    the result is flagged in meta["volume"].
    """
    m = k * u.d
    space = SectionSpace(m)
    meta = {"k": k, "d": u.d, "rule": rule.label}
    if u.rotation_invariant and u.smooth_profile:
        dens = np.asarray(u.curvature_density(rule.nodes), dtype=float)
        if np.any(dens <= 0.0):
            raise NonPositiveVolume(
                f"curvature density min {dens.min():.3e} at a node")
        meta["volume"] = "curvature"
        wts = rule.weights * dens * np.exp(-k * u.at_s(rule.nodes))
        diag = _monomial_moments(m, rule.nodes, wts)
        gram = np.diag(diag[space.xpowers]).astype(complex)
    else:
        meta["volume"] = "background"
        n_ang = rule.angular_count or 4 * (m + 1)
        gram = np.zeros((m + 1, m + 1), dtype=complex)
        thetas = 2.0 * np.pi * np.arange(n_ang) / n_ang
        for q, (s, w) in enumerate(zip(rule.nodes, rule.weights)):
            for theta in thetas:
                x = PointP1.from_moment(float(s), float(theta))
                e = evaluate_sections(space, x)
                uval = u(x) if not u.rotation_invariant else float(u.at_s(s))
                gram += (w * u.d / n_ang) * np.exp(-k * uval) * np.outer(
                    e, e.conj())
    return make_norm(gram, basis_label=space.basis_label(), meta=meta)


def hilb_fs_closed_form(m):
    """Round-metric Gram on H^0(O(m)): diagonal i!(m-i)!/(m+1)!."""
    i = np.arange(m, -1, -1)
    if m <= 150:
        diag = np.array([
            math.factorial(int(j)) * math.factorial(m - int(j))
            / math.factorial(m + 1) for j in i
        ])
    else:
        diag = np.exp(gammaln(i + 1) + gammaln(m - i + 1) - gammaln(m + 2))
    return make_norm(np.diag(diag).astype(complex),
                     basis_label=SectionSpace(m).basis_label(),
                     meta={"volume": "curvature", "closed_form": True})


# --- toric Legendre transform ----------------------------------------


def _full_potential(u, tau):
    """Convex potential v(tau) = d*log(1+e^tau) + P(s(tau))."""
    s = expit(tau)
    return u.d * np.logaddexp(0.0, tau) + u.at_s(s)


def _discrete_conjugate(tau, v, sigma):
    """max_tau (sigma*tau - v(tau)) for each sigma, via the monotone
    argmax of the concave-in-tau objective."""
    out = np.empty(sigma.size)
    j = 0
    n = tau.size
    for i, sg in enumerate(sigma):
        obj = sg * tau[j] - v[j]
        while j + 1 < n:
            nxt = sg * tau[j + 1] - v[j + 1]
            if nxt < obj:
                break
            obj, j = nxt, j + 1
        out[i] = obj
    return out


def toric_geodesic_phi(u0, u1, n_sigma=4096, n_tau=8192, tau_max=40.0):
    """Velocity symbol of the geodesic of rotation-invariant metrics.

    With v_i the convex full potentials in the log coordinate, the
    geodesic is linear in Legendre transforms, v_t^* = (1-t)v_0^* + t v_1^*,
    and the initial velocity of u_t composed with the moment map of the
    starting metric is phi = (v_0^* - v_1^*) o grad v_0.  Returned as a
    rotation-invariant potential sampled on the moment interval;
    sup |phi| <= sup |u_1 - u_0|.
    """
    for u in (u0, u1):
        if not (u.rotation_invariant and u.smooth_profile):
            raise NotRotationInvariant("Legendre route needs smooth radial profiles")
    if u0.d != u1.d:
        raise DimensionMismatch(f"bundle degrees differ: {u0.d} != {u1.d}")
    d = u0.d
    tau = np.linspace(-tau_max, tau_max, n_tau)
    v0 = _full_potential(u0, tau)
    v1 = _full_potential(u1, tau)
    h = tau[1] - tau[0]
    for name, v in (("start", v0), ("end", v1)):
        if np.min(np.diff(v, 2)) < -1e-8 * h * h * max(1.0, np.max(np.abs(v))):
            raise NotConvex(f"{name} potential is not convex in the log coordinate")
    sigma = np.linspace(0.0, d, n_sigma)
    phi_sigma = _discrete_conjugate(tau, v0, sigma) - _discrete_conjugate(
        tau, v1, sigma)
    # endpoints of the moment interval are limits of the fiberwise sup
    phi_sigma[0] = float(u1.at_s(0.0) - u0.at_s(0.0))
    phi_sigma[-1] = float(u1.at_s(1.0) - u0.at_s(1.0))

    def moment_of(s):
        s = np.asarray(s, dtype=float)
        return d * s + u0.dprofile(s) * s * (1.0 - s)

    s_grid = np.linspace(0.0, 1.0, n_sigma)
    values = np.interp(moment_of(s_grid), sigma, phi_sigma)
    return MetricPotential.radial_samples(s_grid, values, d=d)
