"""Submultiplicative filtrations of the section ring of (P^1, O(d)).

Every filtration here is torus-invariant, hence diagonal in the monomial
basis: at degree k it is described by the weight w_k(i) of x^i y^(dk-i)
as a function of the x-power i.  Submultiplicativity means
w_{k+l}(i1 + i2) >= w_k(i1) + w_l(i2).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .hermitian import Filtration


class RingFiltration:
    """Base class: a graded filtration given degreewise by x-power weights."""

    def __init__(self, d, kind, params=None, bound=None, integral=True,
                 finitely_generated=True):
        self.d = int(d)
        self.kind = kind
        self.params = dict(params or {})
        self.bound = bound  # C with w_k <= C*k, when known
        self.integral = integral
        self.finitely_generated = finitely_generated

    def xweights(self, k):
        """Weights indexed by x-power i = 0 .. d*k."""
        raise NotImplementedError

    def weights_basis_order(self, k):
        """Weights in monomial basis order (decreasing x-power)."""
        return self.xweights(k)[::-1]

    def flag_at(self, k):
        """The degree-k piece as a coordinate-diagonal flag filtration."""
        return Filtration.from_diagonal(self.weights_basis_order(k))

    def to_json(self):
        return {"kind": self.kind, "d": self.d, **self.params}


class VanishingOrderFiltration(RingFiltration):
    """Filtration by vanishing order at the point where the moment
    coordinate is 0, so ord(x^i y^(dk-i)) = i, with an optional cap.

    cap_mode: "none" (w = i), "hard-cap" (w = min(i, k)),
    "scaled-cap" (w = k * min(i, 1)).
    """

    MODES = ("none", "hard-cap", "scaled-cap")

    def __init__(self, d, cap_mode="none"):
        if cap_mode not in self.MODES:
            raise InvalidParams(f"cap_mode {cap_mode!r} not in {self.MODES}")
        bound = {"none": float(d), "hard-cap": 1.0, "scaled-cap": 1.0}[cap_mode]
        super().__init__(d, "vanishing-order", {"cap_mode": cap_mode},
                         bound=bound)
        self.cap_mode = cap_mode

    def xweights(self, k):
        i = np.arange(self.d * k + 1, dtype=float)
        if self.cap_mode == "none":
            return i
        if self.cap_mode == "hard-cap":
            return np.minimum(i, float(k))
        return float(k) * np.minimum(i, 1.0)


class TableFiltration(RingFiltration):
    """Filtration given by explicit per-degree weight tables."""

    def __init__(self, d, table):
        table = {int(k): np.asarray(v, dtype=float) for k, v in table.items()}
        for k, v in table.items():
            if v.size != d * k + 1:
                raise InvalidParams(f"degree {k} table has size {v.size}, "
                                    f"expected {d * k + 1}")
        super().__init__(d, "table",
                         {"table": {k: v.tolist() for k, v in table.items()}},
                         integral=all(np.allclose(v, np.round(v))
                                      for v in table.values()),
                         finitely_generated=False)
        self.table = table

    def xweights(self, k):
        if k not in self.table:
            raise InvalidParams(f"no table entry for degree {k}")
        return self.table[k].copy()


class FlooredFiltration(RingFiltration):
    """Integer floor of a base filtration; stays submultiplicative and
    changes no weight by more than 1."""

    def __init__(self, base):
        super().__init__(base.d, "floored", {"base": base.to_json()},
                         bound=base.bound, integral=True,
                         finitely_generated=base.finitely_generated)
        self.base = base

    def xweights(self, k):
        return np.floor(self.base.xweights(k))


class CappedFiltration(RingFiltration):
    """min(w_k, c*k) for a constant c >= 0."""

    def __init__(self, base, c):
        if c < 0:
            raise InvalidParams(f"cap constant {c} < 0")
        super().__init__(base.d, "capped", {"base": base.to_json(), "c": float(c)},
                         bound=min(base.bound, float(c)) if base.bound else float(c),
                         integral=False,
                         finitely_generated=base.finitely_generated)
        self.base = base
        self.c = float(c)

    def xweights(self, k):
        return np.minimum(self.base.xweights(k), self.c * k)


class GeneratedFiltration(RingFiltration):
    """Largest submultiplicative filtration generated by the pieces of a
    base filtration in degrees <= k0.

    The weight of a degree-k monomial is the best total weight over all
    decompositions of the monomial into factors of degree <= k0, computed
    by dynamic programming over (degree, x-power).
    """

    def __init__(self, base, k0):
        if k0 < 1:
            raise InvalidParams(f"generation degree {k0} < 1")
        super().__init__(base.d, "generated",
                         {"base": base.to_json(), "k0": int(k0)},
                         bound=base.bound, integral=base.integral)
        self.base = base
        self.k0 = int(k0)
        self._cache = {}

    def xweights(self, k):
        if k not in self._cache:
            self._extend(k)
        return self._cache[k].copy()

    def _extend(self, kmax):
        d, k0 = self.d, self.k0
        for l in range(1, kmax + 1):
            if l in self._cache:
                continue
            if l <= k0:
                self._cache[l] = self.base.xweights(l).astype(float)
                continue
            best = np.full(d * l + 1, -np.inf)
            for l1 in range(1, min(k0, l - 1) + 1):
                w1 = self.base.xweights(l1)
                w2 = self._cache[l - l1]
                for i1 in range(d * l1 + 1):
                    lo, hi = i1, i1 + d * (l - l1)
                    cand = w1[i1] + w2
                    best[lo:hi + 1] = np.maximum(best[lo:hi + 1], cand)
            self._cache[l] = best


def filtration_from_json(doc):
    kind = doc.get("kind")
    if kind == "vanishing-order":
        return VanishingOrderFiltration(int(doc.get("d", 1)),
                                        doc.get("cap_mode", "none"))
    if kind == "table":
        return TableFiltration(int(doc.get("d", 1)),
                               {int(k): v for k, v in doc["table"].items()})
    if kind == "floored":
        return FlooredFiltration(filtration_from_json(doc["base"]))
    if kind == "capped":
        return CappedFiltration(filtration_from_json(doc["base"]),
                                float(doc["c"]))
    if kind == "generated":
        return GeneratedFiltration(filtration_from_json(doc["base"]),
                                   int(doc["k0"]))
    raise InvalidParams(f"unknown filtration kind {kind!r}")


def jumping_numbers(filt, k):
    """Weights of the degree-k piece, sorted decreasingly, multiplicity
    included."""
    return np.sort(filt.xweights(k))[::-1]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite positive measure as (location, mass) atoms."""

    locations: np.ndarray
    masses: np.ndarray

    @property
    def total(self):
        return float(self.masses.sum())

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        order = np.argsort(self.locations)
        locs = self.locations[order]
        cum = np.cumsum(self.masses[order])
        idx = np.searchsorted(locs, t, side="right")
        return np.where(idx > 0, cum[np.minimum(idx, locs.size) - 1], 0.0)

    def condensed(self, tol=1e-12):
        """Merge atoms closer than tol."""
        order = np.argsort(self.locations)
        locs, masses = self.locations[order], self.masses[order]
        out_l, out_m = [locs[0]], [masses[0]]
        for loc, m in zip(locs[1:], masses[1:]):
            if loc - out_l[-1] <= tol:
                out_m[-1] += m
            else:
                out_l.append(loc)
                out_m.append(m)
        return DiscreteMeasure(np.array(out_l), np.array(out_m))


def jumping_measure(filt, k):
    """Probability measure of normalized weights w_k(i)/k, each monomial
    carrying mass 1/(dk+1)."""
    w = filt.xweights(k) / float(k)
    n = w.size
    return DiscreteMeasure(locations=np.sort(w), masses=np.full(n, 1.0 / n))


def kolmogorov_distance(m1, m2):
    """sup_t |F1(t) - F2(t)| over CDFs of two discrete measures."""
    support = np.unique(np.concatenate([m1.locations, m2.locations]))
    probes = np.concatenate([support, support - 1e-12])
    return float(np.max(np.abs(m1.cdf(probes) - m2.cdf(probes))))


@dataclass(frozen=True)
class VolumeEstimate:
    k: int
    value: float
    prev_k: int
    prev_value: float


def filtration_volume(filt, k_max):
    """Riemann-sum estimate sum_i w_k(i) / k^2 at k_max, reported together
    with the estimate at k_max // 2."""
    if k_max < 2:
        raise InvalidParams("k_max must be >= 2")

    def est(k):
        return float(np.sum(filt.xweights(k)) / k**2)

    return VolumeEstimate(k=k_max, value=est(k_max),
                          prev_k=k_max // 2, prev_value=est(k_max // 2))


def audit_submultiplicative(filt, k_max=8, tol=1e-9):
    """All violations w_{k+l}(i1+i2) < w_k(i1) + w_l(i2) with k+l <= k_max."""
    bad = []
    tables = {k: filt.xweights(k) for k in range(1, k_max + 1)}
    for k in range(1, k_max):
        for l in range(1, k_max - k + 1):
            wk, wl, wkl = tables[k], tables[l], tables[k + l]
            for i1 in range(wk.size):
                for i2 in range(wl.size):
                    gap = wkl[i1 + i2] - wk[i1] - wl[i2]
                    if gap < -tol:
                        bad.append((k, l, i1, i2, float(gap)))
    return bad


def _upper_concave_envelope(xs, ys):
    """Vertices of the least concave majorant of the points (xs, ys)."""
    hull = []
    for x, y in zip(xs, ys):
        hull.append((x, y))
        while len(hull) >= 3:
            (x0, y0), (x1, y1), (x2, y2) = hull[-3:]
            if (y1 - y0) * (x2 - x1) <= (y2 - y1) * (x1 - x0):
                hull.pop(-2)
            else:
                break
    return np.array([p[0] for p in hull]), np.array([p[1] for p in hull])


def asymptotic_symbol(filt, k_ref=512):
    """Concave profile phi(s) of normalized weights at a large reference
    degree: the upper concave envelope of (i/(d*k), w_k(i)/k)."""
    w = filt.xweights(k_ref)
    s = np.arange(w.size) / float(filt.d * k_ref)
    hx, hy = _upper_concave_envelope(s, w / float(k_ref))
    return lambda t: np.interp(np.asarray(t, dtype=float), hx, hy)
