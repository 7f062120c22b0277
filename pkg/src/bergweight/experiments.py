"""Experiment runner: one reproducible sweep per convergence claim.

Each experiment consumes a JSON-style config dict, produces per-k CSV
tables and a list of verdicts (assertion id, pass/fail, measured value,
threshold), and is deterministic given the seed.
"""

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bergman, filtrations, hermitian, sections
from .errors import ConfigInvalid, ExperimentUnknown

TREND_ATOL = 1e-12


# --------------------------------------------------------------------
# plumbing


@dataclass
class Verdict:
    id: str
    tag: str
    passed: bool
    measured: float
    threshold: float
    description: str

    def as_dict(self):
        return {
            "id": self.id, "tag": self.tag, "passed": bool(self.passed),
            "measured": float(self.measured), "threshold": float(self.threshold),
            "description": self.description,
        }


@dataclass
class ExperimentResult:
    experiment: str
    config: dict
    tables: dict
    verdicts: list
    runtime_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def all_passed(self):
        return all(v.passed for v in self.verdicts)


def _pmap(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def trend_verdict(vid, tag, values, ratio, description):
    """Encode a convergence claim as: last value <= first * ratio."""
    first, last = float(values[0]), float(values[-1])
    threshold = first * ratio + TREND_ATOL
    return Verdict(vid, tag, last <= threshold, last, threshold,
                   description + f" (first {first:.3e}, ratio {ratio})")


def bound_verdict(vid, tag, measured, threshold, description):
    return Verdict(vid, tag, float(measured) <= float(threshold),
                   float(measured), float(threshold), description)


def _sample_points(cfg, rng):
    pts = cfg.get("points", {})
    count = int(pts.get("count", 50))
    kind = pts.get("kind", "uniform")
    if "seed" in pts:
        rng = np.random.default_rng(int(pts["seed"]))
    if kind == "grid":
        s = np.linspace(0.0, 1.0, count)
        thetas = np.zeros(count)
    else:
        s = rng.uniform(0.0, 1.0, size=count)
        thetas = rng.uniform(0.0, 2 * np.pi, size=count)
    return [sections.PointP1.from_moment(float(si), float(ti))
            for si, ti in zip(s, thetas)]


def _fs_norm(k, d, n_nodes=None, breakpoints=()):
    u = sections.MetricPotential.zero(d=d)
    rule = sections.QuadratureRule.gauss_legendre(
        n_nodes or max(2 * (k * d + 2), 64), breakpoints=breakpoints)
    return sections.hilb_quadrature(k, u, rule), u, rule


def _metric_from(cfg, default=None):
    doc = cfg.get("metric")
    if doc is None:
        return default or sections.MetricPotential.zero(d=1)
    return sections.MetricPotential.from_json(doc)


def _filtration_from(cfg, default_doc):
    return filtrations.filtration_from_json(cfg.get("filtration", default_doc))


EXAMPLE1_DOC = {"kind": "vanishing-order", "d": 1, "cap_mode": "scaled-cap"}
EXAMPLE2_DOC = {"kind": "vanishing-order", "d": 2, "cap_mode": "hard-cap"}


# --------------------------------------------------------------------
# experiments


def _run_tian(cfg, rng, threads):
    u = _metric_from(cfg, sections.MetricPotential.moment_linear(0.1, d=1))
    count = int(cfg.get("points", {}).get("count", 200))
    s_grid = np.linspace(0.0, 1.0, count)
    points = [sections.PointP1.from_moment(float(s)) for s in s_grid]

    def row(k):
        rule = sections.QuadratureRule.gauss_legendre(max(2 * (k * u.d + 2), 64))
        norm = sections.hilb_quadrature(k, u, rule)
        vals = np.array([bergman.bergman_diag(k, norm, u, x) for x in points])
        return {"k": k, "sup_B_over_k": float(vals.max() / k),
                "inf_B_over_k": float(vals.min() / k),
                "sup_dev": float(np.max(np.abs(vals / k - 1.0)))}

    rows = _pmap(row, cfg["k_grid"], threads)
    devs = [r["sup_dev"] for r in rows]
    verdicts = [trend_verdict(
        "tian-uniform-convergence", "bergman-density-limit", devs,
        cfg.get("trend_ratio", 0.5),
        "sup |B_k/k - 1| over the moment grid decreases")]
    return {"per_k": rows}, verdicts


def _run_example1(cfg, rng, threads):
    filt = _filtration_from(cfg, EXAMPLE1_DOC)
    tol = cfg.get("tolerances", {}).get("closed_form", 1e-10)
    t_vals = (0.1, 0.5, 1.0)
    s_vals = (0.0, 0.05, 0.3, 0.5, 0.8, 0.95)
    rows, worst_a, worst_b, worst_r = [], 0.0, 0.0, 0.0
    for k in cfg["k_grid"]:
        norm, u, _rule = _fs_norm(k, 1)
        flag = filt.flag_at(k)
        # weight operator: k on every monomial except the one of x-power 0
        a = hermitian.weight_operator(flag, norm).matrix
        expect = np.diag(np.where(np.arange(k, -1, -1) > 0, float(k), 0.0))
        err_a = float(np.max(np.abs(a - expect)))
        err_b = err_r = 0.0
        for s in s_vals:
            x = sections.PointP1.from_moment(s)
            b = bergman.weighted_bergman(flag, lambda t: t, k, norm, u, x)
            closed = (k + 1) * (1.0 - (1.0 - s) ** k)
            err_b = max(err_b, abs(b - closed))
        for t in t_vals:
            ray = hermitian.geodesic_ray_filtration(norm, flag, t)
            for s in s_vals:
                x = sections.PointP1.from_moment(s)
                r = bergman.fs_ratio(ray, norm, x)
                closed = 1.0 / (math.exp(t * k) + (1 - math.exp(t * k))
                                * (1.0 - s) ** k)
                err_r = max(err_r, abs(r - closed))
        worst_a, worst_b, worst_r = (max(worst_a, err_a), max(worst_b, err_b),
                                     max(worst_r, err_r))
        rows.append({"k": k, "weight_op_err": err_a,
                     "weighted_bergman_err": err_b, "fs_ratio_err": err_r})
    k_big = int(cfg.get("k_table", 256))
    norm, u, _rule = _fs_norm(k_big, 1)
    flag = filt.flag_at(k_big)
    table = []
    for s in np.linspace(0.0, 1.0, 21):
        x = sections.PointP1.from_moment(float(s))
        b = bergman.weighted_bergman(flag, lambda t: t, k_big, norm, u, x)
        table.append({"s": float(s), "B_over_kp1": b / (k_big + 1)})
    at0 = table[0]["B_over_kp1"]
    off0 = min(r["B_over_kp1"] for r in table[1:])
    verdicts = [
        bound_verdict("example1-weight-operator", "vanishing-order-weights",
                      worst_a, tol, "A(F,Hilb) = k*(1 - delta_{i,0}) diagonal"),
        bound_verdict("example1-weighted-bergman", "weighted-kernel-closed-form",
                      worst_b, tol, "B^{F,id} = (k+1)(1-(1-s)^k)"),
        bound_verdict("example1-fs-ratio", "geodesic-ray-fs-closed-form",
                      worst_r, tol,
                      "FS(H_t)/FS(H_0) = 1/(e^{tk}+(1-e^{tk})(1-s)^k)"),
        bound_verdict("example1-limit-at-exceptional", "pointwise-limit-gap",
                      at0, 1e-12, f"B/(k+1) vanishes at s=0, k={k_big}"),
        Verdict("example1-limit-off-exceptional", "pointwise-limit-gap",
                off0 >= 0.99, off0, 0.99,
                f"B/(k+1) ~ 1 away from s=0 at k={k_big}"),
    ]
    return {"per_k": rows, f"limit_k{k_big}": table}, verdicts


def _run_example2(cfg, rng, threads):
    filt = _filtration_from(cfg, EXAMPLE2_DOC)
    tol = cfg.get("tolerances", {}).get("symbol", 1e-8)
    k_ref = int(cfg.get("k_ref", 512))
    phi = filtrations.asymptotic_symbol(filt, k_ref=k_ref)
    grid = np.linspace(0.0, 1.0, int(cfg.get("points", {}).get("count", 200)))
    closed = np.minimum(2.0 * grid, 1.0)
    err = float(np.max(np.abs(phi(grid) - closed)))
    k_last = cfg["k_grid"][-1]
    table = [{"s": float(s), "phi": float(p), "closed_form": float(c)}
             for s, p, c in zip(grid, phi(grid), closed)]
    jumps = filtrations.jumping_numbers(filt, k_last)
    jtable = [{"j": j, "e_over_k": float(e / k_last)}
              for j, e in enumerate(jumps)]
    verdicts = [bound_verdict(
        "example2-symbol-closed-form", "weight-symbol-envelope", err, tol,
        "concave weight profile matches min(2s, 1) on the moment grid")]
    return {"symbol": table, f"jumping_k{k_last}": jtable}, verdicts


def _run_weight_toeplitz(cfg, rng, threads):
    filt = _filtration_from(cfg, EXAMPLE2_DOC)
    phi = filtrations.asymptotic_symbol(filt, k_ref=int(cfg.get("k_ref", 512)))

    def row(k):
        norm, u, rule = _fs_norm(k, filt.d, breakpoints=(0.5,))
        a = hermitian.weight_operator(filt.flag_at(k), norm)
        a_over_k = hermitian.OperatorOnSections(
            matrix=a.matrix / k, reference_norm=norm)
        dist = bergman.symbol_distance(a_over_k, phi, k, norm, u,
                                       float("inf"), rule)
        return {"k": k, "op_distance": dist}

    rows = _pmap(row, cfg["k_grid"], threads)
    dists = [r["op_distance"] for r in rows]
    mono = all(b < a for a, b in zip(dists, dists[1:]))
    verdicts = [
        Verdict("weight-symbol-monotone", "weight-operator-toeplitz-limit",
                mono, dists[-1], dists[0],
                "operator-norm distance ||A/k - T_phi|| decreases at every step"),
        trend_verdict("weight-symbol-trend", "weight-operator-toeplitz-limit",
                      dists, cfg.get("trend_ratio", 0.5),
                      "||A/k - T_phi|| final/initial"),
    ]
    return {"per_k": rows}, verdicts


def _run_transfer_toeplitz(cfg, rng, threads):
    c = float(cfg.get("shift", 0.35))
    u0 = _metric_from(cfg, sections.MetricPotential.zero(d=1))
    u1 = sections.MetricPotential.from_json(cfg.get(
        "metric_end", {"type": "moment-linear", "d": u0.d, "data": 0.2}))
    phi = sections.toric_geodesic_phi(u0, u1)

    def row(k):
        rule = sections.QuadratureRule.gauss_legendre(max(2 * (k * u0.d + 2), 64))
        h0 = sections.hilb_quadrature(k, u0, rule)
        # constant shift: exact scalar transfer
        base = u0 if u0.kind == "constant" else sections.MetricPotential.zero(u0.d)
        hb = sections.hilb_quadrature(k, base, rule)
        uc = sections.MetricPotential.constant(float(base.data) + c, d=u0.d)
        hc = sections.hilb_quadrature(k, uc, rule)
        tmap = hermitian.transfer_map(hb, hc)
        tk = hermitian.OperatorOnSections(matrix=tmap.matrix / k,
                                          reference_norm=hb)
        shift_dist = bergman.symbol_distance(
            tk, lambda s: np.full_like(np.asarray(s, float), c),
            k, hb, base, float("inf"), rule)
        h1 = sections.hilb_quadrature(k, u1, rule)
        tmap = hermitian.transfer_map(h0, h1)
        tk = hermitian.OperatorOnSections(matrix=tmap.matrix / k,
                                          reference_norm=h0)
        pair_dist = bergman.symbol_distance(tk, phi.at_s, k, h0, u0,
                                            float("inf"), rule)
        return {"k": k, "const_shift_distance": shift_dist,
                "legendre_distance": pair_dist}

    rows = _pmap(row, cfg["k_grid"], threads)
    shift_max = max(r["const_shift_distance"] for r in rows)
    pair = [r["legendre_distance"] for r in rows]
    verdicts = [
        bound_verdict("transfer-constant-shift", "transfer-toeplitz-symbol",
                      shift_max, cfg.get("tolerances", {}).get("exact", 1e-9),
                      "transfer symbol distance vanishes for h -> e^{-c} h"),
        trend_verdict("transfer-legendre-trend", "transfer-toeplitz-symbol",
                      pair, cfg.get("trend_ratio", 0.5),
                      "||T(h0,h1)/k - T_phi|| with Legendre phi"),
    ]
    return {"per_k": rows}, verdicts


def _run_schatten_limit(cfg, rng, threads):
    filt = _filtration_from(cfg, EXAMPLE1_DOC)
    p_list = cfg.get("p_list", [1, 2, 4])
    one = lambda s: np.ones_like(np.asarray(s, dtype=float))

    def row(k):
        norm, u, rule = _fs_norm(k, filt.d)
        a = hermitian.weight_operator(filt.flag_at(k), norm)
        a_over_k = hermitian.OperatorOnSections(matrix=a.matrix / k,
                                                reference_norm=norm)
        out = {"k": k}
        for p in p_list:
            out[f"p{p}_distance"] = bergman.symbol_distance(
                a_over_k, one, k, norm, u, float(p), rule)
        out["op_distance"] = bergman.symbol_distance(
            a_over_k, one, k, norm, u, float("inf"), rule)
        return out

    rows = _pmap(row, cfg["k_grid"], threads)
    ratio = cfg.get("trend_ratio", 0.5)
    verdicts = [
        trend_verdict(f"schatten-p{p}-trend", "schatten-symbol-limit",
                      [r[f"p{p}_distance"] for r in rows], ratio,
                      f"||A/k - T_1||_{p} final/initial")
        for p in p_list
    ]
    op_min = min(r["op_distance"] for r in rows)
    verdicts.append(Verdict(
        "schatten-opnorm-no-decay", "schatten-symbol-limit-sharpness",
        op_min >= 0.5, op_min, 0.5,
        "operator-norm distance stays >= 0.5 (no uniform convergence)"))
    return {"per_k": rows}, verdicts


def _run_product_symbol(cfg, rng, threads):
    u = sections.MetricPotential.zero(d=1)
    f = lambda s: np.asarray(s, dtype=float)
    g = lambda s: 1.0 - np.asarray(s, dtype=float)
    fg = lambda s: np.asarray(s, dtype=float) * (1.0 - np.asarray(s, dtype=float))
    p_list = cfg.get("p_list", [1, 2])

    def row(k):
        rule = sections.QuadratureRule.gauss_legendre(max(2 * (k + 2), 64))
        norm = sections.hilb_quadrature(k, u, rule)
        tf = bergman.toeplitz_matrix(f, k, norm, u, rule)
        tg = bergman.toeplitz_matrix(g, k, norm, u, rule)
        tfg = bergman.toeplitz_matrix(fg, k, norm, u, rule)
        prod_gap = hermitian.schatten_norm(hermitian.OperatorOnSections(
            matrix=tf.matrix @ tg.matrix - tfg.matrix, reference_norm=norm,
            hermitian=False), float("inf"))
        out = {"k": k, "algebra_gap": prod_gap}
        for p in p_list:
            limit = (1.0 / (p + 1.0)) ** (1.0 / p)  # (int s^p ds)^(1/p)
            out[f"p{p}_norm_gap"] = abs(
                hermitian.schatten_norm(tf, float(p)) - limit)
        return out

    rows = _pmap(row, cfg["k_grid"], threads)
    ratio = cfg.get("trend_ratio", 0.5)
    verdicts = [trend_verdict(
        "toeplitz-algebra-trend", "toeplitz-product-symbol",
        [r["algebra_gap"] for r in rows], ratio,
        "||T_s T_{1-s} - T_{s(1-s)}|| final/initial")]
    for p in p_list:
        verdicts.append(trend_verdict(
            f"toeplitz-p{p}-norm-limit", "toeplitz-schatten-norm-limit",
            [r[f"p{p}_norm_gap"] for r in rows], ratio,
            f"| ||T_s||_{p} - (int s^{p} ds)^(1/{p}) | final/initial"))
    return {"per_k": rows}, verdicts


def _run_functional_calculus(cfg, rng, threads):
    filt = _filtration_from(cfg, EXAMPLE2_DOC)
    cap_c = float(cfg.get("cap_c", 0.7))
    capped = filtrations.CappedFiltration(filt, cap_c)
    tol_eq = cfg.get("tolerances", {}).get("exact", 1e-10)
    tol_tr = cfg.get("tolerances", {}).get("trace", 1e-8)

    k_eq = int(cfg.get("k_equality", 6))
    norm, u, rule = _fs_norm(k_eq, filt.d)
    a = hermitian.weight_operator(filt.flag_at(k_eq), norm)
    lhs = hermitian.functional_calculus(
        a, lambda t: min(t / k_eq, cap_c)).matrix
    rhs = hermitian.weight_operator(capped.flag_at(k_eq), norm).matrix / k_eq
    eq_err = float(np.max(np.abs(lhs - rhs)))

    g_specs = [("identity", lambda t: t), (f"cap{cap_c}",
                                           lambda t: min(t, cap_c))]

    def row(k):
        norm, u, rule = _fs_norm(k, filt.d)
        flag = filt.flag_at(k)
        a = hermitian.weight_operator(flag, norm)
        out = {"k": k}
        for name, gfun in g_specs:
            ga = hermitian.functional_calculus(a, lambda t: gfun(t / k))
            tr = bergman.trace_of(ga)
            integrand = np.array([
                bergman.weighted_bergman(
                    flag, gfun, k, norm, u,
                    sections.PointP1.from_moment(float(s)))
                for s in rule.nodes
            ])
            dens = np.asarray(u.curvature_density(rule.nodes), dtype=float)
            integral = float(np.sum(rule.weights * dens * integrand))
            out[f"gap_{name}"] = abs(integral - tr)
        return out

    rows = _pmap(row, cfg["k_grid"], threads)
    worst = max(max(r["gap_identity"], r[f"gap_cap{cap_c}"]) for r in rows)
    verdicts = [
        bound_verdict("capped-filtration-calculus", "cap-equals-min-calculus",
                      eq_err, tol_eq,
                      f"min(A/k, c) = A(F^c)/k as matrices at k={k_eq}"),
        bound_verdict("trace-identity", "weighted-kernel-trace-identity",
                      worst, tol_tr,
                      "integral of B^{F,g} against the curvature volume "
                      "equals Tr g(A/k)"),
    ]
    return {"per_k": rows}, verdicts


def _superadditivity_pairs(grid):
    return [(k, l) for k in grid for l in grid if l / 2 <= k <= 2 * l]


def _run_superadditivity(cfg, rng, threads):
    grid = cfg.get("kl_grid", [8, 16, 32])
    points = _sample_points(cfg, rng)
    examples = [("example1", filtrations.filtration_from_json(EXAMPLE1_DOC)),
                ("example2", filtrations.filtration_from_json(EXAMPLE2_DOC))]
    rows, fitted = [], {}
    for name, filt in examples:
        cache = {}

        def b_f(k):
            if k not in cache:
                norm, u, _rule = _fs_norm(k, filt.d)
                flag = filt.flag_at(k)
                cache[k] = np.array([
                    bergman.weighted_bergman(flag, lambda t: t, k, norm, u, x)
                    for x in points])
            return cache[k]

        for k, l in _superadditivity_pairs(grid):
            defect = b_f(k) + b_f(l) - b_f(k + l)
            c_pair = float(np.max(defect) / math.log(k + l))
            rows.append({"example": name, "k": k, "l": l,
                         "max_defect": float(np.max(defect)),
                         "C": c_pair})
            fitted[(name, k, l)] = c_pair
    verdicts = []
    for name, _f in examples:
        cs = [(k + l, c) for (nm, k, l), c in fitted.items() if nm == name]
        base = max(c for tot, c in cs if tot == min(t for t, _ in cs))
        worst = max(c for _, c in cs)
        verdicts.append(Verdict(
            f"superadditivity-{name}", "weighted-kernel-superadditivity",
            worst <= 2.0 * base + TREND_ATOL, worst, 2.0 * base,
            "defect/log(k+l) stays within 2x its value at the smallest k+l"))
    return {"pairs": rows}, verdicts


def _quotient_diag_gram(diag_k, diag_l):
    """Diagonal Gram of the quotient of a tensor product of diagonal norms
    through the multiplication map (rows have disjoint support)."""
    inv_k, inv_l = 1.0 / diag_k, 1.0 / diag_l
    conv = np.convolve(inv_k[::-1], inv_l[::-1])  # x-power order
    return 1.0 / conv[::-1]  # back to basis order


def _run_asymptotic_isometry(cfg, rng, threads):
    grid = cfg.get("kl_grid", [8, 16, 32, 64])
    u = _metric_from(cfg, sections.MetricPotential.zero(d=1))
    grams = {}

    def diag_of(k):
        if k not in grams:
            rule = sections.QuadratureRule.gauss_legendre(max(2 * (k + 2), 64))
            grams[k] = np.diag(sections.hilb_quadrature(k, u, rule).gram).real
        return grams[k]

    rows = []
    for k in grid:
        for l in grid:
            gq = _quotient_diag_gram(diag_of(k), diag_of(l))
            gd = diag_of(k + l)
            ratio = np.sqrt(gq / gd) * math.sqrt(k * l / (k + l))
            c_pair = float(np.max(np.abs(ratio - 1.0)) / (1.0 / k + 1.0 / l))
            rows.append({"k": k, "l": l, "ratio_min": float(ratio.min()),
                         "ratio_max": float(ratio.max()), "C": c_pair})
    cs = [r["C"] for r in rows]
    windows = [r for r in rows if r["k"] >= 16 and r["l"] >= 16]
    win_lo = min(r["ratio_min"] for r in windows)
    win_hi = max(r["ratio_max"] for r in windows)
    verdicts = [
        Verdict("isometry-window", "multiplication-asymptotic-isometry",
                0.8 <= win_lo and win_hi <= 1.2, win_hi, 1.2,
                f"ratio*(kl/(k+l))^(1/2) in [0.8, 1.2] for k,l >= 16 "
                f"(min {win_lo:.4f})"),
        Verdict("isometry-constant-stability",
                "multiplication-asymptotic-isometry",
                max(cs) <= 2.0 * min(cs), max(cs), 2.0 * min(cs),
                "fitted C = |ratio-1|/(1/k+1/l) varies by at most 2x"),
    ]
    return {"pairs": rows}, verdicts


def _run_jumping_measure(cfg, rng, threads):
    filt = _filtration_from(cfg, EXAMPLE2_DOC)
    tol_eq = cfg.get("tolerances", {}).get("exact", 1e-9)
    rows, worst = [], 0.0
    for k in cfg["k_grid"]:
        norm, _u, _rule = _fs_norm(k, filt.d)
        a = hermitian.weight_operator(filt.flag_at(k), norm)
        spec = np.sort(np.linalg.eigvalsh(a.matrix))[::-1] / k
        jumps = filtrations.jumping_numbers(filt, k) / k
        gap = float(np.max(np.abs(spec - jumps)))
        worst = max(worst, gap)
        rows.append({"k": k, "spectrum_gap": gap})
    k_big = int(cfg.get("k_limit", 256))
    mu = filtrations.jumping_measure(filt, k_big)
    res = int(cfg.get("resolution", 4096))
    locs = np.concatenate([(np.arange(res) + 0.5) / res, [1.0]])
    masses = np.concatenate([np.full(res, 0.5 / res), [0.5]])
    limit = filtrations.DiscreteMeasure(locations=locs, masses=masses)
    ks = filtrations.kolmogorov_distance(mu, limit)
    vol = filtrations.filtration_volume(filt, int(cfg.get("k_vol", 128)))
    verdicts = [
        bound_verdict("spectral-equals-jumping", "weight-spectrum-identity",
                      worst, tol_eq,
                      "spectrum of A/k equals the jumping numbers/k"),
        bound_verdict("jumping-measure-limit", "jumping-measure-weak-limit",
                      ks, cfg.get("tolerances", {}).get("kolmogorov", 0.05),
                      f"Kolmogorov distance to uniform/2 + atom/2 at k={k_big}"),
        bound_verdict("volume-estimate", "filtration-volume",
                      abs(vol.value - 1.5), 2.0 / vol.k,
                      f"vol estimate at k={vol.k} within 2/k of 3/2 "
                      f"(prev {vol.prev_value:.6f} at k={vol.prev_k})"),
    ]
    tables = {"per_k": rows,
              "volume": [{"k": vol.prev_k, "estimate": vol.prev_value},
                         {"k": vol.k, "estimate": vol.value}]}
    return tables, verdicts


def _random_filtration(rng, n):
    n_levels = int(rng.integers(1, n + 1))
    weights = np.sort(rng.uniform(-2.0, 2.0, size=n_levels))[::-1]
    per_vec = weights[rng.integers(0, n_levels, size=n)]
    per_vec[0] = weights[0]  # every level realized at least once
    basis = None
    while basis is None:
        cand = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if np.linalg.cond(cand) < 1e6:
            basis = cand
    levels = sorted(set(per_vec.tolist()), reverse=True)
    flag = tuple(basis[:, per_vec >= lvl] for lvl in levels)
    return hermitian.Filtration(weights=tuple(levels), flag=flag)


def _run_cholesky_stability(cfg, rng, threads):
    instances = int(cfg.get("instances", 1000))
    dim_max = int(cfg.get("dim_max", 16))
    violations, applicable_count = 0, 0
    max_ratio = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, dim_max + 1))
        depth = 1 + 2 * int(np.ceil(np.log2(n)))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        g0 = a @ a.conj().T + 0.1 * np.eye(n)
        h0 = hermitian.make_norm(g0)
        target = 1.0 / (2.0 * depth**2)
        s = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        s = (s + s.conj().T) / 2
        s *= math.log1p(0.9 * target) / max(np.linalg.norm(s, 2), 1e-12)
        w, v = np.linalg.eigh(s)
        e = v @ np.diag(np.exp(-w)) @ v.conj().T
        c = np.linalg.cholesky(g0)
        h1 = hermitian.make_norm(c @ e @ c.conj().T)
        filt = _random_filtration(rng, n)
        dev, bound, applicable = hermitian.cholesky_stability_bound(
            filt, h0, h1)
        if applicable:
            applicable_count += 1
            if bound > 0:
                max_ratio = max(max_ratio, dev / bound)
            if dev > bound + TREND_ATOL:
                violations += 1
    verdicts = [Verdict(
        "cholesky-bound-violations", "weight-operator-stability",
        violations == 0 and applicable_count > 0, float(violations), 0.0,
        f"{applicable_count} applicable instances, max dev/bound "
        f"{max_ratio:.3f}")]
    table = [{"instances": instances, "applicable": applicable_count,
              "violations": violations, "max_ratio": max_ratio}]
    return {"summary": table}, verdicts


def _run_diagonal_sharpness(cfg, rng, threads):
    tol = cfg.get("tolerances", {}).get("exact", 1e-9)
    s_grid = np.linspace(0.0, 1.0, 401)

    def row(k):
        deg = 2 * k
        norm, u, _rule = _fs_norm(deg, 1)  # H^0(O(2k)), round metric on O(1)
        mid = deg // 2  # basis index of x^k y^k
        p_mid = np.zeros((deg + 1, deg + 1), dtype=complex)
        p_mid[mid, mid] = 1.0
        t_op = hermitian.OperatorOnSections(
            matrix=0.5 * (np.eye(deg + 1) + math.sqrt(k) * p_mid),
            reference_norm=norm)
        norm_gap = abs(hermitian.schatten_norm(t_op, float("inf"))
                       - (math.sqrt(k) + 1) / 2)
        sup_diag = max(
            abs(bergman.diagonal_kernel(
                t_op, deg, norm, u, sections.PointP1.from_moment(float(s))))
            for s in np.concatenate([s_grid, [0.5]]))
        # alternating-sign operator on H^0(O(k)), round metric
        norm1, u1, _ = _fs_norm(k, 1)
        alt = hermitian.OperatorOnSections(
            matrix=np.diag(((-1.0) ** np.arange(k, -1, -1)).astype(complex)),
            reference_norm=norm1)
        schatten_gap = max(
            abs(hermitian.schatten_norm(alt, p) - 1.0)
            for p in (1.0, 2.0, float("inf")))
        rule = sections.QuadratureRule.gauss_legendre(
            max(2 * (k + 2), 64), breakpoints=(0.5,))
        diag_vals = np.array([
            bergman.diagonal_kernel(alt, k, norm1, u1,
                                    sections.PointP1.from_moment(float(s)))
            for s in rule.nodes])
        mass = float(np.sum(rule.weights * np.abs(diag_vals)))
        return {"k": k, "prop41_norm_gap": norm_gap, "sup_diag": sup_diag,
                "diag_bound": 2.0 * k + 1.0, "alt_schatten_gap": schatten_gap,
                "alt_mass_over_k": mass / k}

    rows = _pmap(row, cfg["k_grid"], threads)
    verdicts = [
        bound_verdict("prop41-norm-equality", "diagonal-kernel-sharpness",
                      max(r["prop41_norm_gap"] for r in rows), tol,
                      "||(Id + sqrt(k) P)/2|| = (sqrt(k)+1)/2"),
        Verdict("prop41-diagonal-bound", "diagonal-kernel-sharpness",
                all(r["sup_diag"] <= r["diag_bound"] + 1e-9 for r in rows),
                max(r["sup_diag"] / r["diag_bound"] for r in rows), 1.0,
                "sup_x |T_{2k}(x)| <= 2k+1 on the moment grid"),
        bound_verdict("alt-unit-schatten", "diagonal-kernel-sharpness",
                      max(r["alt_schatten_gap"] for r in rows), 1e-12,
                      "alternating operator has unit Schatten norms"),
        trend_verdict("alt-mass-trend", "diagonal-kernel-mass-decay",
                      [r["alt_mass_over_k"] for r in rows],
                      cfg.get("trend_ratio", 0.25),
                      "L^1 diagonal-kernel mass / k of the alternating operator"),
    ]
    return {"per_k": rows}, verdicts


# --------------------------------------------------------------------
# catalog and runner


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    tag: str
    claim: str
    defaults: dict
    runner: callable


CATALOG = {
    e.name: e for e in [
        CatalogEntry(
            "tian", "bergman-density-limit",
            "The Bergman density B_k/k converges uniformly to 1 for a "
            "positive metric; with the round metric the table is exactly "
            "(k+1)/k.",
            {"k_grid": [8, 16, 32, 64],
             "metric": {"type": "moment-linear", "d": 1, "data": 0.1},
             "points": {"count": 200, "kind": "grid"}, "trend_ratio": 0.5},
            _run_tian),
        CatalogEntry(
            "example1", "vanishing-order-closed-forms",
            "Scaled-cap vanishing-order filtration on O(1): weight operator, "
            "weighted Bergman kernel and geodesic-ray FS ratio have closed "
            "forms, exact at every k; the normalized kernel tends to 1 off "
            "the base point and 0 at it.",
            {"k_grid": [2, 4, 8, 16, 32], "k_table": 256,
             "filtration": EXAMPLE1_DOC, "tolerances": {"closed_form": 1e-10}},
            _run_example1),
        CatalogEntry(
            "example2", "weight-symbol-envelope",
            "Hard-cap vanishing-order filtration on O(2): the concave "
            "envelope of normalized weights equals min(2s, 1).",
            {"k_grid": [8, 16, 32, 64], "k_ref": 512,
             "filtration": EXAMPLE2_DOC,
             "points": {"count": 200, "kind": "grid"},
             "tolerances": {"symbol": 1e-8}},
            _run_example2),
        CatalogEntry(
            "weight-toeplitz", "weight-operator-toeplitz-limit",
            "A(F, Hilb_k)/k approaches the Toeplitz operator of the weight "
            "symbol in operator norm (hard-cap filtration).",
            {"k_grid": [8, 16, 32, 64], "k_ref": 512,
             "filtration": EXAMPLE2_DOC, "trend_ratio": 0.5},
            _run_weight_toeplitz),
        CatalogEntry(
            "transfer-toeplitz", "transfer-toeplitz-symbol",
            "The transfer map between Hilbert norms of geodesic endpoints, "
            "over k, is asymptotically the Toeplitz operator of the geodesic "
            "velocity symbol; exactly for constant shifts.",
            {"k_grid": [8, 16, 32, 64], "shift": 0.35,
             "metric": {"type": "constant", "d": 1, "data": 0.0},
             "metric_end": {"type": "moment-linear", "d": 1, "data": 0.2},
             "tolerances": {"exact": 1e-9}, "trend_ratio": 0.5},
            _run_transfer_toeplitz),
        CatalogEntry(
            "schatten-limit", "schatten-symbol-limit",
            "For the non-finitely-generated scaled-cap filtration, the "
            "Schatten p-distance of A/k to T_1 vanishes for finite p while "
            "the operator-norm distance stays at 1.",
            {"k_grid": [8, 16, 32, 64, 128, 256], "p_list": [1, 2, 4],
             "filtration": EXAMPLE1_DOC, "trend_ratio": 0.5},
            _run_schatten_limit),
        CatalogEntry(
            "product-symbol", "toeplitz-product-symbol",
            "Toeplitz composition is a Toeplitz operator of the product "
            "symbol to leading order, and Schatten norms converge to L^p "
            "norms of the symbol.",
            {"k_grid": [8, 16, 32, 64], "p_list": [1, 2], "trend_ratio": 0.5},
            _run_product_symbol),
        CatalogEntry(
            "functional-calculus", "cap-equals-min-calculus",
            "min(A/k, c) is the rescaled weight operator of the capped "
            "filtration, and the weighted-kernel trace identity holds.",
            {"k_grid": [2, 4, 8, 16, 32], "k_equality": 6, "cap_c": 0.7,
             "filtration": EXAMPLE2_DOC,
             "tolerances": {"exact": 1e-10, "trace": 1e-8}},
            _run_functional_calculus),
        CatalogEntry(
            "superadditivity", "weighted-kernel-superadditivity",
            "B^F_k + B^F_l - B^F_{k+l} <= C log(k+l) pointwise with a "
            "stable fitted C on both example filtrations.",
            {"kl_grid": [8, 16, 32], "points": {"count": 50, "seed": 11}},
            _run_superadditivity),
        CatalogEntry(
            "asymptotic-isometry", "multiplication-asymptotic-isometry",
            "Multiplication is an asymptotic isometry: the quotient-to-"
            "direct norm ratio times (kl/(k+l))^(1/2) tends to 1 at rate "
            "1/k + 1/l on every monomial.",
            {"kl_grid": [8, 16, 32, 64]},
            _run_asymptotic_isometry),
        CatalogEntry(
            "jumping-measure", "jumping-measure-weak-limit",
            "The spectral measure of A/k is the jumping measure at every k "
            "and converges weakly (hard-cap example: uniform/2 plus an atom "
            "of mass 1/2 at 1); the normalized weight sum estimates the "
            "filtration volume 3/2.",
            {"k_grid": [4, 8, 16, 32], "k_limit": 256, "k_vol": 128,
             "filtration": EXAMPLE2_DOC, "resolution": 4096,
             "tolerances": {"exact": 1e-9, "kolmogorov": 0.05}},
            _run_jumping_measure),
        CatalogEntry(
            "cholesky-stability", "weight-operator-stability",
            "Randomized suite: under the smallness hypothesis the weight-"
            "operator deviation between nearby norms obeys the "
            "16 c (1+2 ceil(log2 dim)) ||F|| bound with zero violations.",
            {"instances": 1000, "dim_max": 16},
            _run_cholesky_stability),
        CatalogEntry(
            "diagonal-sharpness", "diagonal-kernel-sharpness",
            "Diagonal kernels cannot control operator norms: the rank-one "
            "spike has norm (sqrt(k)+1)/2 with bounded diagonal, and the "
            "alternating operator has unit Schatten norms with vanishing "
            "L^1 diagonal mass / k.",
            {"k_grid": [8, 16, 32, 64], "trend_ratio": 0.25,
             "tolerances": {"exact": 1e-9}},
            _run_diagonal_sharpness),
    ]
}


def list_experiments():
    """Catalog: name -> (tag, claim, default config)."""
    return {
        name: {"tag": e.tag, "claim": e.claim, "defaults": e.defaults}
        for name, e in CATALOG.items()
    }


def validate_config(doc):
    """Schema and semantic diagnostics for a config document; empty list
    means valid."""
    issues = []
    if not isinstance(doc, dict):
        return ["config: top level must be a JSON object"]
    name = doc.get("experiment")
    if not name:
        issues.append("experiment: missing required field")
    elif name not in CATALOG:
        issues.append(f"experiment: unknown name {name!r}; "
                      f"known: {sorted(CATALOG)}")
        return issues
    defaults = CATALOG[name].defaults if name in CATALOG else {}
    needs_k = "k_grid" in defaults
    k_grid = doc.get("k_grid")
    if needs_k:
        if not k_grid:
            issues.append("k_grid: missing or empty (must be a nonempty "
                          "ascending list of degrees)")
        elif (not isinstance(k_grid, list) or
              any(int(k) <= 0 for k in k_grid) or
              any(b <= a for a, b in zip(k_grid, k_grid[1:]))):
            issues.append("k_grid: must be a nonempty ascending list of "
                          "positive degrees")
    if "filtration" in doc:
        try:
            filt = filtrations.filtration_from_json(doc["filtration"])
            bad = filtrations.audit_submultiplicative(filt, k_max=6)
            if bad:
                k, l, i1, i2, gap = bad[0]
                issues.append(
                    "filtration: submultiplicativity audit failed, e.g. "
                    f"w_{k + l}({i1 + i2}) - w_{k}({i1}) - w_{l}({i2}) = "
                    f"{gap:.3e} (warning)")
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            issues.append(f"filtration: {exc}")
    if "metric" in doc:
        try:
            sections.MetricPotential.from_json(doc["metric"])
        except Exception as exc:  # noqa: BLE001
            issues.append(f"metric: {exc}")
    if "seed" in doc and (not isinstance(doc["seed"], int) or doc["seed"] < 0):
        issues.append("seed: must be a nonnegative integer")
    return issues


def run_experiment(config, threads=1):
    """Run one experiment from a config dict; returns ExperimentResult."""
    name = config.get("experiment")
    if name not in CATALOG:
        raise ExperimentUnknown(f"unknown experiment {name!r}")
    entry = CATALOG[name]
    cfg = {**entry.defaults, **{k: v for k, v in config.items()
                                if k != "experiment"}}
    if "tolerances" in entry.defaults and "tolerances" in config:
        cfg["tolerances"] = {**entry.defaults["tolerances"],
                             **config["tolerances"]}
    issues = [i for i in validate_config({**cfg, "experiment": name})
              if "(warning)" not in i]
    if issues:
        raise ConfigInvalid("; ".join(issues))
    seed = int(cfg.get("seed", 0))
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    tables, verdicts = entry.runner(cfg, rng, threads)
    runtime = time.perf_counter() - start
    return ExperimentResult(
        experiment=name, config={**cfg, "experiment": name, "seed": seed},
        tables=tables, verdicts=verdicts, runtime_seconds=runtime,
        meta={"tag": entry.tag, "claim": entry.claim, "threads": threads})


def write_result(result, out_dir):
    """Persist result.json plus one CSV per table; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for tname, rows in result.tables.items():
        path = out / f"{result.experiment}_{tname}.csv"
        with path.open("w", newline="") as fh:
            if rows:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                writer.writerows(rows)
        paths.append(path)
    doc = {
        "experiment": result.experiment,
        "config": result.config,
        "verdicts": [v.as_dict() for v in result.verdicts],
        "all_passed": result.all_passed,
        "runtime_seconds": result.runtime_seconds,
        "meta": result.meta,
        "tables": [p.name for p in paths],
    }
    jpath = out / "result.json"
    jpath.write_text(json.dumps(doc, indent=2, sort_keys=True))
    return [jpath, *paths]
