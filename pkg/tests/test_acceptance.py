"""Acceptance checks, one test per criterion, each printing a single PASS/FAIL line."""

import math
import warnings

import numpy as np
import pytest
from scipy import special as sp

from wgnlab.engine import (GNParams, MixedParams, check, check_mixed, lhs_scaling_exponent, scaling_exponent_gap,
                           separable_reference_ratio, verify_inequality, verify_mixed)
from wgnlab.grid import TestFunction, build_grid, corpus, sample
from wgnlab.norms import ProductGridFunction, mixed_norm, weighted_norm
from wgnlab.sparse import (build_lattices, build_sparse_family, check_sparsity, domination_report,
                           fit_maximal_bound, grand_maximal_operator, imaginary_power_growth, indicator_ball,
                           maximal_operator)
from wgnlab.special import (a_function, a_function_zero, bessel_kernel, bessel_normalization, gamma,
                            multiplier_constants)
from wgnlab.spectral import apply_multiplier, riesz, riesz_identity_error, semigroup_check
from wgnlab.weights import apq_check, bracket, estimate_apq_constant, power_law


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


def solve_r(d, p, q, s, t, theta, alpha, beta, gamma, **kw):
    """Homogeneous tuple with ``r`` solved from the balance equality."""
    inv = theta * (1 / p - (s - alpha) / d) + (1 - theta) * (1 / q + beta / d) + (t - gamma) / d
    return GNParams(d, p, q, 1 / inv, s, t, theta, alpha, beta, gamma, **kw)


HOMOGENEOUS = [
    solve_r(1, 1.5, 4, 2, 0.5, 0.25, -0.14, -0.02, -0.05),     # theta = t/s
    solve_r(1, 2, 1.5, 1.5, 0.75, 0.5, -0.19, -0.04, -0.115),  # theta = t/s = 1/2
    solve_r(2, 2, 1.5, 1.5, 0.75, 0.5, -0.11, -0.01, -0.06),   # theta = t/s = 1/2
    solve_r(2, 2, 2, 0.5, 0.125, 0.5, -0.3, -0.32, -0.391),
    solve_r(1, 3, 2, 1, 0.2, 0.5, 0.2, -0.1, -0.1),
    solve_r(2, 2, 3, 1.5, 0.3, 0.5, 0.3, 0.2, 0.05),
    solve_r(1, 1.5, 3, 0.5, 0.25, 1.0, -0.02, 0.09, -0.202),
    solve_r(1, 2, 2, 0.8, 0.2, 1.0, 0.2, 0.0, -0.1),
    solve_r(2, 1.5, 3, 1, 0.25, 1.0, 0.28, -0.2, -0.253),
    solve_r(2, 2, 2, 1, 0.0, 1.0, 0.5, 0.0, 0.0),
]

BRACKET = [
    GNParams(1, 2, 2, 4, 1, 0, 0.5, 0.3, 0.3, 0.0, weight_family="bracket"),
    GNParams(1, 2, 2, 4, 1, 0, 0.5, 0.3, 0.3, 0.0, derivative_family="bessel", weight_family="bracket"),
    GNParams(1, 3, 2, 6.7, 0.5, 0.125, 0.75, 0.09, 0.1, 0.04, weight_family="bracket"),
    GNParams(2, 2, 2, 6, 1, 0, 2 / 3, weight_family="bracket"),
    GNParams(2, 2, 2, 6, 1, 0, 2 / 3, derivative_family="bessel", weight_family="bracket"),
    GNParams(2, 3, 1.5, 7.4, 1.5, 0.0, 0.5, 0.19, 0.02, 0.014, weight_family="bracket"),
]

INADMISSIBLE = [
    HOMOGENEOUS[0].replace(gamma=HOMOGENEOUS[0].gamma + 0.1),   # balance broken
    GNParams(3, 2, 2, 2, 1, 0, 1.0, gamma=1.0),                  # gamma above the gap range
    GNParams(1, 2, 2, 4, 1, 0.6, 0.5),                           # theta below t/s
    GNParams(2, 2, 2, 3, 1, 0, 2 / 3, weight_family="bracket"),  # misses the exponent chain
    GNParams(1, 2, 2, 4, 1, 0, 0.5, 0.3, 0.3, 0.5, weight_family="bracket"),
]


def verify_corpus(g, modes=(4, 6)):
    w = g.extent / 10
    e1 = np.zeros(g.dim)
    e1[0] = 1.0
    return [TestFunction.modulated_gaussian(0.0, w, (m / w) * e1) for m in modes]


def test_spectral_identity():
    worst = 0.0
    for d, N, alphas in ((1, 256, (0.3, 0.7)), (2, 128, (0.5, 1.2))):
        g = build_grid(d, 10.0, N)
        for f in corpus(g, "zero-moment"):
            for a in alphas:
                worst = max(worst, riesz_identity_error(f, a))
    report("spectral identity", worst <= 0.01, f"max relative L2 error {worst:.2e} (tol 1e-2)")


def test_semigroup_exactness():
    rng = np.random.default_rng(2)
    worst, n = 0.0, 0
    grids = {1: build_grid(1, 10.0, 256), 2: build_grid(2, 10.0, 64)}
    while n < 20:
        d = 1 + n % 2
        z1, z2 = (complex(rng.uniform(-0.5, 2.0), rng.uniform(-3, 3)) for _ in range(2))
        if (z1 + z2).real < -d + 0.1:
            continue
        for f in corpus(grids[d], "zero-moment"):
            worst = max(worst, semigroup_check(f, z1, z2))
        n += 1
    report("semigroup exactness", worst <= 1e-12, f"max relative error {worst:.2e} over 20 pairs (tol 1e-12)")


def test_gamma_identities():
    rng = np.random.default_rng(3)
    z = rng.uniform(-6, 8, 50) + 1j * rng.uniform(-10, 10, 50)
    err = float(np.max(np.abs(gamma(z) / sp.gamma(z) - 1)))
    zeros = max(abs(complex(a_function(a_function_zero(k)))) for k in (-2, -1, 1, 2))
    report("gamma identities", err <= 1e-10 and zeros <= 1e-10,
           f"gamma vs scipy {err:.2e}, |A| at zeros {zeros:.2e} (tol 1e-10)")


def test_multiplier_constants():
    taus = np.geomspace(0.1, 50, 200)
    violations = sum(abs(mc.alpha) > mc.p_bound
                     for d in (1, 2, 3) for mc in (multiplier_constants(t, d) for t in taus))
    report("multiplier constants", violations == 0, f"{violations} violations on 200 log-spaced tau x 3 dims")


def test_bessel_kernel():
    norm_err = max(abs(bessel_normalization(a, d) - 1) for a in (0.5, 1.0, 2.5) for d in (1, 2))
    radii = np.linspace(0.05, 3.0, 10)
    closed = max(abs(bessel_kernel(2.0, r, 1) / (math.pi * math.exp(-2 * math.pi * r)) - 1) for r in radii)
    report("Bessel kernel", norm_err <= 1e-4 and closed <= 1e-6,
           f"|norm-1| {norm_err:.2e} (tol 1e-4), closed form {closed:.2e} (tol 1e-6)")


MARGIN = 0.35  # exponent slack; per-decade growth 10^0.35 > 2 clears the divergence threshold


def _apq_tuple(rng):
    while True:
        kind = str(rng.choice(["power_law", "bracket"]))
        d = int(rng.integers(1, 4))
        p = rng.uniform(1.2, 4)
        q = rng.uniform(p, 6)
        lo = d / p - d / q
        alpha = rng.uniform(lo - 0.6, min(d, lo + 1.5) if kind == "bracket" else lo + 1.5)
        if kind == "power_law":
            a = rng.uniform(-d, d * (p - 1) + 0.8)
            b = q * (a / p - (alpha - lo))
            if rng.random() < 0.5:
                b += q * rng.choice([-1, 1]) * rng.uniform(MARGIN, 1.0)
        else:
            # the closed form characterizes the class only under its preconditions
            a = rng.uniform(-d, d * (p - 1) - MARGIN)
            b = rng.uniform(-d + MARGIN, d)
        v = apq_check(kind, a, b, p, q, alpha, d)
        if all(abs(c.slack) >= MARGIN or (c.name.startswith("alpha - d/p + d/q =") and c.satisfied)
               for c in v.conditions):
            return kind, d, p, q, alpha, a, b, v


def test_muckenhoupt_cross_validation():
    rng = np.random.default_rng(11)
    disagree, drift, n_in = 0, 1.0, 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(100):
            kind, d, p, q, alpha, a, b, v = _apq_tuple(rng)
            W = power_law if kind == "power_law" else bracket
            e8 = estimate_apq_constant(W(a), W(b), p, q, alpha, d, decades=8)
            disagree += e8.diverged == v.in_class
            if v.in_class:
                n_in += 1
                e4 = estimate_apq_constant(W(a), W(b), p, q, alpha, d, decades=4)
                drift = max(drift, e8.value / e4.value)
    report("Muckenhoupt cross-validation", disagree == 0 and drift < 2 and n_in > 0,
           f"{disagree} disagreements on 100 tuples ({n_in} in class), in-class drift {drift:.3f} (tol 2)")


def _sparse_functions(g):
    gauss = lambda c, w: sample(TestFunction.gaussian(c, w), g, warn=False)
    return [indicator_ball(g, 0.0, 1.0), indicator_ball(g, -2.0, 1.0) + indicator_ball(g, 3.0, 0.5),
            gauss(0.0, 1.0), gauss(1.5, 0.5), indicator_ball(g, 0.7, 3.0)]


def test_sparse_machinery():
    ok, stability = True, 1.0
    for d, alpha, sizes in ((1, 0.5, (128, 256)), (2, 1.0, (64, 128))):
        consts = []
        for N in sizes:
            g = build_grid(d, 16.0, N)
            lats = build_lattices(d, g)
            row = []
            for f in _sparse_functions(g):
                ok &= all(check_sparsity(build_sparse_family(f, lat, 2.0), 0.5).passed for lat in lats)
                rep = domination_report(f, alpha, 2.0, lats)
                ok &= bool(np.all(rep.sparse_sum <= rep.dyadic_sum * (1 + 1e-12)))
                row.append((rep.lower_constant, rep.upper_constant, rep.sparse_constant))
            consts.append(np.array(row))
        ok &= bool(np.all(np.isfinite(consts[0])) and np.all(consts[0] > 0))
        stability = max(stability, float(np.max(np.maximum(consts[1] / consts[0], consts[0] / consts[1]))))
    report("sparse machinery", ok and stability < 2,
           f"eta=1/2 sparsity and two-sided domination {'hold' if ok else 'fail'}, refinement factor {stability:.3f} (tol 2)")


def test_maximal_bound():
    taus = [1.0, 5.0, 20.0]
    ok, parts = True, []
    for d, L, N, radius in ((1, 8.0, 128, 1.0), (2, 8.0, 32, 1.0), (3, 8.0, 32, 0.75)):
        g = build_grid(d, L, N)
        fs = [indicator_ball(g, 0.0, radius)]
        if d < 3:
            fs.append(sample(TestFunction.gaussian(0.5, 0.8), g, warn=False))
        fit = fit_maximal_bound(fs, taus, n_points=100)
        ok &= math.isfinite(fit.constant) and fit.constant > 0
        held = 0.0
        if d < 3:  # a second draw of 100 points must respect the same constant
            rng = np.random.default_rng(99)
            for f in fs:
                pts = [tuple(rng.integers(0, N, d)) for _ in range(100)]
                mt = grand_maximal_operator(f, taus, pts)
                mf = maximal_operator(f)[tuple(np.array(pts).T)]
                held = max(held, float(np.max(mt / ((1 + np.array(taus))[None, :] * mf[:, None]))))
            ok &= held <= 2 * fit.constant
        parts.append(f"C_{d}={fit.constant:.3f}")
    report("maximal bound", ok, ", ".join(parts) + " at 100 points, tau in {1,5,20}")


def test_weighted_imaginary_growth():
    g = build_grid(1, 20.0, 512)
    fs = [sample(TestFunction.gaussian(0.0, 1.0), g)] + corpus(g, "zero-moment")
    taus = np.linspace(0.0, 50.0, 51)
    sup, slope = 0.0, -math.inf
    for a in (-0.5, 0.5):
        for f in fs:
            scan = imaginary_power_growth(f, a, taus)
            sup = max(sup, float(scan.normalized.max()))
            slope = max(slope, scan.fitted_slope)
    report("weighted imaginary-order growth", math.isfinite(sup) and slope <= 0,
           f"sup {sup:.3f}, largest fitted slope {slope:.3f} (need <= 0)")


def test_gn_verification():
    grids = {1: build_grid(1, 20.0, 512), 2: build_grid(2, 20.0, 256)}
    adm_ok = all(check(P).admissible for P in HOMOGENEOUS + BRACKET)
    thetas = {round(P.theta, 6) for P in HOMOGENEOUS}
    span = any(P.theta == P.t / P.s for P in HOMOGENEOUS) and {0.5, 1.0} <= thetas
    finite, ref, dil = True, 0.0, 0.0
    for P in HOMOGENEOUS + BRACKET:
        g = grids[P.d]
        dils = (0.8, 1.25) if P.weight_family == "power_law" else ()
        rep = verify_inequality(P, verify_corpus(g), g, dilations=dils)
        finite &= all(math.isfinite(r.ratio) and r.ratio > 0 for r in rep.rows)
        ref = max(ref, rep.refinement_drift)
        if dils:
            dil = max(dil, rep.dilation_drift)
    rejected = 0
    for P in INADMISSIBLE:
        try:
            verify_inequality(P, [object()], build_grid(P.d, 8.0, 8))  # never touched if the gate fires first
        except ValueError as exc:
            rejected += str(exc).startswith("inadmissible parameters")
    ok = adm_ok and span and finite and ref < 0.1 and dil < 0.05 and rejected == len(INADMISSIBLE)
    report("GN verification", ok,
           f"{len(HOMOGENEOUS)}+{len(BRACKET)} tuples, refinement drift {ref:.2e} (tol 0.1), "
           f"dilation drift {dil:.2e} (tol 0.05), {rejected}/{len(INADMISSIBLE)} controls rejected")


def _lhs(P, f):
    g = apply_multiplier(f, riesz(P.t)) if P.t else f
    return weighted_norm(g, P.weight(P.gamma * P.r), P.r)


def test_scaling_balance():
    gap = max(abs(scaling_exponent_gap(P)) for P in HOMOGENEOUS)
    g = build_grid(1, 40.0, 4096)
    lams = np.geomspace(0.5, 2.0, 5)
    base = TestFunction.modulated_gaussian(0.0, 1.0, 4.0)
    worst = 0.0
    for P in (P for P in HOMOGENEOUS if P.d == 1):
        e = lhs_scaling_exponent(P)
        vals = [_lhs(P, sample(TestFunction.dilated(base, lam), g)) for lam in lams]
        worst = max(worst, abs(np.polyfit(np.log(lams), np.log(vals), 1)[0] / e - 1))
    # plain Gaussian dilation family for an underived left side
    P0 = solve_r(1, 2, 2, 1, 0.0, 0.5, 0.2, 0.1, -0.15)
    assert check(P0).admissible
    fam = corpus(g, "dilation-family")
    lam0 = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
    slope0 = np.polyfit(np.log(lam0), np.log([_lhs(P0, f) for f in fam]), 1)[0]
    worst = max(worst, abs(slope0 / lhs_scaling_exponent(P0) - 1))
    report("scaling balance", gap <= 1e-12 and worst <= 0.02,
           f"max |gap| {gap:.1e} (tol 1e-12), max relative slope error {worst:.2e} (tol 0.02)")


def test_mixed_norms():
    rng = np.random.default_rng(12)
    gx, gy = build_grid(1, 8.0, 32), build_grid(1, 6.0, 24)
    viol = 0
    for _ in range(20):
        p = rng.uniform(1.0, 4.0)
        q = rng.uniform(p, 6.0)
        F = ProductGridFunction(gx, gy, rng.normal(size=(32, 24)) + 1j * rng.normal(size=(32, 24)))
        viol += mixed_norm(F, p, q, "y_outer") > mixed_norm(F, p, q, "x_outer") * (1 + 1e-13)
    M = MixedParams(2, 4, 0.75, 1.0, 3, 1)
    g3, gy = build_grid(3, 20.0, 32), build_grid(1, 8.0, 32)
    g = sample(TestFunction.modulated_gaussian(0.0, 4.0, (1.0, 0, 0)), g3, warn=False)
    h = sample(TestFunction.gaussian(0.0, 1.0), gy)
    other = ProductGridFunction(g3, gy, np.outer(g.flat, h.flat) + np.outer(g.flat * 0.5, h.flat**2))
    rep = verify_mixed(M, [ProductGridFunction.separable(g, h), other])
    mismatch = abs(rep.rows[0].ratio / separable_reference_ratio(M, g) - 1)
    ok = (viol == 0 and check_mixed(M).admissible and all(math.isfinite(r.ratio) for r in rep.rows)
          and mismatch <= 1e-10)
    report("mixed norms", ok, f"{viol} Minkowski violations on 20 F, separable mismatch {mismatch:.1e}")
