"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""

import json
import math
import time

import numpy as np

from curvlab.checks import (
    check_constants_ordering,
    check_contracted_bach_identity,
    check_okumura,
    check_ricci_identity,
    check_weyl_laplacian_einstein,
    default_lambdas,
    okumura_terms,
    pinch_pointwise_thm11,
    symmetry_catalog_from_bundle,
    weyl_laplacian_terms,
)
from curvlab.cli import main
from curvlab.constants import c_n
from curvlab.curvature import curvature_bundle
from curvlab.quadrature import sobolev_quotient, volume
from curvlab.tensors import norm
from curvlab.zoo import conformal, euclidean, hyperbolic, perturbation, product_spheres, sample_points, sphere

from conftest import record_acceptance

SEEDS = (0, 1, 2)
DIMS = (4, 5, 6)


def test_criterion_01_sphere_oracle():
    t0 = time.perf_counter()
    worst_r, worst_t = 0.0, 0.0
    for n in DIMS:
        m = sphere(n, 1.0)
        b = curvature_bundle(m, sample_points(m, 20, n))
        worst_r = max(worst_r, float(np.max(np.abs(b.scalar - n * (n - 1)) / (n * (n - 1)))))
        for t in (b.weyl, b.traceless_ricci, b.cotton, b.bach):
            worst_t = max(worst_t, float(np.max(norm(t, b.g_inv))))
    elapsed = time.perf_counter() - t0
    ok = worst_r <= 1e-7 and worst_t <= 1e-7 and elapsed <= 10
    record_acceptance(1, ok, f"max rel |R - n(n-1)| = {worst_r:.2e}, max |W|,|R0|,|C|,|B| = {worst_t:.2e}, "
                             f"{elapsed:.1f} s")
    assert ok


def test_criterion_02_bach_forms():
    worst, worst_div = 0.0, 0.0
    for n in DIMS:
        for seed in SEEDS:
            m = perturbation(n, seed)
            pts = sample_points(m, 20, seed)
            b = curvature_bundle(m, pts)
            diff = norm(b.bach - b.bach_cotton, b.g_inv)
            scale = np.maximum(np.maximum(norm(b.bach, b.g_inv), norm(b.bach_cotton, b.g_inv)), 1e-12)
            worst = max(worst, float(np.max(diff / scale)))
            cat = symmetry_catalog_from_bundle(b, m.name, pts)
            worst_div = max(worst_div, cat.detail["entries"]["divergence_cotton"]["residual"])
    ok = worst <= 1e-6 and worst_div <= 1e-6
    record_acceptance(2, ok, f"max relative Bach-form disagreement {worst:.2e}, div W vs Cotton {worst_div:.2e}")
    assert ok


def test_criterion_03_identity_chain():
    m = product_spheres(2, 1.0, 2, 2.0)
    pts = sample_points(m, 20, 0)
    r1 = check_ricci_identity(m, pts)
    r2 = check_contracted_bach_identity(m, pts)
    ok = r1.verdict == "pass" and r2.verdict == "pass" and r1.residual <= 1e-6 and r2.residual <= 1e-6
    record_acceptance(3, ok, f"Ricci-identity residual {r1.residual:.2e}, contracted-Bach residual {r2.residual:.2e}")
    assert ok


def test_criterion_04_okumura():
    violations, worst_norm, evaluated = 0, 0.0, 0
    for n in DIMS:
        lams = sorted(set(default_lambdas(n)))
        for seed in SEEDS:
            m = perturbation(n, seed)
            pts = sample_points(m, 50, 100 + seed)
            rep = check_okumura(m, pts, lambdas=lams)
            violations += rep.detail["violations"]
            worst_norm = max(worst_norm, rep.detail["norm_identity_residual"])
            evaluated += len(pts) * len(lams)
            b = curvature_bundle(m, pts, order=2)
            for lam in lams:
                lhs, rhs, _, _ = okumura_terms(b.weyl, b.traceless_ricci, b.g, b.g_inv, lam)
                violations += int(np.sum(lhs > rhs * (1 + 1e-9) + 1e-15))
    ok = violations == 0 and worst_norm <= 1e-9
    record_acceptance(4, ok, f"{violations} violations in {evaluated} (point, lambda) pairs, "
                             f"norm-equality residual {worst_norm:.2e}")
    assert ok


def test_criterion_05_constants():
    rep = check_constants_ordering()
    cmp = rep.detail["comparisons"]
    ok = (
        c_n(4) == math.sqrt(6) / 4
        and c_n(5) == 4 * math.sqrt(10) / 15
        and abs(cmp["n4_thm11_ratio"]["lhs"] - 0.1767767) < 1e-7
        and abs(cmp["n5_thm11_ratio"]["lhs"] - 0.1721325) < 1e-7
        and cmp["n4_thm11_ratio"]["holds"]
        and cmp["n5_thm11_ratio"]["holds"]
        and "n4_thm12_vs_printed_C4" in cmp
        and "n4_thm12_vs_E4" in cmp
        and rep.detail["n4_discrepancy_flagged"]
    )
    record_acceptance(5, ok, f"C4 = {c_n(4):.7f}, C5 = {c_n(5):.7f}, ratios {cmp['n4_thm11_ratio']['lhs']:.7f} < 0.25, "
                             f"{cmp['n5_thm11_ratio']['lhs']:.7f} < 0.2, n=4 discrepancy flagged")
    assert ok


def test_criterion_06_borderline_equality():
    m = product_spheres(2, 1.0, 2, 1.0)
    pts = sample_points(m, 20, 0)
    b = curvature_bundle(m, pts)
    cw = c_n(4) * norm(b.weyl, b.g_inv)
    r_over_n = b.scalar / 4
    lhs, t1, t2, t3 = weyl_laplacian_terms(b)
    margin = lhs - (t1 + t2 + t3)
    rep = check_weyl_laplacian_einstein(m, pts)
    ok = (
        np.all(np.abs(cw - 1.0) <= 1e-5)
        and np.all(np.abs(r_over_n - 1.0) <= 1e-5)
        and np.all(np.abs(margin) <= 1e-5)
    )
    record_acceptance(6, ok, f"C4|W| = {cw.max():.6f} (target 1), R/4 = {r_over_n.max():.6f}, "
                             f"Weyl-Laplacian margin = {margin.max():.6f} (target 0), suite verdict {rep.verdict}")
    assert ok


def test_criterion_07_pinch_negative():
    m = product_spheres(2, 1.0, 2, 1.0)
    pts = sample_points(m, 20, 0)
    rep = pinch_pointwise_thm11(m, pts)
    b = curvature_bundle(m, pts, order=2)
    lhs = norm(b.weyl, b.g_inv)
    rhs = b.scalar / math.sqrt(12)
    ok = (
        rep.verdict == "fails at all sampled points"
        and np.all(np.abs(lhs - 1.632993) <= 1e-5)
        and np.all(np.abs(rhs - 1.154701) <= 1e-5)
        and abs(rep.residual - (1.154701 - 1.632993)) <= 1e-5
    )
    record_acceptance(7, ok, f"verdict '{rep.verdict}', |W| = {lhs.max():.6f} (target 1.632993), "
                             f"R/sqrt(12) = {rhs.max():.6f} (target 1.154701)")
    assert ok


def test_criterion_08_quadrature():
    t0 = time.perf_counter()
    s4 = sphere(4, 1.0)
    s2s2 = product_spheres(2, 1.0, 2, 1.0)
    v4 = volume(s4)
    v22 = volume(s2s2)
    q = sobolev_quotient(s4, "1")
    elapsed = time.perf_counter() - t0
    e1 = abs(v4.value / (8 * math.pi**2 / 3) - 1)
    e2 = abs(v22.value / (16 * math.pi**2) - 1)
    e3 = abs(q.value / (2 * math.sqrt(8 * math.pi**2 / 3)) - 1)
    refine = max(v4.rel_change, v22.rel_change, q.rel_change)
    ok = e1 <= 1e-3 and e2 <= 1e-3 and e3 <= 2e-3 and refine <= 1e-2 and elapsed <= 60
    record_acceptance(8, ok, f"Vol(S4) err {e1:.1e}, Vol(S2xS2) err {e2:.1e}, Q(u=1) = {q.value:.4f} err {e3:.1e}, "
                             f"max refinement change {refine:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_09_kato():
    metrics = [
        euclidean(4),
        sphere(4, 1.0),
        sphere(5, 2.0),
        hyperbolic(4),
        product_spheres(2, 1.0, 2, 1.0),
        product_spheres(2, 1.0, 2, 2.0),
        product_spheres(2, 1.0, 3, 1.5),
        conformal(4, "0.1*x1^2"),
        conformal(5, "0.2*x1*x2 - 0.1*x3^2 + 0.05*x4"),
    ] + [perturbation(n, s) for n in DIMS for s in SEEDS]
    worst, applicable = -np.inf, 0
    for m in metrics:
        b = curvature_bundle(m, sample_points(m, 20, 9), order=3)
        r0 = norm(b.traceless_ricci, b.g_inv)
        mask = r0 > 1e-6
        if not np.any(mask):
            continue
        dn = np.nan_to_num(b.traceless_ricci_norm_grad)
        lhs = np.sqrt(np.einsum("...a,...ab,...b->...", dn, b.g_inv, dn))
        rhs = norm(b.grad_traceless_ricci, b.g_inv)
        worst = max(worst, float(np.max((lhs - rhs)[mask])))
        applicable += int(mask.sum())
    ok = worst <= 1e-8 and applicable > 0
    record_acceptance(9, ok, f"max (|grad|R0|| - |grad R0|) = {worst:.2e} over {applicable} applicable points")
    assert ok


def _suite_json(capsys):
    runs = [
        ["check", "--metric", "zoo:sphere", "--param", "n=4,r=1", "--all", "--seed", "3"],
        ["check", "--metric", "zoo:product_spheres", "--param", "p=2,a=1,q=2,b=2", "--all", "--seed", "3"],
        ["check", "--metric", "zoo:perturbation", "--param", "n=5,seed=2", "--all", "--seed", "3"],
        ["constants", "--n", "4", "--n", "5", "--n", "6"],
        ["sobolev", "--metric", "zoo:product_spheres", "--param", "p=2,a=1,q=2,b=1", "--pinching",
         "--resolution", "16"],
    ]
    out = []
    for argv in runs:
        main(argv)
        data = json.loads(capsys.readouterr().out)
        data.pop("timestamp")
        out.append(json.dumps(data, sort_keys=True))
    return out


def test_criterion_10_determinism(capsys):
    a = _suite_json(capsys)
    b = _suite_json(capsys)
    ok = a == b
    record_acceptance(10, ok, f"{len(a)} reports byte-identical across two runs (timestamp excluded)")
    assert ok
