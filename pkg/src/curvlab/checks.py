"""Pointwise identities, inequalities and pinching predicates as CheckReports.

Residual policy: an identity residual is ``|lhs - rhs| / ref`` where ``ref``
is the largest term entering the identity, floored by the point's curvature
scale ``|Rm|`` raised to the identity's curvature weight and by ``1e-12``.
The floor keeps identities between vanishing quantities (a round sphere's
Weyl tensor, say) from failing on rounding noise. Inequality margins are
``(larger side - smaller side) / ref`` and pass when ``>= -tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import E5_COEFFICIENT, c_n, constants, e_n
from .curvature import CurvatureBundle, cotton, curvature_bundle, weyl
from .tensors import kulkarni_nomizu, norm, norm2
from .zoo import MetricSpec

FLOOR = 1e-12

TOLERANCES = {
    "riemann_symmetries": 1e-8,
    "weyl_traceless": 1e-8,
    "weyl_forms": 1e-10,
    "decomposition_closure": 1e-9,
    "cotton_antisymmetry": 1e-9,
    "cotton_forms": 1e-9,
    "bach_symmetry": 1e-7,
    "divergence_cotton": 1e-6,
    "bach_forms": 1e-6,
    "bianchi_traceless_ricci": 1e-7,
    "kato": 1e-8,
    "ricci_identity": 1e-6,
    "contracted_bach": 1e-6,
    "okumura": 1e-9,
    "okumura_norm": 1e-9,
    "weyl_laplacian": 1e-6,
    "oracle": 1e-7,
    "constant_scalar_gate": 1e-6,
    "einstein_gate": 1e-7,
}

PASS, FAIL, INAPPLICABLE = "pass", "fail", "inapplicable"


@dataclass
class CheckReport:
    name: str
    metric: str
    points: int
    residual: float | None
    tolerance: float | None
    verdict: str
    worst_point: list | None = None
    kind: str = "identity"
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "metric": self.metric,
            "kind": self.kind,
            "verdict": self.verdict,
            "residual_or_margin": _clean(self.residual),
            "tolerance": self.tolerance,
            "points": self.points,
            "worst_point": self.worst_point,
            "detail": _clean(self.detail),
        }


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def metric_label(metric: MetricSpec) -> str:
    params = dict(metric.family_params or metric.params)
    inner = ",".join(f"{k}={params[k]}" for k in params)
    return f"{metric.name}({inner})" if inner else metric.name


def _tol(name: str, overrides: dict | None) -> float:
    if overrides and name in overrides:
        return float(overrides[name])
    return TOLERANCES[name]


def _point_list(points, k) -> list:
    return [float(v) for v in np.asarray(points)[k]]


def _identity_report(name, label, points, residuals, tol, kind="identity", detail=None):
    residuals = np.atleast_1d(np.asarray(residuals, dtype=float))
    k = int(np.argmax(residuals))
    worst = float(residuals[k])
    return CheckReport(
        name=name,
        metric=label,
        points=len(residuals),
        residual=worst,
        tolerance=tol,
        verdict=PASS if worst <= tol else FAIL,
        worst_point=_point_list(points, k),
        kind=kind,
        detail=detail or {},
    )


def _inequality_report(name, label, points, margins, tol, detail=None):
    margins = np.atleast_1d(np.asarray(margins, dtype=float))
    k = int(np.argmin(margins))
    worst = float(margins[k])
    return CheckReport(
        name=name,
        metric=label,
        points=len(margins),
        residual=worst,
        tolerance=tol,
        verdict=PASS if worst >= -tol else FAIL,
        worst_point=_point_list(points, k),
        kind="inequality",
        detail=detail or {},
    )


def _maxabs(t, nslots):
    axes = tuple(range(-nslots, 0))
    return np.max(np.abs(t), axis=axes) if nslots else np.abs(t)


def curvature_scale(b: CurvatureBundle) -> np.ndarray:
    return norm(b.riemann, b.g_inv)


def _ref(scale, weight, *terms):
    ref = np.maximum(scale**weight, FLOOR)
    for t in terms:
        ref = np.maximum(ref, np.abs(t))
    return ref


# ---------------------------------------------------------------------------
# algebraic building blocks


def _raise2(s, g_inv):
    return np.einsum("...ia,...ab,...bj->...ij", g_inv, s, g_inv)


def cubic_trace(s, g_inv):
    """tr(s^3) = s_i^j s_j^k s_k^i."""
    mixed = np.einsum("...ia,...aj->...ij", g_inv, s)
    return np.einsum("...ij,...jk,...ki->...", mixed, mixed, mixed)


def weyl_pairing(w, s, g_inv):
    """W_ijkl s^ik s^jl."""
    su = _raise2(s, g_inv)
    return np.einsum("...ijkl,...ik,...jl->...", w, su, su)


def laplacian(hess, g_inv):
    return np.einsum("...ab,...ab->...", hess, g_inv[(...,) + (None,) * (hess.ndim - g_inv.ndim)])


def _trace_last_two(hess, g_inv):
    nb = g_inv.ndim - 2
    r = hess.ndim - nb - 2
    idx = "abcdefgh"[:r]
    return np.einsum(f"...{idx}yz,...yz->...{idx}", hess, g_inv)


# ---------------------------------------------------------------------------
# checks


def check_constants_ordering() -> CheckReport:
    """Dimensional constant comparisons used to reach constant curvature."""
    entries = {}
    c4, c5 = c_n(4), c_n(5)
    a4 = c4 / math.sqrt(2 * 3 * 2)
    a5 = c5 / math.sqrt(2 * 4 * 3)
    entries["n4_thm11_ratio"] = {"lhs": a4, "rhs": 0.25, "holds": a4 < 0.25}
    entries["n5_thm11_ratio"] = {"lhs": a5, "rhs": 0.2, "holds": a5 < 0.2}
    s4 = math.sqrt(3 / 4)
    s5 = math.sqrt(4 / 6)
    entries["n4_thm12_vs_printed_C4"] = {"lhs": s4, "rhs": c4, "holds": s4 < c4}
    entries["n4_thm12_vs_E4"] = {"lhs": s4, "rhs": e_n(4), "holds": s4 < e_n(4)}
    entries["n5_thm12_vs_E5_coefficient"] = {"lhs": s5, "rhs": E5_COEFFICIENT, "holds": s5 < E5_COEFFICIENT}
    gating = ["n4_thm11_ratio", "n5_thm11_ratio", "n4_thm12_vs_E4", "n5_thm12_vs_E5_coefficient"]
    ok = all(entries[k]["holds"] for k in gating)
    margin = min(entries[k]["rhs"] - entries[k]["lhs"] for k in gating)
    discrepancy = entries["n4_thm12_vs_printed_C4"]["holds"] != entries["n4_thm12_vs_E4"]["holds"]
    return CheckReport(
        name="constants_ordering",
        metric="-",
        points=0,
        residual=margin,
        tolerance=0.0,
        verdict=PASS if ok else FAIL,
        kind="constant",
        detail={
            "comparisons": entries,
            "n4_discrepancy_flagged": discrepancy,
            "note": "n=4: sqrt(3/4) exceeds sqrt(6)/4 but not E_4 = sqrt(6); both reported",
        },
    )


def _bundle(metric, points, order, bundle):
    if bundle is not None:
        return bundle
    return curvature_bundle(metric, np.asarray(points, dtype=float), order=order)


def constant_scalar_gate(b: CurvatureBundle, tol: float) -> tuple[bool, float]:
    grad = norm(b.grad_scalar, b.g_inv)
    worst = float(np.max(grad))
    return worst <= tol, worst


def einstein_gate(b: CurvatureBundle, tol: float) -> tuple[bool, float]:
    worst = float(np.max(norm(b.traceless_ricci, b.g_inv)))
    return worst <= tol, worst


def _inapplicable(name, label, points, why, value):
    return CheckReport(
        name=name,
        metric=label,
        points=len(points),
        residual=None,
        tolerance=None,
        verdict=INAPPLICABLE,
        detail={"reason": why, "gate_value": value},
    )


def check_ricci_identity(metric, points, tolerances=None, bundle=None) -> CheckReport:
    """R0_kj,ij R0^ki = -W(R0, R0) + n/(n-2) tr R0^3 + R/(n-1) |R0|^2 (constant R)."""
    name = "ricci_identity"
    label = metric_label(metric)
    b = _bundle(metric, points, 4, bundle)
    ok, gv = constant_scalar_gate(b, _tol("constant_scalar_gate", tolerances))
    if not ok:
        return _inapplicable(name, label, points, "scalar curvature not constant on sample", gv)
    n, gi, ric0 = b.dim, b.g_inv, b.traceless_ricci
    inner_div = np.einsum("...kjia,...ja->...ki", b.hess_traceless_ricci, gi)
    lhs = np.einsum("...ki,...ki->...", inner_div, _raise2(ric0, gi))
    t1 = -weyl_pairing(b.weyl, ric0, gi)
    t2 = n / (n - 2) * cubic_trace(ric0, gi)
    t3 = b.scalar / (n - 1) * norm2(ric0, gi)
    rhs = t1 + t2 + t3
    ref = _ref(curvature_scale(b), 3, lhs, t1, t2, t3)
    res = np.abs(lhs - rhs) / ref
    return _identity_report(
        name, label, points, res, _tol(name, tolerances),
        detail={"max_abs_lhs": float(np.max(np.abs(lhs))), "max_abs_rhs": float(np.max(np.abs(rhs)))},
    )


def check_contracted_bach_identity(metric, points, tolerances=None, bundle=None) -> CheckReport:
    """(n-2) B.R0 = R0.Lap R0 - n/(n-2) tr R0^3 - R/(n-1)|R0|^2 + 2 W(R0, R0) (constant R)."""
    name = "contracted_bach"
    label = metric_label(metric)
    b = _bundle(metric, points, 4, bundle)
    ok, gv = constant_scalar_gate(b, _tol("constant_scalar_gate", tolerances))
    if not ok:
        return _inapplicable(name, label, points, "scalar curvature not constant on sample", gv)
    n, gi, ric0 = b.dim, b.g_inv, b.traceless_ricci
    ric0_up = _raise2(ric0, gi)
    lhs = (n - 2) * np.einsum("...ij,...ij->...", b.bach, ric0_up)
    lap = _trace_last_two(b.hess_traceless_ricci, gi)
    t1 = np.einsum("...ij,...ij->...", lap, ric0_up)
    t2 = -n / (n - 2) * cubic_trace(ric0, gi)
    t3 = -b.scalar / (n - 1) * norm2(ric0, gi)
    t4 = 2 * weyl_pairing(b.weyl, ric0, gi)
    rhs = t1 + t2 + t3 + t4
    ref = _ref(curvature_scale(b), 3, lhs, t1, t2, t3, t4)
    res = np.abs(lhs - rhs) / ref
    return _identity_report(
        name, label, points, res, _tol(name, tolerances),
        detail={
            "max_abs_lhs": float(np.max(np.abs(lhs))),
            "max_abs_rhs": float(np.max(np.abs(rhs))),
            "max_bach_norm": float(np.max(norm(b.bach, gi))),
        },
    )


def okumura_terms(w, ric0, g, g_inv, lam):
    """Both sides of the cubic estimate and both sides of its norm identity."""
    n = g.shape[-1]
    cubic = -weyl_pairing(w, ric0, g_inv) + lam * cubic_trace(ric0, g_inv)
    mixed = w + lam / math.sqrt(2 * n) * kulkarni_nomizu(ric0, g)
    mixed2 = norm2(mixed, g_inv)
    r2 = norm2(ric0, g_inv)
    w2 = norm2(w, g_inv)
    rhs = math.sqrt((n - 2) / (2 * (n - 1))) * np.sqrt(np.maximum(mixed2, 0)) * r2
    split = w2 + 2 * (n - 2) * lam**2 / n * r2
    return np.abs(cubic), rhs, mixed2, split


def default_lambdas(n: int) -> list:
    return [0.0, n / (n - 2), -n / (n - 2), 1.0, -1.0]


def check_okumura(metric, points, lambdas=None, tolerances=None, bundle=None) -> CheckReport:
    name = "okumura"
    label = metric_label(metric)
    b = _bundle(metric, points, 2, bundle)
    n = b.dim
    lambdas = default_lambdas(n) if lambdas is None else list(lambdas)
    scale = curvature_scale(b)
    margins, norm_res = [], []
    for lam in lambdas:
        lhs, rhs, mixed2, split = okumura_terms(b.weyl, b.traceless_ricci, b.g, b.g_inv, lam)
        margins.append((rhs - lhs) / _ref(scale, 3, lhs, rhs))
        norm_res.append(np.abs(mixed2 - split) / _ref(scale, 2, mixed2, split))
    margins = np.min(np.stack(margins), axis=0)
    norm_res = np.max(np.stack(norm_res), axis=0)
    tol_n = _tol("okumura_norm", tolerances)
    rep = _inequality_report(
        name, label, points, margins, _tol(name, tolerances),
        detail={
            "lambdas": lambdas,
            "norm_identity_residual": float(np.max(norm_res)),
            "norm_identity_tolerance": tol_n,
            "violations": int(np.sum(margins < -_tol(name, tolerances))),
        },
    )
    if np.max(norm_res) > tol_n:
        rep.verdict = FAIL
    return rep


def weyl_laplacian_terms(b: CurvatureBundle):
    """Both sides of the Einstein Weyl Laplacian estimate, pointwise."""
    n, gi, w = b.dim, b.g_inv, b.weyl
    lap_w = _trace_last_two(b.hess_weyl, gi)
    w2 = norm2(w, gi)
    grad_w2 = norm2(b.grad_weyl, gi)
    half_lap = np.einsum("...ijkl,...ijkl->...", _raise_all4(lap_w, gi), w) + grad_w2
    wn = np.sqrt(np.maximum(w2, 0))
    # d_a |W| = <nabla_a W, W> / |W>
    dw = np.einsum("...ijkla,...ijkl->...a", b.grad_weyl, _raise_all4(w, gi))
    dw2 = np.einsum("...a,...ab,...b->...", dw, gi, dw)
    grad_abs2 = np.where(w2 > 1e-24, dw2 / np.where(w2 > 1e-24, w2, 1.0), grad_w2)
    t1 = (n + 1) / (n - 1) * grad_abs2
    t2 = 2 / n * b.scalar * w2
    t3 = -2 * c_n(n) * wn**3
    return half_lap, t1, t2, t3


def _raise_all4(t, gi):
    return np.einsum("...ia,...jb,...kc,...ld,...abcd->...ijkl", gi, gi, gi, gi, t, optimize=True)


def check_weyl_laplacian_einstein(metric, points, tolerances=None, bundle=None) -> CheckReport:
    name = "weyl_laplacian"
    label = metric_label(metric)
    b = _bundle(metric, points, 4, bundle)
    if b.dim < 4:
        return _inapplicable(name, label, points, "needs n >= 4", b.dim)
    ok, gv = einstein_gate(b, _tol("einstein_gate", tolerances))
    if not ok:
        return _inapplicable(name, label, points, "metric not Einstein on sample", gv)
    lhs, t1, t2, t3 = weyl_laplacian_terms(b)
    margin = lhs - (t1 + t2 + t3)
    ref = _ref(curvature_scale(b), 3, lhs, t1, t2, t3)
    return _inequality_report(
        name, label, points, margin / ref, _tol(name, tolerances),
        detail={
            "max_abs_margin": float(np.max(np.abs(margin))),
            "weyl_norm": float(np.max(np.sqrt(np.maximum(norm2(b.weyl, b.g_inv), 0)))),
            "C_n_times_weyl_norm_over_R_over_n": _safe_ratio(
                c_n(b.dim) * np.sqrt(np.maximum(norm2(b.weyl, b.g_inv), 0)), b.scalar / b.dim
            ),
        },
    )


def _safe_ratio(a, c):
    a, c = np.asarray(a), np.asarray(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(np.abs(c) > FLOOR, a / np.where(np.abs(c) > FLOOR, c, 1), np.nan)
    return float(np.nanmax(r)) if np.any(np.isfinite(r)) else None


def thm11_sides(b: CurvatureBundle):
    n = b.dim
    cst = constants(n)
    mixed = b.weyl + cst.thm11_lambda_coefficient * kulkarni_nomizu(b.traceless_ricci, b.g)
    lhs = norm(mixed, b.g_inv)
    rhs = b.scalar * cst.thm11_factor
    return lhs, rhs


def pinch_pointwise_thm11(metric, points, tolerances=None, bundle=None) -> CheckReport:
    """Pointwise pinching predicate |W + c R0 o g| <= R / sqrt(2(n-1)(n-2))."""
    name = "pinch_thm11"
    label = metric_label(metric)
    b = _bundle(metric, points, 2, bundle)
    lhs, rhs = thm11_sides(b)
    margin = rhs - lhs
    pts = np.asarray(points)
    k = int(np.argmin(margin))
    fails = int(np.sum(margin < 0))
    total = len(margin)
    if np.any(b.scalar <= 0):
        verdict = "degenerate (R <= 0 on sample)"
    elif fails == 0:
        verdict = "holds everywhere on sample"
    elif fails == total:
        verdict = "fails at all sampled points"
    else:
        verdict = f"fails at {fails} of {total} sampled points"
    return CheckReport(
        name=name,
        metric=label,
        points=total,
        residual=float(margin[k]),
        tolerance=None,
        verdict=verdict,
        worst_point=_point_list(pts, k),
        kind="predicate",
        detail={
            "lhs_max": float(np.max(lhs)),
            "lhs_min": float(np.min(lhs)),
            "rhs_min": float(np.min(rhs)),
            "rhs_max": float(np.max(rhs)),
            "scalar_min": float(np.min(b.scalar)),
            "fail_count": fails,
        },
    )


# ---------------------------------------------------------------------------
# catalog of engine invariants


def _catalog_entries(b: CurvatureBundle, tolerances=None) -> dict:
    n, g, gi = b.dim, b.g, b.g_inv
    scale = curvature_scale(b)
    out = {}

    def put(name, res):
        res = np.atleast_1d(res)
        tol = _tol(name, tolerances)
        k = int(np.argmax(res))
        out[name] = {"residual": float(res[k]), "tolerance": tol, "worst_index": k,
                     "verdict": PASS if res[k] <= tol else FAIL}

    rm = b.riemann
    sym = np.maximum.reduce([
        _maxabs(rm + np.swapaxes(rm, -4, -3), 4),
        _maxabs(rm + np.swapaxes(rm, -2, -1), 4),
        _maxabs(rm - np.einsum("...ijkl->...klij", rm), 4),
        _maxabs(rm + np.einsum("...ijkl->...iklj", rm) + np.einsum("...ijkl->...iljk", rm), 4),
    ])
    put("riemann_symmetries", sym / _ref(scale, 1, _maxabs(rm, 4)))

    if b.weyl is not None:
        w = b.weyl
        wscale = _ref(scale, 1, _maxabs(w, 4))
        traces = [
            np.einsum("...ijkl,...ij->...kl", w, gi),
            np.einsum("...ijkl,...ik->...jl", w, gi),
            np.einsum("...ijkl,...il->...jk", w, gi),
            np.einsum("...ijkl,...jk->...il", w, gi),
            np.einsum("...ijkl,...jl->...ik", w, gi),
            np.einsum("...ijkl,...kl->...ij", w, gi),
        ]
        put("weyl_traceless", np.maximum.reduce([_maxabs(t, 2) for t in traces]) / wscale)
        w_ricci = weyl(rm, b.ricci, b.scalar, g, form="ricci")
        put("weyl_forms", _maxabs(w - w_ricci, 4) / wscale)
        gg = kulkarni_nomizu(g, g)
        rebuilt = (
            w
            + kulkarni_nomizu(b.traceless_ricci, g) / (n - 2)
            + gg * (b.scalar / (2 * n * (n - 1)))[..., None, None, None, None]
        )
        put("decomposition_closure", _maxabs(rebuilt - rm, 4) / _ref(scale, 1, _maxabs(rm, 4)))

    if b.cotton is not None:
        c = b.cotton
        cref = _ref(scale, 1.5, _maxabs(c, 3), _maxabs(b.grad_ricci, 3))
        put("cotton_antisymmetry", _maxabs(c + np.swapaxes(c, -3, -2), 3) / cref)
        c2 = cotton(b.grad_traceless_ricci, b.grad_scalar, g, form="traceless")
        put("cotton_forms", _maxabs(c - c2, 3) / cref)
        div_w = np.einsum("...ijklm,...lm->...ijk", b.grad_weyl, gi)
        target = -(n - 3) / (n - 2) * c
        put("divergence_cotton", _maxabs(div_w - target, 3) / _ref(scale, 1.5, _maxabs(div_w, 3), _maxabs(target, 3)))
        div_r0 = np.einsum("...ijk,...jk->...i", b.grad_traceless_ricci, gi)
        target = (n - 2) / (2 * n) * b.grad_scalar
        put("bianchi_traceless_ricci", _maxabs(div_r0 - target, 1) / _ref(scale, 1.5, _maxabs(div_r0, 1), _maxabs(target, 1)))
        # Kato: |grad |R0|| <= |grad R0| where |R0| > 1e-6
        r0n = norm(b.traceless_ricci, gi)
        lhs = np.sqrt(np.maximum(np.einsum("...a,...ab,...b->...", np.nan_to_num(b.traceless_ricci_norm_grad), gi,
                                           np.nan_to_num(b.traceless_ricci_norm_grad)), 0))
        rhs = norm(b.grad_traceless_ricci, gi)
        excess = np.where(r0n > 1e-6, lhs - rhs, -np.inf)
        put("kato", np.maximum(excess, 0.0) if np.any(np.isfinite(excess)) else np.zeros_like(r0n))
        out["kato"]["points_applicable"] = int(np.sum(r0n > 1e-6))

    if b.bach is not None:
        b1, b2 = b.bach, b.bach_cotton
        bref = _ref(scale, 2, _maxabs(b1, 2), _maxabs(b2, 2))
        put("bach_symmetry", np.maximum(_maxabs(b1 - np.swapaxes(b1, -1, -2), 2),
                                        _maxabs(b2 - np.swapaxes(b2, -1, -2), 2)) / bref)
        put("bach_forms", _maxabs(b1 - b2, 2) / bref)
    return out


def symmetry_catalog_from_bundle(b: CurvatureBundle, label: str, points, tolerances=None) -> CheckReport:
    entries = _catalog_entries(b, tolerances)
    pts = np.asarray(points)
    for e in entries.values():
        e["worst_point"] = _point_list(pts, e.pop("worst_index"))
    worst_name = max(entries, key=lambda k: entries[k]["residual"] / entries[k]["tolerance"])
    ok = all(e["verdict"] == PASS for e in entries.values())
    return CheckReport(
        name="symmetry_catalog",
        metric=label,
        points=len(pts),
        residual=entries[worst_name]["residual"],
        tolerance=entries[worst_name]["tolerance"],
        verdict=PASS if ok else FAIL,
        worst_point=entries[worst_name]["worst_point"],
        kind="identity",
        detail={"worst_entry": worst_name, "entries": entries},
    )


def check_symmetry_catalog(metric, points, tolerances=None, bundle=None) -> CheckReport:
    b = _bundle(metric, points, 4, bundle)
    return symmetry_catalog_from_bundle(b, metric_label(metric), points, tolerances)


def check_oracle(metric, points, tolerances=None, bundle=None) -> CheckReport:
    """Compare engine curvature with the metric's closed-form oracle record."""
    name = "oracle"
    label = metric_label(metric)
    if metric.oracle is None:
        return _inapplicable(name, label, points, "metric carries no oracle record", None)
    o = metric.oracle
    b = _bundle(metric, points, 3, bundle)
    tol = _tol(name, tolerances)
    gi = b.g_inv
    scale = np.maximum(curvature_scale(b), 1.0)
    rows = {}
    if o.scalar is not None:
        rows["scalar"] = np.abs(b.scalar - o.scalar) / max(abs(o.scalar), 1.0)
    if o.einstein:
        rows["einstein"] = norm(b.traceless_ricci, gi) / scale
    if o.conformally_flat and b.weyl is not None:
        rows["conformally_flat"] = norm(b.weyl, gi) / scale
    if o.weyl_norm2 is not None and b.weyl is not None:
        rows["weyl_norm2"] = np.abs(norm2(b.weyl, gi) - o.weyl_norm2) / max(abs(o.weyl_norm2), 1.0)
    if o.traceless_ricci_norm2 is not None:
        rows["traceless_ricci_norm2"] = np.abs(norm2(b.traceless_ricci, gi) - o.traceless_ricci_norm2) / max(
            abs(o.traceless_ricci_norm2), 1.0)
    if o.constant_scalar and b.grad_scalar is not None:
        rows["constant_scalar"] = norm(b.grad_scalar, gi) / scale
    res = np.max(np.stack(list(rows.values())), axis=0)
    return _identity_report(
        name, label, points, res, tol,
        detail={k: float(np.max(v)) for k, v in rows.items()},
    )


CHECKS = {
    "oracle": check_oracle,
    "symmetry_catalog": check_symmetry_catalog,
    "ricci_identity": check_ricci_identity,
    "contracted_bach": check_contracted_bach_identity,
    "okumura": check_okumura,
    "weyl_laplacian": check_weyl_laplacian_einstein,
    "pinch_thm11": pinch_pointwise_thm11,
}

ALL_CHECKS = ["constants_ordering"] + list(CHECKS)


def run_checks(metric, points, names, tolerances=None) -> list:
    """Run the named checks on one shared order-4 bundle."""
    unknown = [c for c in names if c not in ALL_CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    reports = []
    needs_bundle = [c for c in names if c in CHECKS]
    b = curvature_bundle(metric, np.asarray(points), order=4) if needs_bundle else None
    for c in names:
        if c == "constants_ordering":
            reports.append(check_constants_ordering())
        else:
            reports.append(CHECKS[c](metric, points, tolerances=tolerances, bundle=b))
    return reports


__all__ = [
    "ALL_CHECKS",
    "CHECKS",
    "CheckReport",
    "TOLERANCES",
    "check_constants_ordering",
    "check_contracted_bach_identity",
    "check_okumura",
    "check_oracle",
    "check_ricci_identity",
    "check_symmetry_catalog",
    "check_weyl_laplacian_einstein",
    "pinch_pointwise_thm11",
    "run_checks",
    "symmetry_catalog_from_bundle",
]
