"""Curvature hierarchy at chart points, computed exactly from metric jets.

Conventions (all tensors fully covariant, derivative slots appended last):

* ``gamma[k, i, j] = Gamma^k_ij``
* ``R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb``
  and ``R_abcd = g_ae R^e_bcd``, so a round sphere of curvature kappa has
  ``R_ijkl = kappa (g_ik g_jl - g_il g_jk)`` and ``R_ik = g^jl R_ijkl``.
* ``grad_t[..., k] = (nabla_k t)[...]``; ``hess_t[..., k, l] = nabla_l nabla_k t``.

Every curvature quantity is first formed as a jet field, so its covariant
derivatives come from exact jet differentiation, not finite differences.
A metric jet of order 4 yields point values through the Bach tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .jets import Jet, jet_einsum, jet_inverse
from .tensors import MAX_RANK, MetricAtPoint, einsum2, kulkarni_nomizu, metric_at_point

_SLOTS = "abcdefgh"


class CurvatureError(ValueError):
    pass


def _perm(jet: Jet, spec: str) -> Jet:
    src, dst = spec.split("->")
    return Jet(np.einsum(f"...{src}Z->...{dst}Z", jet.coef), jet.nvars, jet.order)


def _dim(t) -> int:
    return t.shape[-1]


# ---------------------------------------------------------------------------
# building blocks (jets or plain arrays)


def christoffel_from_jets(g: Jet) -> tuple[Jet, Jet]:
    """Inverse metric and Christoffel symbols, both one order below ``g``."""
    if g.order < 1:
        raise CurvatureError("Christoffel symbols need a metric jet of order >= 1")
    g_inv = jet_inverse(g.truncate(g.order - 1))
    dg = g.gradient()  # dg[i, j, k] = d_k g_ij
    first = (_perm(dg, "jli->lij") + _perm(dg, "ilj->lij") - _perm(dg, "ijl->lij")) * 0.5
    gamma = jet_einsum("...kl,...lij->...kij", g_inv, first)
    return g_inv, gamma


def riemann_from_jets(g: Jet, gamma: Jet) -> Jet:
    """Covariant Riemann tensor, one order below ``gamma``."""
    m = gamma.order - 1
    dgam = gamma.gradient()  # dgam[a, i, j, c] = d_c Gamma^a_ij
    up = _perm(dgam, "adbc->abcd") - _perm(dgam, "acbd->abcd")
    up = up + jet_einsum("...ace,...edb->...abcd", gamma, gamma, order=m)
    up = up - jet_einsum("...ade,...ecb->...abcd", gamma, gamma, order=m)
    return jet_einsum("...ae,...ebcd->...abcd", g, up, order=m)


def ricci_scalar(riem, g, g_inv):
    """Ricci tensor, scalar curvature and traceless Ricci."""
    n = _dim(g)
    ric = einsum2("...ijkl,...jl->...ik", riem, g_inv)
    scal = einsum2("...ij,...ij->...", ric, g_inv)
    return ric, scal, ric - g * _expand2(scal) * (1.0 / n)


def _expand2(s):
    if isinstance(s, Jet):
        return s.reshape(s.shape + (1, 1))
    return np.asarray(s)[..., None, None]


def _expand4(s):
    if isinstance(s, Jet):
        return s.reshape(s.shape + (1, 1, 1, 1))
    return np.asarray(s)[..., None, None, None, None]


def weyl(riem, ric, scal, g, form: str = "traceless"):
    """Weyl tensor by either decomposition.

    ``form="traceless"``: W = Rm - (Ric0 o g)/(n-2) - R/(n(n-1)) * (g o g)/2
    ``form="ricci"``:     W = Rm - (Ric o g)/(n-2) + R/(2(n-1)(n-2)) * (g o g)
    """
    n = _dim(g)
    if n < 3:
        raise CurvatureError("the Weyl tensor needs dimension >= 3")
    gg = kulkarni_nomizu(g, g)
    if form == "traceless":
        ric0 = ric - g * _expand2(scal) * (1.0 / n)
        return riem - kulkarni_nomizu(ric0, g) * (1.0 / (n - 2)) - gg * _expand4(scal) * (0.5 / (n * (n - 1)))
    if form == "ricci":
        return riem - kulkarni_nomizu(ric, g) * (1.0 / (n - 2)) + gg * _expand4(scal) * (0.5 / ((n - 1) * (n - 2)))
    raise CurvatureError(f"unknown Weyl form {form!r}")


def covariant_derivative(t: Jet, gamma: Jet, order: int = 1) -> Jet:
    """nabla of a covariant jet field; derivative slots are appended last.

    The component rank of ``t`` is read off against ``gamma`` (whose trailing
    three axes are components). Each derivative lowers the jet order by one.
    """
    if order not in (1, 2):
        raise CurvatureError("covariant_derivative supports order 1 or 2")
    nbatch = len(gamma.shape) - 3
    rank = len(t.shape) - nbatch
    if rank + order > MAX_RANK:
        raise CurvatureError(f"result rank {rank + order} exceeds cap {MAX_RANK}")
    out = _nabla(t, gamma, rank)
    if order == 2:
        out = _nabla(out, gamma, rank + 1)
    return out


def _nabla(t: Jet, gamma: Jet, rank: int) -> Jet:
    d = t.gradient()
    m = d.order
    idx = _SLOTS[:rank]
    for s in range(rank):
        repl = idx[:s] + "z" + idx[s + 1:]
        d = d - jet_einsum(f"...zy{idx[s]},...{repl}->...{idx}y", gamma, t, order=m)
    return d


def cotton(grad_ric, grad_scal, g, form: str = "ricci"):
    """C_ijk = R_kj,i - R_ki,j - (R_,i g_jk - R_,j g_ik) / (2(n-1)).

    With ``form="traceless"`` the first argument is nabla of the traceless
    Ricci tensor and the scalar term carries (n-2)/(2n(n-1)) with a plus sign.
    """
    n = _dim(g)
    if isinstance(grad_ric, Jet):
        a = _perm(grad_ric, "kji->ijk")
        b = _perm(grad_ric, "kij->ijk")
        s1 = jet_einsum("...i,...jk->...ijk", grad_scal, g)
        s2 = jet_einsum("...j,...ik->...ijk", grad_scal, g)
    else:
        a = np.einsum("...kji->...ijk", grad_ric)
        b = np.einsum("...kij->...ijk", grad_ric)
        s1 = np.einsum("...i,...jk->...ijk", grad_scal, g)
        s2 = np.einsum("...j,...ik->...ijk", grad_scal, g)
    if form == "ricci":
        return a - b - (s1 - s2) * (1.0 / (2 * (n - 1)))
    if form == "traceless":
        return a - b + (s1 - s2) * ((n - 2) / (2 * n * (n - 1)))
    raise CurvatureError(f"unknown Cotton form {form!r}")


def _weyl_ricci_term(w, ric, g_inv):
    ric_up = einsum2("...ka,...ab->...kb", g_inv, ric)
    ric_up = einsum2("...kb,...bl->...kl", ric_up, g_inv)
    return einsum2("...ikjl,...kl->...ij", w, ric_up)


def bach_direct(hess_w, w, ric, g_inv):
    """B_ij = W_ikjl,lk / (n-3) + W_ikjl R^kl / (n-2)."""
    n = _dim(g_inv)
    if n <= 3:
        raise CurvatureError(f"the Bach tensor needs n >= 4 (got n = {n})")
    # hess_w[i, k, j, l, a, b] = nabla_b nabla_a W_ikjl; contract l~a, k~b
    t = einsum2("...ikjlab,...la->...ikjb", hess_w, g_inv)
    div2 = einsum2("...ikjb,...kb->...ij", t, g_inv)
    return div2 * (1.0 / (n - 3)) + _weyl_ricci_term(w, ric, g_inv) * (1.0 / (n - 2))


def bach_cotton_form(grad_c, w, ric, g_inv):
    """B_ij = (C_kij,k + W_ikjl R^kl) / (n-2)."""
    n = _dim(g_inv)
    if n <= 3:
        raise CurvatureError(f"the Bach tensor needs n >= 4 (got n = {n})")
    div = einsum2("...kija,...ka->...ij", grad_c, g_inv)
    return (div + _weyl_ricci_term(w, ric, g_inv)) * (1.0 / (n - 2))


# ---------------------------------------------------------------------------
# bundle


@dataclass(frozen=True)
class CurvatureBundle:
    """Curvature quantities at one point or a batch of points.

    Arrays carry the batch shape of ``point[..., 0]`` in front. Fields that
    need more metric derivatives than were supplied are ``None``.
    """

    point: np.ndarray
    metric: MetricAtPoint
    christoffel: np.ndarray
    riemann: np.ndarray | None = None
    ricci: np.ndarray | None = None
    scalar: np.ndarray | None = None
    traceless_ricci: np.ndarray | None = None
    weyl: np.ndarray | None = None
    grad_scalar: np.ndarray | None = None
    grad_ricci: np.ndarray | None = None
    grad_traceless_ricci: np.ndarray | None = None
    grad_weyl: np.ndarray | None = None
    cotton: np.ndarray | None = None
    hess_traceless_ricci: np.ndarray | None = None
    hess_weyl: np.ndarray | None = None
    grad_cotton: np.ndarray | None = None
    bach: np.ndarray | None = None
    bach_cotton: np.ndarray | None = None
    traceless_ricci_norm_grad: np.ndarray | None = None
    order: int = 4

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def g(self) -> np.ndarray:
        return self.metric.g

    @property
    def g_inv(self) -> np.ndarray:
        return self.metric.g_inv


def bundle_from_metric_jet(g: Jet, point) -> CurvatureBundle:
    """Evaluate everything the jet order of ``g`` allows."""
    m = g.order
    n = _dim(g)
    point = np.asarray(point, dtype=float)
    metric = metric_at_point(g.value)
    out: dict = {"point": point, "metric": metric, "order": m}
    if m == 0:
        out["christoffel"] = None
        return CurvatureBundle(**out)
    g_inv, gamma = christoffel_from_jets(g)
    out["christoffel"] = gamma.value
    if m == 1:
        return CurvatureBundle(**out)

    riem = riemann_from_jets(g.truncate(m - 2), gamma)
    gl = g.truncate(m - 2)
    gi = g_inv.truncate(m - 2)
    ric, scal, ric0 = ricci_scalar(riem, gl, gi)
    out.update(riemann=riem.value, ricci=ric.value, scalar=scal.value, traceless_ricci=ric0.value)
    w = weyl(riem, ric, scal, gl) if n >= 3 else None
    if w is not None:
        out["weyl"] = w.value
    if m == 2:
        return CurvatureBundle(**out)

    grad_ric = covariant_derivative(ric, gamma)
    grad_ric0 = covariant_derivative(ric0, gamma)
    grad_scal = scal.gradient()
    out.update(
        grad_ricci=grad_ric.value,
        grad_traceless_ricci=grad_ric0.value,
        grad_scalar=grad_scal.value,
        traceless_ricci_norm_grad=_norm_gradient(ric0, gi),
    )
    c = cotton(grad_ric, grad_scal, g.truncate(m - 3))
    out["cotton"] = c.value
    grad_w = covariant_derivative(w, gamma) if w is not None else None
    if grad_w is not None:
        out["grad_weyl"] = grad_w.value
    if m == 3:
        return CurvatureBundle(**out)

    hess_ric0 = covariant_derivative(grad_ric0, gamma)
    out["hess_traceless_ricci"] = hess_ric0.value
    grad_c = covariant_derivative(c, gamma)
    out["grad_cotton"] = grad_c.value
    if grad_w is not None:
        hess_w = covariant_derivative(grad_w, gamma)
        out["hess_weyl"] = hess_w.value
        if n >= 4:
            gv, ricv, wv = g_inv.value, ric.value, w.value
            out["bach"] = bach_direct(hess_w.value, wv, ricv, gv)
            out["bach_cotton"] = bach_cotton_form(grad_c.value, wv, ricv, gv)
    return CurvatureBundle(**out)


def _norm_gradient(t: Jet, g_inv: Jet) -> np.ndarray:
    """Point value of d_k |t| for a covariant 2-tensor jet field (nan where t = 0)."""
    from .jets import jsqrt

    raised = jet_einsum("...ia,...ab->...ib", g_inv, t)
    raised = jet_einsum("...ib,...bj->...ij", raised, g_inv)
    sq = jet_einsum("...ij,...ij->...", raised, t)
    grad = np.full(sq.shape + (t.nvars,), np.nan)
    ok = sq.value > 1e-24
    if np.any(ok):
        sub = Jet(sq.coef[ok], sq.nvars, sq.order)
        grad[ok] = jsqrt(sub).gradient().value
    return grad


def chunk_size(n: int, order: int) -> int:
    if order <= 2:
        return 4096
    return max(1, {3: 64, 4: 32, 5: 12, 6: 6}.get(n, 4) * (4 if order == 3 else 1))


def curvature_bundle(metric, point, order: int = 4) -> CurvatureBundle:
    """Curvature bundle of ``metric`` (a MetricSpec) at a point or batch of points."""
    point = np.asarray(point, dtype=float)
    if point.ndim == 1:
        return bundle_from_metric_jet(metric.jets(point, order), point)
    flat = point.reshape(-1, point.shape[-1])
    size = chunk_size(point.shape[-1], order)
    parts = [
        bundle_from_metric_jet(metric.jets(flat[s:s + size], order), flat[s:s + size])
        for s in range(0, len(flat), size)
    ]
    merged = concat_bundles(parts)
    return reshape_bundle(merged, point.shape[:-1])


def concat_bundles(parts: list[CurvatureBundle]) -> CurvatureBundle:
    if len(parts) == 1:
        return parts[0]
    out = {}
    for f in fields(CurvatureBundle):
        vals = [getattr(p, f.name) for p in parts]
        if f.name == "order":
            out["order"] = vals[0]
        elif f.name == "metric":
            out["metric"] = MetricAtPoint(
                np.concatenate([v.g for v in vals]),
                np.concatenate([v.g_inv for v in vals]),
                np.concatenate([v.sqrt_det for v in vals]),
            )
        else:
            out[f.name] = None if vals[0] is None else np.concatenate(vals)
    return CurvatureBundle(**out)


def reshape_bundle(b: CurvatureBundle, batch: tuple) -> CurvatureBundle:
    def rs(a, lead):
        return None if a is None else a.reshape(tuple(batch) + a.shape[lead:])

    out = {}
    for f in fields(CurvatureBundle):
        v = getattr(b, f.name)
        if f.name == "order":
            out["order"] = v
        elif f.name == "metric":
            out["metric"] = MetricAtPoint(rs(v.g, 1), rs(v.g_inv, 1), rs(v.sqrt_det, 1))
        else:
            out[f.name] = rs(v, 1)
    return CurvatureBundle(**out)


def take_points(b: CurvatureBundle, index) -> CurvatureBundle:
    """Sub-bundle at the given batch index or mask."""
    out = {}
    for f in fields(CurvatureBundle):
        v = getattr(b, f.name)
        if f.name == "order":
            out["order"] = v
        elif f.name == "metric":
            out["metric"] = MetricAtPoint(v.g[index], v.g_inv[index], v.sqrt_det[index])
        else:
            out[f.name] = None if v is None else v[index]
    return CurvatureBundle(**out)


def christoffel(metric, point, order: int = 3) -> Jet:
    """Christoffel symbols with their partials through ``order`` as a jet."""
    g = metric.jets(np.asarray(point, dtype=float), order + 1)
    return christoffel_from_jets(g)[1]


__all__ = [
    "CurvatureBundle",
    "CurvatureError",
    "bach_cotton_form",
    "bach_direct",
    "bundle_from_metric_jet",
    "christoffel",
    "christoffel_from_jets",
    "chunk_size",
    "concat_bundles",
    "cotton",
    "covariant_derivative",
    "curvature_bundle",
    "ricci_scalar",
    "riemann_from_jets",
    "take_points",
    "weyl",
]
