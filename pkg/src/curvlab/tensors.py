"""Dense tensors at a point: contraction, norms and the Kulkarni-Nomizu product.

Curvature tensors are kept fully covariant; indices are raised only inside
contractions. The helpers here accept either numpy arrays or :class:`Jet`
arrays, and any leading axes are treated as a batch of points, so the
component slots are always the trailing ``rank`` axes.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .jets import Jet, jet_einsum

MAX_RANK = 6
_LETTERS = string.ascii_letters


class TensorError(ValueError):
    pass


def einsum2(subscripts: str, a, b):
    """Two-operand einsum that dispatches to jet products when needed."""
    if isinstance(a, Jet) or isinstance(b, Jet):
        return jet_einsum(subscripts, a, b)
    return np.einsum(subscripts, a, b, optimize=True)


def _shape(t):
    return t.shape


@dataclass(frozen=True)
class MetricAtPoint:
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[-1]


def metric_at_point(g, tol: float = 1e-10) -> MetricAtPoint:
    """Validate a (batch of) metric matrices and attach inverse and volume factor."""
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    if g.shape[-2:] != (n, n):
        raise TensorError(f"metric must be square, got shape {g.shape}")
    scale = max(np.max(np.abs(g)), 1.0)
    if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > tol * scale:
        raise TensorError("metric is not symmetric")
    for k in range(1, n + 1):
        if np.any(np.linalg.det(g[..., :k, :k]) <= 0):
            raise TensorError(f"metric not positive definite (leading minor {k} <= 0)")
    g_inv = np.linalg.inv(g)
    eye = np.broadcast_to(np.eye(n), g.shape)
    if np.max(np.abs(g @ g_inv - eye)) > tol * max(1.0, np.max(np.abs(g_inv)) * scale):
        raise TensorError("metric inverse failed the identity check")
    return MetricAtPoint(g, g_inv, np.sqrt(np.linalg.det(g)))


@dataclass(frozen=True)
class Tensor:
    """Component array with one variance flag per slot ('d' lower, 'u' upper)."""

    values: np.ndarray
    variance: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        r = len(self.variance)
        if r > MAX_RANK:
            raise TensorError(f"rank {r} exceeds cap {MAX_RANK}")
        if set(self.variance) - {"d", "u"}:
            raise TensorError("variance flags must be 'd' or 'u'")
        if values.ndim < r or (r and len(set(values.shape[values.ndim - r:])) != 1):
            raise TensorError(f"values of shape {values.shape} do not form a rank-{r} tensor")

    @property
    def rank(self) -> int:
        return len(self.variance)


def contract(t: Tensor, slot_a: int, slot_b: int, m: MetricAtPoint) -> Tensor:
    """Trace over two slots, inserting g^{-1} (or g) when both share a variance."""
    r = t.rank
    if not (0 <= slot_a < r and 0 <= slot_b < r) or slot_a == slot_b:
        raise TensorError(f"invalid slots ({slot_a}, {slot_b}) for rank {r}")
    idx = list(_LETTERS[:r])
    keep = [c for k, c in enumerate(idx) if k not in (slot_a, slot_b)]
    va, vb = t.variance[slot_a], t.variance[slot_b]
    src = "..." + "".join(idx)
    out = "..." + "".join(keep)
    if va != vb:
        idx[slot_b] = idx[slot_a]
        values = np.einsum("..." + "".join(idx) + "->" + out, t.values)
    else:
        metric = m.g_inv if va == "d" else m.g
        a, b = idx[slot_a], idx[slot_b]
        values = np.einsum(f"{src},...{a}{b}->{out}", t.values, metric, optimize=True)
    variance = "".join(v for k, v in enumerate(t.variance) if k not in (slot_a, slot_b))
    return Tensor(values, variance)


def _rank_of(a, g_inv) -> int:
    return len(_shape(a)) - (len(_shape(g_inv)) - 2)


def raise_all(a, g_inv, rank: int | None = None):
    """Raise every slot of a covariant tensor."""
    r = _rank_of(a, g_inv) if rank is None else rank
    out = a
    for s in range(r):
        idx = _LETTERS[:r]
        new = idx.replace(idx[s], "Z")
        out = einsum2(f"...{idx},...{idx[s]}Z->...{new}", out, g_inv)
    return out


def inner(a, b, g_inv, rank: int | None = None):
    """Full metric contraction <a, b> of two covariant tensors of equal rank."""
    if _shape(a) != _shape(b):
        raise TensorError(f"shape mismatch {_shape(a)} vs {_shape(b)}")
    r = _rank_of(a, g_inv) if rank is None else rank
    idx = _LETTERS[:r]
    return einsum2(f"...{idx},...{idx}->...", raise_all(a, g_inv, r), b)


def norm2(a, g_inv, rank: int | None = None):
    return inner(a, a, g_inv, rank)


def norm(a, g_inv, rank: int | None = None):
    return np.sqrt(np.maximum(norm2(a, g_inv, rank), 0.0))


def trace(s, g_inv):
    """g^{ij} s_ij for a covariant 2-tensor."""
    return einsum2("...ij,...ij->...", s, g_inv)


def kulkarni_nomizu(a, b):
    """(a o b)_ijkl = a_ik b_jl - a_il b_jk + a_jl b_ik - a_jk b_il."""
    t1 = einsum2("...ik,...jl->...ijkl", a, b)
    t2 = einsum2("...il,...jk->...ijkl", a, b)
    t3 = einsum2("...jl,...ik->...ijkl", a, b)
    t4 = einsum2("...jk,...il->...ijkl", a, b)
    return t1 - t2 + t3 - t4


def traceless_part(s, g, g_inv):
    n = _shape(g)[-1]
    tr = trace(s, g_inv)
    if isinstance(tr, Jet):
        return s - g * tr.reshape(tr.shape + (1, 1)) * (1.0 / n)
    return s - g * (np.asarray(tr)[..., None, None] / n)


def symmetrize_pairs(t: np.ndarray) -> np.ndarray:
    return 0.5 * (t + np.swapaxes(t, -1, -2))
