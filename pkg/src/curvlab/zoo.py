"""Reference metrics with closed-form curvature data, and random perturbations.

Spheres and the hyperbolic ball are written in conformally flat
(stereographic / Poincare) charts. Perturbation metrics are
``delta_ij + eps * q_ij(x)`` with sparse random polynomials of degree <= 4.

Definiteness of perturbations (Gershgorin): on the box ``|x_k| <= rho`` each
``|q_ij|`` is bounded by ``sum |c_t| rho^deg(t)``. With one constant term,
``n`` linear terms and three terms of each degree 2, 3, 4, all coefficients
in [-1, 1] and ``rho = 0.2``, that bound is at most ``2.35`` for ``n <= 6``,
so every Gershgorin disc of ``g`` stays right of ``1 - 6 * 0.05 * 2.35 > 0``.
The generator also evaluates the exact bound for the drawn coefficients and
refuses any metric whose discs could reach zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .expr import Expr, eval_jet, parse_expr
from .jets import Jet, tables


class ZooError(ValueError):
    pass


@dataclass(frozen=True)
class Oracle:
    scalar: float | None = None
    einstein: bool | None = None
    conformally_flat: bool | None = None
    weyl_norm2: float | None = None
    traceless_ricci_norm2: float | None = None
    constant_scalar: bool | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class MetricSpec:
    name: str
    coords: tuple
    components: tuple  # n x n expression strings, symmetric
    params: Mapping[str, float] = field(default_factory=dict)
    box: tuple = ()
    oracle: Oracle | None = None
    family: str | None = None
    family_params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.coords)
        comps = tuple(tuple(str(c) for c in row) for row in self.components)
        if len(comps) != n or any(len(row) != n for row in comps):
            raise ZooError(f"component grid must be {n}x{n}")
        # upper triangle is authoritative
        sym = tuple(tuple(comps[min(i, j)][max(i, j)] for j in range(n)) for i in range(n))
        object.__setattr__(self, "components", sym)
        box = tuple((float(lo), float(hi)) for lo, hi in self.box) or tuple((-0.1, 0.1) for _ in range(n))
        if len(box) != n or any(lo >= hi for lo, hi in box):
            raise ZooError("sampling box needs one increasing [lo, hi] per coordinate")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "params", dict(self.params))
        names = list(self.params)
        exprs = {}
        for i in range(n):
            for j in range(i, n):
                text = sym[i][j]
                if text not in exprs:
                    exprs[text] = parse_expr(text, self.coords, names)
        object.__setattr__(self, "_exprs", exprs)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def expression(self, i: int, j: int) -> Expr:
        return self._exprs[self.components[i][j]]

    def jets(self, point, order: int) -> Jet:
        """Jet array of g_ij about ``point`` (shape ``batch + (n, n)``)."""
        point = np.asarray(point, dtype=float)
        n = self.dim
        if point.shape[-1:] != (n,):
            raise ZooError(f"point dimension {point.shape[-1:]} does not match n = {n}")
        size = tables(n, order).size
        coef = np.zeros(point.shape[:-1] + (n, n, size))
        done = {}
        for i in range(n):
            for j in range(i, n):
                text = self.components[i][j]
                if text not in done:
                    done[text] = eval_jet(self._exprs[text], point, self.params, order).coef
                coef[..., i, j, :] = done[text]
                coef[..., j, i, :] = done[text]
        return Jet(coef, n, order)

    def values(self, point) -> np.ndarray:
        return self.jets(point, 0).value

    def contains(self, point, slack: float = 1e-12) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return np.all((point >= lo - slack) & (point <= hi + slack), axis=-1)

    def references(self) -> set:
        """Coordinate names that appear in at least one component."""
        used = set()
        for e in self._exprs.values():
            used |= e.symbols()
        return used & set(self.coords)

    # serialization -----------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "dim": self.dim,
            "coordinates": list(self.coords),
            "parameters": dict(self.params),
            "components": [list(row) for row in self.components],
            "sampling_box": [list(b) for b in self.box],
        }
        if self.oracle is not None:
            out["oracle"] = self.oracle.to_json()
        if self.family is not None:
            out["family"] = {"name": self.family, "parameters": dict(self.family_params)}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "MetricSpec":
        try:
            coords = tuple(data["coordinates"])
            dim = int(data.get("dim", len(coords)))
            if dim != len(coords):
                raise ZooError(f"dim = {dim} but {len(coords)} coordinates listed")
            family = data.get("family") or {}
            oracle = data.get("oracle")
            return cls(
                name=str(data["name"]),
                coords=coords,
                components=tuple(tuple(row) for row in data["components"]),
                params={k: float(v) for k, v in data.get("parameters", {}).items()},
                box=tuple(tuple(b) for b in data.get("sampling_box", ())),
                oracle=Oracle(**oracle) if oracle else None,
                family=family.get("name"),
                family_params=family.get("parameters", {}),
            )
        except (KeyError, TypeError) as exc:
            raise ZooError(f"invalid metric definition: {exc}") from exc


def load_metric(path) -> MetricSpec:
    with open(path) as fh:
        return MetricSpec.from_json(json.load(fh))


def save_metric(metric: MetricSpec, path) -> None:
    Path(path).write_text(json.dumps(metric.to_json(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# members


def _coords(n: int, offset: int = 0) -> list:
    return [f"x{k + 1}" for k in range(offset, offset + n)]


def _sumsq(names) -> str:
    return " + ".join(f"{c}^2" for c in names)


def _diag(n: int, entries) -> tuple:
    return tuple(tuple(entries[i] if i == j else "0" for j in range(n)) for i in range(n))


def _ball_box(n: int, radius: float = 0.5) -> tuple:
    h = radius / math.sqrt(n)
    return tuple((-h, h) for _ in range(n))


def euclidean(n: int) -> MetricSpec:
    n = int(n)
    return MetricSpec(
        name="euclidean",
        coords=tuple(_coords(n)),
        components=_diag(n, ["1"] * n),
        box=tuple((-1.0, 1.0) for _ in range(n)),
        oracle=Oracle(0.0, True, True, 0.0, 0.0, True),
        family="euclidean",
        family_params={"n": n},
    )


def sphere(n: int, r: float = 1.0) -> MetricSpec:
    n, r = int(n), float(r)
    if r <= 0:
        raise ZooError("sphere radius must be positive")
    c = _coords(n)
    factor = f"4*r^2/(1 + {_sumsq(c)})^2"
    return MetricSpec(
        name="sphere",
        coords=tuple(c),
        components=_diag(n, [factor] * n),
        params={"r": r},
        box=_ball_box(n),
        oracle=Oracle(n * (n - 1) / r**2, True, True, 0.0, 0.0, True),
        family="sphere",
        family_params={"n": n, "r": r},
    )


def hyperbolic(n: int) -> MetricSpec:
    n = int(n)
    c = _coords(n)
    factor = f"4/(1 - ({_sumsq(c)}))^2"
    return MetricSpec(
        name="hyperbolic",
        coords=tuple(c),
        components=_diag(n, [factor] * n),
        box=_ball_box(n),
        oracle=Oracle(-n * (n - 1.0), True, True, 0.0, 0.0, True),
        family="hyperbolic",
        family_params={"n": n},
    )


def product_weyl_norm2(p: int, a: float, q: int, b: float) -> float:
    """|W|^2 (full contraction) of S^p(a) x S^q(b) from the block curvature norms."""
    n = p + q
    k1, k2 = 1 / a**2, 1 / b**2
    riem2 = 2 * p * (p - 1) * k1**2 + 2 * q * (q - 1) * k2**2
    ric2 = p * ((p - 1) * k1) ** 2 + q * ((q - 1) * k2) ** 2
    scal = p * (p - 1) * k1 + q * (q - 1) * k2
    return riem2 - 4 / (n - 2) * ric2 + 2 * scal**2 / ((n - 1) * (n - 2))


def product_spheres(p: int, a: float, q: int, b: float, n: int | None = None) -> MetricSpec:
    p, q, a, b = int(p), int(q), float(a), float(b)
    if p < 1 or q < 1:
        raise ZooError("factor dimensions must be positive")
    if a <= 0 or b <= 0:
        raise ZooError("sphere radii must be positive")
    if n is not None and p + q != int(n):
        raise ZooError(f"p + q = {p + q} does not equal the requested dimension {n}")
    dim = p + q
    c1, c2 = _coords(p), _coords(q, p)
    f1 = f"4*a^2/(1 + {_sumsq(c1)})^2"
    f2 = f"4*b^2/(1 + {_sumsq(c2)})^2"
    k1, k2 = 1 / a**2, 1 / b**2
    scal = p * (p - 1) * k1 + q * (q - 1) * k2
    ric = [(p - 1) * k1] * p + [(q - 1) * k2] * q
    ric0 = [x - scal / dim for x in ric]
    einstein = math.isclose((p - 1) * k1, (q - 1) * k2, rel_tol=1e-12, abs_tol=1e-15)
    box = _ball_box(p) + _ball_box(q)
    return MetricSpec(
        name="product_spheres",
        coords=tuple(c1 + c2),
        components=_diag(dim, [f1] * p + [f2] * q),
        params={"a": a, "b": b},
        box=box,
        oracle=Oracle(
            scalar=scal,
            einstein=einstein,
            conformally_flat=(p == 1 or q == 1),
            weyl_norm2=product_weyl_norm2(p, a, q, b) if dim > 2 else 0.0,
            traceless_ricci_norm2=sum(x * x for x in ric0),
            constant_scalar=True,
        ),
        family="product_spheres",
        family_params={"p": p, "a": a, "q": q, "b": b},
    )


def conformal(n: int, f: str) -> MetricSpec:
    """The conformally flat metric exp(2 f) delta."""
    n = int(n)
    c = _coords(n)
    factor = f"exp(2*({f}))"
    return MetricSpec(
        name="conformal",
        coords=tuple(c),
        components=_diag(n, [factor] * n),
        box=tuple((-0.5, 0.5) for _ in range(n)),
        oracle=Oracle(conformally_flat=True),
        family="conformal",
        family_params={"n": n},
    )


PERTURBATION_BOX = 0.2
MAX_EPS = 0.05


def _monomial(alpha, coords) -> str:
    parts = []
    for k, a in enumerate(alpha):
        if a == 1:
            parts.append(coords[k])
        elif a > 1:
            parts.append(f"{coords[k]}^{a}")
    return "*".join(parts)


def perturbation(n: int, seed: int, eps: float = 0.02) -> MetricSpec:
    n, seed, eps = int(n), int(seed), float(eps)
    if n not in (4, 5, 6):
        raise ZooError("perturbation metrics are defined for n in {4, 5, 6}")
    if eps < 0:
        raise ZooError("eps must be nonnegative")
    if eps > MAX_EPS:
        raise ZooError(f"eps = {eps} too large for guaranteed definiteness (max {MAX_EPS})")
    rng = np.random.default_rng(seed)
    c = _coords(n)
    rho = PERTURBATION_BOX
    comps = [["0"] * n for _ in range(n)]
    row_bound = np.zeros(n)
    for i in range(n):
        for j in range(i, n):
            terms = [(np.zeros(n, dtype=int), rng.uniform(-1, 1))]
            for k in range(n):
                alpha = np.zeros(n, dtype=int)
                alpha[k] = 1
                terms.append((alpha, rng.uniform(-1, 1)))
            for deg in (2, 3, 4):
                for _ in range(3):
                    alpha = np.bincount(rng.integers(0, n, size=deg), minlength=n)
                    terms.append((alpha, rng.uniform(-1, 1)))
            bound = sum(abs(cf) * rho ** int(al.sum()) for al, cf in terms)
            row_bound[i] += eps * bound
            if i != j:
                row_bound[j] += eps * bound
            body = " + ".join(
                f"({cf!r})" + ("" if al.sum() == 0 else "*" + _monomial(al, c)) for al, cf in terms
            )
            pert = f"{eps!r}*({body})"
            comps[i][j] = f"1 + {pert}" if i == j else pert
            comps[j][i] = comps[i][j]
    if np.any(row_bound >= 1.0):
        raise ZooError(f"eps = {eps} too large for guaranteed definiteness on the box")
    if eps == 0:
        comps = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    return MetricSpec(
        name="perturbation",
        coords=tuple(c),
        components=tuple(tuple(r) for r in comps),
        box=tuple((-rho, rho) for _ in range(n)),
        oracle=Oracle(0.0, True, True, 0.0, 0.0, True) if eps == 0 else None,
        family="perturbation",
        family_params={"n": n, "seed": seed, "eps": eps},
    )


ZOO = {
    "euclidean": euclidean,
    "sphere": sphere,
    "hyperbolic": hyperbolic,
    "product_spheres": product_spheres,
    "conformal": conformal,
    "perturbation": perturbation,
}


def zoo(name: str, params: Mapping | None = None) -> MetricSpec:
    params = dict(params or {})
    try:
        ctor = ZOO[name]
    except KeyError:
        raise ZooError(f"unknown zoo metric {name!r}; choose from {sorted(ZOO)}") from None
    if name == "perturbation" and "eps" not in params and "epsilon" in params:
        params["eps"] = params.pop("epsilon")
    try:
        return ctor(**params)
    except TypeError as exc:
        raise ZooError(f"bad parameters for {name}: {exc}") from exc


def sample_points(metric: MetricSpec, count: int, seed: int = 0) -> np.ndarray:
    """Uniform points in the metric's sampling box, reproducible in ``seed``."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in metric.box])
    hi = np.array([b[1] for b in metric.box])
    return lo + (hi - lo) * rng.random((int(count), metric.dim))
