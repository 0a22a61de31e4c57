"""Truncated multivariate Taylor arithmetic ("jets").

A jet of order ``m`` in ``n`` variables stores the Taylor coefficients
``c_alpha = d^alpha f / alpha!`` for every multi-index with ``|alpha| <= m``.
Coefficients live in the last axis of ``Jet.coef``; any leading axes are
free (tensor components, batches of base points), so a whole tensor field
can be carried as a single jet array.

Multi-indices are enumerated in graded lexicographic order: by total degree
first, then descending lexicographically within a degree (``x1^2`` before
``x1*x2`` before ``x2^2``). Because of the grading, the coefficient table of
order ``m`` is a prefix of the table of any order above ``m``; truncation is
a slice.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

MAX_ORDER = 4


class JetError(ValueError):
    """Raised on incompatible jets or an undefined jet operation."""


def n_coefficients(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


@functools.lru_cache(maxsize=None)
def multi_indices(nvars: int, order: int) -> np.ndarray:
    """All exponent tuples with total degree <= order, in graded lex order."""
    rows = []
    for d in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            alpha = [0] * nvars
            for v in combo:
                alpha[v] += 1
            rows.append(alpha)
    out = np.array(rows, dtype=np.int64).reshape(-1, nvars)
    out.setflags(write=False)
    return out


def _keys(alphas: np.ndarray, base: int) -> np.ndarray:
    weights = base ** np.arange(alphas.shape[-1], dtype=np.int64)
    return alphas @ weights


class _Tables:
    """Index tables shared by every jet of a given (nvars, order)."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.alphas = multi_indices(nvars, order)
        self.size = len(self.alphas)
        self.degree = self.alphas.sum(axis=1)
        self.factorial = np.array(
            [math.prod(math.factorial(int(a)) for a in row) for row in self.alphas],
            dtype=float,
        )
        base = order + 2
        keys = _keys(self.alphas, base)
        self._base = base
        self._sorter = np.argsort(keys)
        self._sorted_keys = keys[self._sorter]

        # truncated product: pairs (a, b) with |a| + |b| <= order
        ia, ib = np.nonzero(self.degree[:, None] + self.degree[None, :] <= order)
        ic = self.lookup(self.alphas[ia] + self.alphas[ib])
        self.left = ia
        self.right = ib
        scatter = np.zeros((len(ia), self.size))
        scatter[np.arange(len(ia)), ic] = 1.0
        self.scatter = scatter

        # d/dx_i maps order `order` coefficients onto order `order - 1`
        self.diff_src = []
        self.diff_factor = []
        if order > 0:
            lower = multi_indices(nvars, order - 1)
            for i in range(nvars):
                shifted = lower.copy()
                shifted[:, i] += 1
                self.diff_src.append(self.lookup(shifted))
                self.diff_factor.append((lower[:, i] + 1).astype(float))

    def lookup(self, alphas: np.ndarray) -> np.ndarray:
        keys = _keys(np.asarray(alphas, dtype=np.int64), self._base)
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.clip(pos, 0, self.size - 1)
        if not np.all(self._sorted_keys[pos] == keys):
            raise JetError("multi-index outside the coefficient table")
        return self._sorter[pos]


@functools.lru_cache(maxsize=None)
def tables(nvars: int, order: int) -> _Tables:
    if not 0 <= order <= MAX_ORDER:
        raise JetError(f"jet order must lie in 0..{MAX_ORDER}, got {order}")
    if nvars < 1:
        raise JetError("jets need at least one variable")
    return _Tables(nvars, order)


class Jet:
    """Array of truncated Taylor expansions sharing (nvars, order).

    ``coef`` has shape ``shape + (K,)`` with ``K = C(nvars + order, order)``.
    Arithmetic is elementwise over ``shape`` with numpy broadcasting.
    """

    __slots__ = ("coef", "nvars", "order")
    __array_ufunc__ = None

    def __init__(self, coef, nvars: int, order: int):
        coef = np.asarray(coef, dtype=float)
        size = tables(nvars, order).size
        if coef.ndim == 0 or coef.shape[-1] != size:
            raise JetError(
                f"coefficient table must have length {size} for "
                f"nvars={nvars}, order={order}; got shape {coef.shape}"
            )
        self.coef = coef
        self.nvars = nvars
        self.order = order

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (tables(nvars, order).size,))
        coef[..., 0] = value
        return cls(coef, nvars, order)

    @classmethod
    def variable(cls, index: int, value, nvars: int, order: int) -> "Jet":
        """The coordinate function x_index expanded about ``value``."""
        jet = cls.constant(value, nvars, order)
        if order >= 1:
            jet.coef[..., 1 + index] = 1.0
        return jet

    @classmethod
    def zeros(cls, shape, nvars: int, order: int) -> "Jet":
        return cls(np.zeros(tuple(shape) + (tables(nvars, order).size,)), nvars, order)

    # structure ----------------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.coef.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.coef[..., 0]

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.coef[key + (Ellipsis, slice(None))], self.nvars, self.order)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, shape={self.shape})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        size = tables(self.nvars, order).size
        return Jet(self.coef[..., :size], self.nvars, order)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.coef.reshape(tuple(shape) + (self.coef.shape[-1],)), self.nvars, self.order)

    def moveaxis(self, source: int, destination: int) -> "Jet":
        nd = len(self.shape)
        return Jet(
            np.moveaxis(self.coef, source % nd, destination % nd),
            self.nvars,
            self.order,
        )

    def transpose(self, *axes) -> "Jet":
        return Jet(np.transpose(self.coef, tuple(axes) + (len(axes),)), self.nvars, self.order)

    def coefficient(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=np.int64)
        if alpha.shape != (self.nvars,) or np.any(alpha < 0):
            raise JetError(f"bad multi-index {tuple(alpha)} for {self.nvars} variables")
        if alpha.sum() > self.order:
            raise JetError(f"|alpha| = {alpha.sum()} exceeds jet order {self.order}")
        return self.coef[..., int(tables(self.nvars, self.order).lookup(alpha[None])[0])]

    def partial(self, alpha) -> np.ndarray:
        """Raw partial derivative ``alpha! * c_alpha``."""
        alpha = np.asarray(alpha, dtype=np.int64)
        c = self.coefficient(alpha)
        return c * math.prod(math.factorial(int(a)) for a in alpha)

    def derivatives(self) -> np.ndarray:
        """All raw partials, same layout as ``coef``."""
        return self.coef * tables(self.nvars, self.order).factorial

    def diff(self, index: int) -> "Jet":
        """Jet of d f / d x_index; the order drops by one."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        t = tables(self.nvars, self.order)
        coef = self.coef[..., t.diff_src[index]] * t.diff_factor[index]
        return Jet(coef, self.nvars, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of all first partials along a new trailing component axis."""
        parts = [self.diff(i).coef for i in range(self.nvars)]
        return Jet(np.stack(parts, axis=-2), self.nvars, self.order - 1)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Jet | np.ndarray":
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise JetError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        return np.asarray(other, dtype=float)

    def _aligned(self, other: "Jet"):
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order), order

    def __add__(self, other):
        other = self._coerce(other)
        if isinstance(other, Jet):
            a, b, m = self._aligned(other)
            return Jet(a.coef + b.coef, self.nvars, m)
        coef = np.array(np.broadcast_to(self.coef, np.broadcast_shapes(self.coef.shape, other.shape + (1,))))
        coef[..., 0] += other
        return Jet(coef, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if isinstance(other, Jet):
            a, b, m = self._aligned(other)
            t = tables(self.nvars, m)
            prod = a.coef[..., t.left] * b.coef[..., t.right]
            return Jet(prod @ t.scatter, self.nvars, m)
        return Jet(self.coef * other[..., None], self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if np.any(other == 0):
            raise JetError("division by zero")
        return Jet(self.coef / other[..., None], self.nvars, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)):
            raise JetError("jets support integer powers only")
        if k < 0:
            return (self ** (-k)).reciprocal()
        result = Jet.constant(np.ones(self.shape), self.nvars, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def reciprocal(self) -> "Jet":
        b0 = self.value
        if np.any(b0 == 0):
            raise JetError("reciprocal of a jet with zero constant term")
        m = self.order
        ks = np.arange(m + 1).reshape((-1,) + (1,) * b0.ndim)
        table = (-1.0) ** ks * b0 ** (-ks - 1.0)
        return self.compose(table)

    def compose(self, table) -> "Jet":
        """Evaluate ``sum_k table[k] * (self - self.value)**k`` by Horner's rule.

        ``table[k]`` holds the k-th Taylor coefficient (``f^(k)/k!``) of a
        univariate function at this jet's constant term.
        """
        table = np.asarray(table, dtype=float)
        m = self.order
        if table.shape[0] < m + 1:
            raise JetError(f"outer Taylor table needs {m + 1} entries, got {table.shape[0]}")
        h = self - self.value
        result = Jet.constant(np.broadcast_to(table[m], self.shape), self.nvars, m)
        for k in range(m - 1, -1, -1):
            result = result * h + table[k]
        return result


# --------------------------------------------------------------------------
# module-level operations


def jet_arithmetic(a: Jet, b: Jet, op: str) -> Jet:
    """Elementwise ``add``, ``sub``, ``mul`` or ``div`` of two jets."""
    if a.nvars != b.nvars or a.order != b.order:
        raise JetError(
            f"jet mismatch: (n={a.nvars}, m={a.order}) vs (n={b.nvars}, m={b.order})"
        )
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise JetError(f"unknown jet operation {op!r}")


def compose_univariate(outer, inner: Jet) -> Jet:
    """Compose a univariate Taylor table with a multivariate jet."""
    return inner.compose(outer)


def _elementary_table(name: str, x0: np.ndarray, order: int) -> np.ndarray:
    ks = range(order + 1)
    if name == "exp":
        e = np.exp(x0)
        return np.stack([e / math.factorial(k) for k in ks])
    if name == "sin":
        cyc = (np.sin(x0), np.cos(x0), -np.sin(x0), -np.cos(x0))
        return np.stack([cyc[k % 4] / math.factorial(k) for k in ks])
    if name == "cos":
        cyc = (np.cos(x0), -np.sin(x0), -np.cos(x0), np.sin(x0))
        return np.stack([cyc[k % 4] / math.factorial(k) for k in ks])
    if name == "sqrt":
        if np.any(x0 <= 0):
            raise JetError("sqrt of a jet with nonpositive constant term")
        return np.stack([_binom_half(k) * x0 ** (0.5 - k) for k in ks])
    raise JetError(f"no Taylor table for {name!r}")


def _binom_half(k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= (0.5 - j) / (j + 1)
    return out


def jexp(x: Jet) -> Jet:
    return x.compose(_elementary_table("exp", x.value, x.order))


def jsin(x: Jet) -> Jet:
    return x.compose(_elementary_table("sin", x.value, x.order))


def jcos(x: Jet) -> Jet:
    return x.compose(_elementary_table("cos", x.value, x.order))


def jsqrt(x: Jet) -> Jet:
    return x.compose(_elementary_table("sqrt", x.value, x.order))


ELEMENTARY = {"exp": jexp, "sin": jsin, "cos": jcos, "sqrt": jsqrt}


def partial(j: Jet, alpha) -> np.ndarray:
    return j.partial(alpha)


# --------------------------------------------------------------------------
# tensor contractions of jet arrays


def _split(subscripts: str):
    lhs, out = subscripts.replace(" ", "").split("->")
    ins = lhs.split(",")
    if len(ins) != 2:
        raise JetError("jet_einsum contracts exactly two operands")
    return ins, out


def jet_einsum(subscripts: str, a, b, order: int | None = None) -> Jet:
    """``numpy.einsum`` over component axes with truncated jet products.

    Either operand may be a plain array, which is treated as a constant.
    The trailing coefficient axis is implicit and must not appear in the
    subscripts.
    """
    (sa, sb), so = _split(subscripts)
    if isinstance(a, Jet) and isinstance(b, Jet):
        if a.nvars != b.nvars:
            raise JetError("variable count mismatch in jet_einsum")
        m = min(a.order, b.order) if order is None else order
        a, b = a.truncate(m), b.truncate(m)
        t = tables(a.nvars, m)
        pa = a.coef[..., t.left]
        pb = b.coef[..., t.right]
        prod = np.einsum(f"{sa}Z,{sb}Z->{so}Z", pa, pb, optimize=True)
        return Jet(prod @ t.scatter, a.nvars, m)
    if isinstance(a, Jet):
        jet, const, sj, sc, first = a, np.asarray(b, dtype=float), sa, sb, True
    elif isinstance(b, Jet):
        jet, const, sj, sc, first = b, np.asarray(a, dtype=float), sb, sa, False
    else:
        raise JetError("jet_einsum needs at least one Jet operand")
    if order is not None:
        jet = jet.truncate(order)
    if first:
        coef = np.einsum(f"{sj}Z,{sc}->{so}Z", jet.coef, const, optimize=True)
    else:
        coef = np.einsum(f"{sc},{sj}Z->{so}Z", const, jet.coef, optimize=True)
    return Jet(coef, jet.nvars, jet.order)


def jet_inverse(g: Jet) -> Jet:
    """Matrix inverse of a jet-valued matrix over its last two axes.

    Uses the terminating Neumann series
    ``G^-1 = sum_k (-G0^-1 H)^k G0^-1`` with ``H = G - G0``.
    """
    g0 = g.value
    g0inv = np.linalg.inv(g0)
    h = g - g0
    step = -jet_einsum("...ij,...jk->...ik", g0inv, h)
    term = Jet.constant(g0inv, g.nvars, g.order)
    total = term
    for _ in range(g.order):
        term = jet_einsum("...ij,...jk->...ik", step, term)
        total = total + term
    return total


def stack(jets, axis: int = 0) -> Jet:
    jets = list(jets)
    m = min(j.order for j in jets)
    nd = len(jets[0].shape) + 1
    coef = np.stack([j.truncate(m).coef for j in jets], axis=axis % nd)
    return Jet(coef, jets[0].nvars, m)
