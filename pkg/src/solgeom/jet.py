"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` holds an array of scalar fields, each expanded to total order
``order`` in ``nvars`` variables about a fixed base point.  Coefficients are
Taylor coefficients (``d^a f / a!``), stored along the last axis in graded
order, so the coefficients of a lower-order jet are a prefix of the
higher-order layout.  Differentiating drops one order; all arithmetic is exact
up to floating point roundoff.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 4


class JetDomainError(ArithmeticError):
    """An elementary function was applied outside its (differentiable) domain."""


@dataclass(frozen=True)
class _Layout:
    nvars: int
    order: int
    monomials: tuple[tuple[int, ...], ...]
    index: dict
    degree: np.ndarray
    factorial: np.ndarray
    prefix: tuple[int, ...]  # number of monomials of total degree <= k
    mul_left: np.ndarray
    mul_right: np.ndarray
    mul_scatter: np.ndarray  # (pairs, size) 0/1 matrix


def _monomials(nvars: int, order: int):
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for v in combo:
                alpha[v] += 1
            out.append(tuple(alpha))
    return out


@lru_cache(maxsize=None)
def layout(nvars: int, order: int) -> _Layout:
    monos = _monomials(nvars, order)
    index = {m: i for i, m in enumerate(monos)}
    degree = np.array([sum(m) for m in monos], dtype=int)
    factorial = np.array([math.prod(math.factorial(a) for a in m) for m in monos], dtype=float)
    prefix = tuple(int(np.sum(degree <= k)) for k in range(order + 1))
    left, right, target = [], [], []
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            if degree[i] + degree[j] <= order:
                left.append(i)
                right.append(j)
                target.append(index[tuple(x + y for x, y in zip(a, b))])
    scatter = np.zeros((len(target), len(monos)))
    scatter[np.arange(len(target)), target] = 1.0
    return _Layout(nvars, order, tuple(monos), index, degree, factorial, prefix,
                   np.array(left), np.array(right), scatter)


@lru_cache(maxsize=None)
def _diff_table(nvars: int, order: int, var: int):
    """Index maps for d/dx_var from an order-``order`` jet to order-1."""
    hi, lo = layout(nvars, order), layout(nvars, order - 1)
    src, dst, mult = [], [], []
    for i, m in enumerate(hi.monomials):
        if m[var] == 0 or sum(m) > order:
            continue
        down = list(m)
        down[var] -= 1
        src.append(i)
        dst.append(lo.index[tuple(down)])
        mult.append(float(m[var]))
    return np.array(src, dtype=int), np.array(dst, dtype=int), np.array(mult)


def _as_data(x):
    return np.asarray(x, dtype=float)


class Jet:
    """Array of truncated Taylor expansions; the last data axis is the jet axis."""

    __slots__ = ("data", "nvars", "order")
    __array_priority__ = 1000

    def __init__(self, data, nvars: int, order: int):
        self.data = np.asarray(data, dtype=float)
        self.nvars = nvars
        self.order = order
        if self.data.shape[-1] != len(layout(nvars, order).monomials):
            raise ValueError("jet data does not match layout")

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = _as_data(value)
        size = len(layout(nvars, order).monomials)
        data = np.zeros(value.shape + (size,))
        data[..., 0] = value
        return cls(data, nvars, order)

    @classmethod
    def variables(cls, point, order: int) -> list["Jet"]:
        """Seed jets ``x_i = p_i + dx_i`` for every coordinate of ``point``."""
        point = [float(v) for v in point]
        n = len(point)
        lay = layout(n, order)
        out = []
        for i, v in enumerate(point):
            data = np.zeros(len(lay.monomials))
            data[0] = v
            if order >= 1:
                unit = [0] * n
                unit[i] = 1
                data[lay.index[tuple(unit)]] = 1.0
            out.append(cls(data, n, order))
        return out

    @staticmethod
    def stack(items, axis: int = 0) -> "Jet":
        items = list(items)
        nvars = items[0].nvars
        order = min(j.order for j in items)
        datas = [j.truncate(order).data for j in items]
        if axis < 0:
            axis -= 1
        return Jet(np.stack(datas, axis=axis), nvars, order)

    # basic properties ---------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.data.ndim - 1

    @property
    def value(self) -> np.ndarray:
        return self.data[..., 0]

    def __len__(self):
        return self.shape[0]

    def __repr__(self):
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order})"

    def derivative(self, alpha) -> np.ndarray:
        """Partial derivative ``d^alpha`` at the base point."""
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise ValueError(f"derivative order {sum(alpha)} exceeds jet order {self.order}")
        lay = layout(self.nvars, self.order)
        k = lay.index[alpha]
        return self.data[..., k] * lay.factorial[k]

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        size = layout(self.nvars, self.order).prefix[order]
        return Jet(self.data[..., :size], self.nvars, order)

    def diff(self, var: int) -> "Jet":
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, dst, mult = _diff_table(self.nvars, self.order, var)
        lo = layout(self.nvars, self.order - 1)
        data = np.zeros(self.shape + (len(lo.monomials),))
        data[..., dst] = self.data[..., src] * mult
        return Jet(data, self.nvars, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of first partials; the new axis is the *last* logical axis."""
        return Jet.stack([self.diff(i) for i in range(self.nvars)], axis=-1)

    def is_constant(self) -> bool:
        return not np.any(self.data[..., 1:])

    # array-like manipulation -----------------------------------------------
    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.data[key + (Ellipsis, slice(None))] if Ellipsis not in key
                   else self.data[key + (slice(None),)], self.nvars, self.order)

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(np.transpose(self.data, tuple(axes) + (self.ndim,)), self.nvars, self.order)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def retag(self, spec: str) -> "Jet":
        """Permute logical axes with einsum labels, e.g. ``"jia->ija"``."""
        src, dst = spec.split("->")
        return Jet(np.einsum(f"{src}z->{dst}z", self.data), self.nvars, self.order)

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis % self.ndim,)
        else:
            axis = tuple(a % self.ndim for a in axis)
        return Jet(self.data.sum(axis=axis), self.nvars, self.order)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.data.reshape(tuple(shape) + (self.data.shape[-1],)), self.nvars, self.order)

    # arithmetic ------------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            data = a.data.copy() if np.ndim(other) == 0 else np.broadcast_to(
                a.data, np.broadcast_shapes(a.data.shape, np.shape(other) + (1,))).copy()
            data[..., 0] = data[..., 0] + _as_data(other)
            return Jet(data, a.nvars, a.order)
        return Jet(a.data + b.data, a.nvars, a.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.data, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(a.data * _as_data(other)[..., None], a.nvars, a.order)
        lay = layout(a.nvars, a.order)
        prod = a.data[..., lay.mul_left] * b.data[..., lay.mul_right]
        return Jet(prod @ lay.mul_scatter, a.nvars, a.order)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        u0 = self.value
        if np.any(u0 == 0.0):
            raise JetDomainError("division by zero")
        derivs = []
        for k in range(self.order + 1):
            derivs.append((-1.0) ** k * math.factorial(k) / u0 ** (k + 1))
        return self._univariate(derivs)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = _as_data(other)
        if np.any(other == 0.0):
            raise JetDomainError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return power(self, exponent)
        return power(self, Jet.constant(exponent, self.nvars, self.order))

    # univariate composition ---------------------------------------------------------
    def _univariate(self, derivs) -> "Jet":
        """Compose ``h`` with this jet given ``derivs[k] = h^(k)(value)``."""
        delta = Jet(self.data.copy(), self.nvars, self.order)
        delta.data[..., 0] = 0.0
        out = Jet.constant(derivs[0], self.nvars, self.order)
        term = None
        for k in range(1, self.order + 1):
            term = delta if term is None else term * delta
            out = out + term * (np.asarray(derivs[k]) / math.factorial(k))
        return out

    def compose(self, inner) -> "Jet":
        """Substitute jets ``inner[i]`` (in other variables) for this jet's variables.

        ``self`` is an expansion in ``len(inner)`` variables about the point
        ``[g.value for g in inner]``; the result is an expansion in the
        variables of ``inner`` truncated to the smaller of the two orders.
        """
        inner = list(inner)
        if len(inner) != self.nvars:
            raise ValueError("compose needs one inner jet per variable")
        order = min(self.order, min(g.order for g in inner))
        nv = inner[0].nvars
        deltas = []
        for g in inner:
            d = Jet(g.truncate(order).data.copy(), nv, order)
            d.data[..., 0] = 0.0
            deltas.append(d)
        one = Jet.constant(1.0, nv, order)
        powers = []
        for d in deltas:
            row = [one]
            for _ in range(order):
                row.append(row[-1] * d)
            powers.append(row)
        outer = layout(self.nvars, order)
        basis = []
        for alpha in outer.monomials:
            term = one
            for var, e in enumerate(alpha):
                if e:
                    term = term * powers[var][e]
            basis.append(term.data)
        basis = np.stack(basis)
        data = self.truncate(order).data @ basis
        return Jet(data, nv, order)


def jeinsum(spec: str, a, b) -> Jet:
    """Einstein contraction of two operands, at least one a :class:`Jet`.

    ``spec`` uses only logical axes, e.g. ``"kl,lij->kij"``.
    """
    ins, out = spec.split("->")
    sa, sb = ins.split(",")
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        lay = layout(a.nvars, a.order)
        data = np.einsum(f"{sa}z,{sb}z->{out}z", a.data[..., lay.mul_left], b.data[..., lay.mul_right])
        return Jet(data @ lay.mul_scatter, a.nvars, a.order)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{sa}z,{sb}->{out}z", a.data, _as_data(b)), a.nvars, a.order)
    return Jet(np.einsum(f"{sa},{sb}z->{out}z", _as_data(a), b.data), b.nvars, b.order)


def inv(matrix: Jet) -> Jet:
    """Inverse of a square matrix of jets (last two logical axes)."""
    a0 = np.linalg.inv(matrix.value)
    delta = Jet(matrix.data.copy(), matrix.nvars, matrix.order)
    delta.data[..., 0] = 0.0
    # (A0 + D)^-1 = sum_k (-A0^-1 D)^k A0^-1, exact because D is nilpotent
    step = -jeinsum("ij,jk->ik", a0, delta)
    out = Jet.constant(a0, matrix.nvars, matrix.order)
    term = out
    for _ in range(matrix.order):
        term = jeinsum("ij,jk->ik", step, term)
        out = out + term
    return out


# elementary functions ------------------------------------------------------------------

def exp(u: Jet) -> Jet:
    e = np.exp(u.value)
    return u._univariate([e] * (u.order + 1))


def log(u: Jet) -> Jet:
    u0 = u.value
    if np.any(u0 <= 0.0):
        raise JetDomainError("log of a non-positive number")
    derivs = [np.log(u0)]
    for k in range(1, u.order + 1):
        derivs.append((-1.0) ** (k - 1) * math.factorial(k - 1) / u0 ** k)
    return u._univariate(derivs)


def sin(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    cycle = [s, c, -s, -c]
    return u._univariate([cycle[k % 4] for k in range(u.order + 1)])


def cos(u: Jet) -> Jet:
    s, c = np.sin(u.value), np.cos(u.value)
    cycle = [c, -s, -c, s]
    return u._univariate([cycle[k % 4] for k in range(u.order + 1)])


def tan(u: Jet) -> Jet:
    if np.any(np.cos(u.value) == 0.0):
        raise JetDomainError("tan at a pole")
    return sin(u) / cos(u)


def sinh(u: Jet) -> Jet:
    s, c = np.sinh(u.value), np.cosh(u.value)
    return u._univariate([s if k % 2 == 0 else c for k in range(u.order + 1)])


def cosh(u: Jet) -> Jet:
    s, c = np.sinh(u.value), np.cosh(u.value)
    return u._univariate([c if k % 2 == 0 else s for k in range(u.order + 1)])


def _real_power_derivs(u0, p: float, order: int):
    derivs = []
    coeff = 1.0
    for k in range(order + 1):
        derivs.append(coeff * u0 ** (p - k))
        coeff *= p - k
    return derivs


def sqrt(u: Jet) -> Jet:
    u0 = u.value
    if np.any(u0 < 0.0):
        raise JetDomainError("sqrt of a negative number")
    if u.order > 0 and np.any(u0 == 0.0):
        raise JetDomainError("sqrt is not differentiable at zero")
    if u.order == 0:
        return Jet(np.sqrt(u.data), u.nvars, 0)
    return u._univariate(_real_power_derivs(u0, 0.5, u.order))


def power(base: Jet, exponent: Jet) -> Jet:
    base, exponent = base._coerce(exponent)
    if exponent.is_constant():
        p = exponent.value
        if p.ndim == 0 and float(p).is_integer():
            n = int(p)
            if n < 0:
                return power(base, Jet.constant(-n, base.nvars, base.order)).reciprocal()
            result = Jet.constant(np.ones(base.shape), base.nvars, base.order)
            sq = base
            while n:
                if n & 1:
                    result = result * sq
                n >>= 1
                if n:
                    sq = sq * sq
            return result
        b0 = base.value
        if np.any(b0 < 0.0):
            raise JetDomainError("non-integer power of a negative number")
        if np.any(b0 == 0.0) and (base.order > 0 or np.any(p < 0)):
            raise JetDomainError("non-integer power is not differentiable at zero")
        if base.order == 0:
            return Jet(b0[..., None] ** p[..., None], base.nvars, 0)
        return base._univariate(_real_power_derivs(b0, p, base.order))
    if np.any(base.value <= 0.0):
        raise JetDomainError("variable exponent needs a positive base")
    return exp(exponent * log(base))


FUNCTIONS = {
    "exp": exp,
    "log": log,
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "sinh": sinh,
    "cosh": cosh,
    "sqrt": sqrt,
}
