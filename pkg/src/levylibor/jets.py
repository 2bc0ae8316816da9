"""Truncated multivariate Taylor jets.

A :class:`Jet` holds the Taylor coefficients ``c_e = d^e f(x) / e!`` of a function
of ``n`` variables at a base point, for every exponent vector ``e`` of total order
``<= order``.  Products are truncated convolutions driven by precomputed index
tables, so a 5-variable order-6 product costs a single ``bincount``.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Sequence

import numpy as np


class OrderBudgetError(ValueError):
    """Raised when a derivative beyond the jet's valid order is requested."""


class JetSpace:
    """Monomial basis of total order ``<= order`` in ``nvars`` variables."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        exps = [e for tot in range(order + 1) for e in _compositions(tot, nvars)]
        self.exps = np.array(exps, dtype=int).reshape(len(exps), nvars)
        self.index = {e: i for i, e in enumerate(exps)}
        self.total = self.exps.sum(axis=1)
        self.factorial = np.array([math.prod(math.factorial(a) for a in e) for e in exps], dtype=float)
        ia, ib, ic = [], [], []
        for a, ea in enumerate(exps):
            for b, eb in enumerate(exps):
                if self.total[a] + self.total[b] <= order:
                    ia.append(a)
                    ib.append(b)
                    ic.append(self.index[tuple(x + y for x, y in zip(ea, eb))])
        self._mul = (np.array(ia), np.array(ib), np.array(ic))
        # shift tables for differentiation: src index of e + 1_i, for every e with |e| < order
        self._shift = []
        for i in range(nvars):
            dst, src, fac = [], [], []
            for e_idx, e in enumerate(exps):
                if self.total[e_idx] < order:
                    up = list(e)
                    up[i] += 1
                    dst.append(e_idx)
                    src.append(self.index[tuple(up)])
                    fac.append(up[i])
            self._shift.append((np.array(dst, dtype=int), np.array(src, dtype=int), np.array(fac, dtype=float)))

    @property
    def size(self) -> int:
        return len(self.exps)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


def multi_index(indices: Sequence[int], nvars: int) -> tuple:
    """Exponent vector of the mixed partial over the given (0-based) variables."""
    e = [0] * nvars
    for i in indices:
        e[i] += 1
    return tuple(e)


class Jet:
    """Truncated Taylor expansion of a scalar function at a base point.

    ``order`` is the valid truncation order; coefficients above it are zero and
    carry no information.
    """

    __slots__ = ("space", "coef", "order")

    def __init__(self, space: JetSpace, coef: np.ndarray, order: int | None = None):
        self.space = space
        self.coef = coef
        self.order = space.order if order is None else order

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, space: JetSpace, value: float) -> "Jet":
        coef = np.zeros(space.size)
        coef[0] = value
        return cls(space, coef)

    @classmethod
    def variable(cls, space: JetSpace, i: int, value: float) -> "Jet":
        """The coordinate function ``x_i`` expanded at ``x_i = value``."""
        coef = np.zeros(space.size)
        coef[0] = value
        if space.order >= 1:
            e = [0] * space.nvars
            e[i] = 1
            coef[space.index[tuple(e)]] = 1.0
        return cls(space, coef)

    @classmethod
    def univariate(cls, space: JetSpace, i: int, derivs: Sequence[float]) -> "Jet":
        """Function of ``x_i`` alone with derivatives ``derivs[m] = f^{(m)}``."""
        coef = np.zeros(space.size)
        top = min(len(derivs) - 1, space.order)
        for m in range(top + 1):
            e = [0] * space.nvars
            e[i] = m
            coef[space.index[tuple(e)]] = derivs[m] / math.factorial(m)
        return cls(space, coef, top if len(derivs) - 1 < space.order else space.order)

    # access ---------------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coef[0])

    def partial(self, indices: Sequence[int]) -> float:
        """Mixed partial ``d^m f / dx_{i_1} ... dx_{i_m}`` (0-based, any order of indices)."""
        if len(indices) > self.order:
            raise OrderBudgetError(f"order-{len(indices)} partial requested from an order-{self.order} jet")
        idx = self.space.index[multi_index(indices, self.space.nvars)]
        return float(self.coef[idx] * self.space.factorial[idx])

    def derivative(self, i: int) -> "Jet":
        """Jet of ``df/dx_i`` (valid order drops by one)."""
        if self.order < 1:
            raise OrderBudgetError("cannot differentiate an order-0 jet")
        dst, src, fac = self.space._shift[i]
        coef = np.zeros_like(self.coef)
        coef[dst] = self.coef[src] * fac
        return Jet(self.space, self._trunc(coef, self.order - 1), self.order - 1)

    def derivatives(self, indices: Sequence[int]) -> "Jet":
        out = self
        for i in indices:
            out = out.derivative(i)
        return out

    def _trunc(self, coef, order):
        if order < self.space.order:
            coef[self.space.total > order] = 0.0
        return coef

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            return Jet(self.space, self._trunc(self.coef + other.coef, order), order)
        coef = self.coef.copy()
        coef[0] += other
        return Jet(self.space, coef, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coef, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            ia, ib, ic = self.space._mul
            coef = np.bincount(ic, weights=self.coef[ia] * other.coef[ib], minlength=self.space.size)
            order = min(self.order, other.order)
            return Jet(self.space, self._trunc(coef, order), order)
        return Jet(self.space, self.coef * other, self.order)

    __rmul__ = __mul__

    def compose(self, derivs: Sequence[float]) -> "Jet":
        """``g(f(x))`` given ``derivs[m] = g^{(m)}(f(x0))`` for ``m = 0..order``."""
        h = Jet(self.space, self.coef.copy(), self.order)
        h.coef[0] = 0.0
        out = Jet.constant(self.space, derivs[0])
        power = Jet.constant(self.space, 1.0)
        for m in range(1, self.order + 1):
            power = power * h
            out = out + power * (derivs[m] / math.factorial(m))
        out.order = self.order
        return out

    def reciprocal(self) -> "Jet":
        a = self.value
        derivs = [(-1) ** m * math.factorial(m) / a ** (m + 1) for m in range(self.order + 1)]
        return self.compose(derivs)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / other)


def monomial(space: JetSpace, x, indices: Sequence[int]) -> Jet:
    """Jet of ``prod_{i in indices} x_i`` (0-based, repeats allowed)."""
    out = Jet.constant(space, 1.0)
    for i in indices:
        out = out * Jet.variable(space, i, x[i])
    return out


def rational_weight(space: JetSpace, i: int, x_i: float, delta: float) -> Jet:
    """Jet of ``w(x_i) = delta x_i / (1 + delta x_i)``.

    ``w^{(m)} = (-1)^{m+1} m! delta^m / (1 + delta x)^{m+1}`` for ``m >= 1``.
    """
    den = 1.0 + delta * x_i
    if den == 0:
        from .market import SingularStateError

        raise SingularStateError("1 + delta x vanishes")
    derivs = [delta * x_i / den] + [
        (-1) ** (m + 1) * math.factorial(m) * delta**m / den ** (m + 1) for m in range(1, space.order + 1)
    ]
    return Jet.univariate(space, i, derivs)


def ordered_tuples(indices: Sequence[int], m: int):
    """Sorted multisets of size ``m`` from ``indices`` with their number of orderings."""
    for combo in itertools.combinations_with_replacement(indices, m):
        counts = {}
        for c in combo:
            counts[c] = counts.get(c, 0) + 1
        mult = math.factorial(m) // math.prod(math.factorial(v) for v in counts.values())
        yield combo, mult
