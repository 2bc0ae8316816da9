"""Second-order expansion of prices around the log-normal Libor market model.

The model is embedded in the family driven by ``alpha X_{t/alpha^2}``; prices
are ``P0 + alpha P1 + alpha^2 P2 + O(alpha^3)`` where ``P0`` is the log-normal LMM
price with covariance ``Sigma`` and the corrections ``ũ_1``, ``ũ_2`` are explicit
sums over mixed partial derivatives of ``u_0`` weighted by integrated moments of
the Lévy measure, under frozen drift weights.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .derivs import caplet_u0_jet, caplet_variance, v_jet, vbar_jet
from .jets import Jet, ordered_tuples
from .market import MarketModel, weights


@dataclass
class PriceBreakdown:
    """Order-0/1/2 contributions of an expansion price.

    ``u0, u1, u2`` are the value-function terms; ``P0, P1, P2`` are the same
    terms multiplied by ``scale`` (discount numeraire times accrual).
    """

    u0: float
    u1: float
    u2: float
    scale: float
    alpha: float = 1.0
    order: int = 2
    diagnostics: dict = field(default_factory=dict)

    @property
    def P0(self) -> float:
        return self.scale * self.u0

    @property
    def P1(self) -> float:
        return self.scale * self.u1

    @property
    def P2(self) -> float:
        return self.scale * self.u2

    def total(self, alpha: float | None = None, order: int | None = None) -> float:
        a = self.alpha if alpha is None else alpha
        o = self.order if order is None else order
        out = self.P0
        if o >= 1:
            out += a * self.P1
        if o >= 2:
            out += a * a * self.P2
        return out

    @property
    def price(self) -> float:
        return self.total()


class _Moments:
    """Cached integrated and nested moments over ``[t, T]`` for 1-based index tuples."""

    def __init__(self, model: MarketModel, t: float, T: float):
        self.model, self.t, self.T = model, t, T
        self._prof: dict = {}
        self._single: dict = {}
        self._nested: dict = {}

    def profile(self, idx):
        key = tuple(sorted(idx))
        if key not in self._prof:
            self._prof[key] = self.model.moment_profile([i + 1 for i in key], self.t, self.T)
        return self._prof[key]

    def integral(self, idx) -> float:
        key = tuple(sorted(idx))
        if key not in self._single:
            self._single[key] = sum(ln * v for ln, v in self.profile(key))
        return self._single[key]

    def nested(self, outer, inner) -> float:
        key = (tuple(sorted(outer)), tuple(sorted(inner)))
        if key not in self._nested:
            a, b = self.profile(key[0]), self.profile(key[1])
            total, tail = 0.0, 0.0
            for (ln, av), (_, bv) in zip(reversed(a), reversed(b)):
                total += av * (ln * tail + 0.5 * bv * ln * ln)
                tail += bv * ln
            self._nested[key] = total
        return self._nested[key]


def _drift_triples(start: Sequence[int], n: int, size: int):
    """``(j, (j_0, ..., j_{size-1}))`` with ``j`` in ``start`` and ``j < j_0 < ...``."""
    for j in start:
        for rest in itertools.combinations(range(j + 1, n), size):
            yield j, rest


def u1_tilde(model: MarketModel, u0: Jet, x, t: float, T: float, indices: Sequence[int] | None = None) -> tuple:
    """First-order correction ``ũ_1(t, x)``; returns ``(value, {"jump": ..., "drift": ...})``.

    ``indices`` (0-based) restricts the derivative sums, e.g. to ``k-1..n-1`` for a
    caplet on ``L^k`` whose ``u_0`` ignores earlier rates.
    """
    n = model.n
    x = np.asarray(x, dtype=float)
    idx = list(range(n)) if indices is None else list(indices)
    mom = _Moments(model, t, T)
    w = weights(x, model.accruals)
    jump = 0.0
    for combo, mult in ordered_tuples(idx, 3):
        m3 = mom.integral(combo)
        if m3:
            jump += mult * np.prod(x[list(combo)]) * u0.partial(combo) * m3
    drift = 0.0
    for j, (j0, j1) in _drift_triples(idx, n, 2):
        m3 = mom.integral((j, j0, j1))
        if m3:
            drift += w[j0] * w[j1] * x[j] * u0.partial((j,)) * m3
    return jump / 6.0 - drift, {"jump": jump / 6.0, "drift": -drift}


def u2_tilde(
    model: MarketModel,
    u0: Jet,
    x,
    t: float,
    T: float,
    indices: Sequence[int] | None = None,
    e4_repeat_j: bool = False,
) -> tuple:
    """Second-order correction ``ũ_2 = Ẽ_1 + Ẽ_2 + Ẽ_3 + Ẽ_4``; returns ``(value, parts)``.

    ``e4_repeat_j`` evaluates the fourth-moment drift term with the loading tuple
    ``(lambda^j, lambda^{j_0}, lambda^{j_1}, lambda^j)`` instead of
    ``(lambda^j, lambda^{j_0}, lambda^{j_1}, lambda^{j_2})``.
    """
    n = model.n
    x = np.asarray(x, dtype=float)
    idx = list(range(n)) if indices is None else list(indices)
    if u0.order < 6:
        from .jets import OrderBudgetError

        raise OrderBudgetError("ũ_2 needs a u_0 jet of order 6")
    mom = _Moments(model, t, T)
    w = weights(x, model.accruals)

    triples = [(c, m) for c, m in ordered_tuples(idx, 3) if mom.integral(c)]
    bar_triples = [(j, a, b) for j, (a, b) in _drift_triples(idx, n, 2) if mom.integral((j, a, b))]
    vj = {c: v_jet(*c, u0, x) for c, _ in triples}
    vbj = {c: vbar_jet(*c, u0, x, model.accruals) for c in bar_triples}

    def inner(outer, pick):
        """``(1/6) sum_i N v-term - sum_j N v̄-term`` for a given outer moment tuple."""
        s = 0.0
        for c, mult in triples:
            s += mult * mom.nested(outer, c) * pick(vj[c])
        s /= 6.0
        for c in bar_triples:
            s -= mom.nested(outer, c) * pick(vbj[c])
        return s

    e1 = 0.0
    for c, mult in triples:
        e1 += mult * np.prod(x[list(c)]) * inner(c, lambda jet, c=c: jet.partial(c))
    e1 /= 6.0

    e2 = 0.0
    for j, (j0, j1) in _drift_triples(idx, n, 2):
        outer = (j, j0, j1)
        if not mom.integral(outer):
            continue
        e2 -= w[j0] * w[j1] * x[j] * inner(outer, lambda jet, j=j: jet.partial((j,)))

    e3 = 0.0
    for c, mult in ordered_tuples(idx, 4):
        m4 = mom.integral(c)
        if m4:
            e3 += mult * np.prod(x[list(c)]) * u0.partial(c) * m4
    e3 /= 24.0

    e4 = 0.0
    for j, (j0, j1, j2) in _drift_triples(idx, n, 3):
        m4 = mom.integral((j, j0, j1, j if e4_repeat_j else j2))
        if m4:
            e4 -= w[j0] * w[j1] * w[j2] * x[j] * u0.partial((j,)) * m4

    parts = {"E1": e1, "E2": e2, "E3": e3, "E4": e4}
    return e1 + e2 + e3 + e4, parts


def expand(
    model: MarketModel,
    u0: Jet,
    x,
    t: float,
    T: float,
    scale: float,
    alpha: float = 1.0,
    order: int = 2,
    indices=None,
    e4_repeat_j: bool = False,
) -> PriceBreakdown:
    """Assemble a :class:`PriceBreakdown` for an arbitrary ``u_0`` jet with horizon ``T``."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    diag: dict = {}
    u1 = u2 = 0.0
    if order >= 1:
        u1, d1 = u1_tilde(model, u0, x, t, T, indices)
        diag.update({"u1_" + key: val for key, val in d1.items()})
    if order >= 2:
        u2, d2 = u2_tilde(model, u0, x, t, T, indices, e4_repeat_j)
        diag.update(d2)
    return PriceBreakdown(u0.value, u1, u2, scale, alpha, order, diag)


def price_caplet(
    model: MarketModel,
    k: int,
    K: float,
    t: float = 0.0,
    x=None,
    numeraire: float | None = None,
    alpha: float = 1.0,
    order: int = 2,
    e4_repeat_j: bool = False,
    full_indices: bool = False,
) -> PriceBreakdown:
    """Expansion price of the caplet on ``L^k`` (fixing ``T_{k-1}``, paid at ``T_k``).

    ``numeraire`` is ``B_t(T_n)``; at ``t = 0`` it defaults to the initial curve.
    ``full_indices`` runs the derivative sums over every rate instead of ``k..n``
    (identical result, kept for cross-checking).
    """
    if not 1 <= k <= model.n:
        raise ValueError(f"caplet index must be in 1..{model.n}")
    if x is None:
        if t != 0:
            raise ValueError("state x is required when t > 0")
        x = model.libors
    if numeraire is None:
        if t != 0:
            raise ValueError("numeraire B_t(T_n) is required when t > 0")
        numeraire = model.bonds()[-1]
    T = model.tenor.reset(k)
    u0 = caplet_u0_jet(model, k, K, t, x, order=6 if order == 2 else 3)
    indices = None if full_indices else range(k - 1, model.n)
    out = expand(model, u0, x, t, T, numeraire * model.accruals[k - 1], alpha, order, indices, e4_repeat_j)
    out.diagnostics["variance"] = caplet_variance(model, k, t)
    return out


def caplet_implied_vol(model: MarketModel, k: int, K: float, price: float) -> float:
    """Black volatility reproducing ``price`` for the caplet on ``L^k`` at time 0."""
    from .black import implied_black_vol

    bonds = model.bonds()
    return implied_black_vol(price, model.libors[k - 1], K, model.tenor.reset(k), bonds[k] * model.accruals[k - 1])
