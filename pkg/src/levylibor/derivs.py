"""Value-function jets for the expansion: the caplet ``u_0`` and the auxiliary ``v``, ``v̄``.

Variable indices here are 0-based (``x[0]`` is ``L^1``).
"""

from __future__ import annotations

import numpy as np

from .black import black_spot_jet
from .jets import Jet, OrderBudgetError, jet_space, monomial, rational_weight
from .market import MarketModel, SingularStateError


def caplet_variance(model: MarketModel, k: int, t: float) -> float:
    """``V = ∫_t^{T_{k-1}} Sigma_kk(s) ds``."""
    return model.integrated_moment((k, k), t, model.tenor.reset(k))


def caplet_u0_jet(model: MarketModel, k: int, K: float, t: float, x, order: int = 6) -> Jet:
    """Jet of ``u_0(t, x) = P_BS(V, x_k, K) prod_{j>k} (1 + delta_j x_j)`` at ``x``.

    The ``x_k`` direction carries the Black spot derivatives; each later rate enters
    through a linear factor; earlier rates do not enter at all.
    """
    x = np.asarray(x, dtype=float)
    if x[k - 1] <= 0:
        raise ValueError("caplet state needs x_k > 0")
    if t >= model.tenor.reset(k):
        raise ValueError("evaluation time must precede the fixing date")
    space = jet_space(model.n, order)
    V = caplet_variance(model, k, t)
    out = Jet.univariate(space, k - 1, black_spot_jet(V, x[k - 1], K, order))
    out.order = order
    for j in range(k, model.n):
        out = out * (1.0 + model.accruals[j] * Jet.variable(space, j, x[j]))
    return out


def v_jet(i: int, j: int, l: int, u0: Jet, x) -> Jet:
    """Jet of ``v^{ijl} = x_i x_j x_l d^3 u_0 / dx_i dx_j dx_l`` (0-based indices)."""
    if u0.order < 3:
        raise OrderBudgetError("v needs a u_0 jet of order >= 3")
    return monomial(u0.space, x, (i, j, l)) * u0.derivatives((i, j, l))


def vbar_jet(i: int, j: int, l: int, u0: Jet, x, accruals) -> Jet:
    """Jet of ``v̄^{ijl} = x_i w_j(x_j) w_l(x_l) du_0/dx_i`` with ``w(y) = delta y / (1 + delta y)``."""
    if u0.order < 1:
        raise OrderBudgetError("v-bar needs a u_0 jet of order >= 1")
    if np.any(1.0 + accruals[[j, l]] * np.asarray(x)[[j, l]] == 0):
        raise SingularStateError("1 + delta x vanishes")
    sp = u0.space
    return (
        Jet.variable(sp, i, x[i])
        * rational_weight(sp, j, x[j], accruals[j])
        * rational_weight(sp, l, x[l], accruals[l])
        * u0.derivative(i)
    )
