"""Swap-rate algebra and the frozen-coefficient log-normal swaption approximation.

The payer swaption expires at ``T_0``, the inception of the swap ``T_0 -> T_n``.
Order 0 treats the swap rate as log-normal with variance ``V^swap`` obtained by
freezing the Libor-dependent coefficients of ``d<log R>`` at the current state.
Corrections reuse the general expansion with the proxy
``u_0(x) = annuity(x) / B(T_n) * P_BS(V^swap(x), R(x), K)``.
"""

from __future__ import annotations

import math

import numpy as np

from .black import black_price, norm_cdf, norm_pdf
from .expansion import PriceBreakdown, expand
from .jets import Jet, jet_space
from .market import MarketModel, SingularStateError


def _growth_tail(x, accruals) -> np.ndarray:
    """``prod_{i>j} (1 + delta_i x_i)`` for ``j = 1..n``."""
    g = 1.0 + accruals * np.asarray(x, dtype=float)
    if np.any(g <= 0):
        raise SingularStateError("state has 1 + delta_i x_i <= 0")
    return np.append(np.cumprod(g[::-1])[::-1][1:], 1.0)


def swap_weights(x, accruals) -> np.ndarray:
    """``f_j(x) = delta_j prod_{i>j}(1 + delta_i x_i) / sum_k delta_k prod_{i>k}(1 + delta_i x_i)``."""
    p = accruals * _growth_tail(x, accruals)
    return p / p.sum()


def swap_rate(x, accruals) -> float:
    return float(swap_weights(x, accruals) @ np.asarray(x, dtype=float))


def annuity_ratio(x, accruals) -> float:
    """``sum_j delta_j B(T_j) / B(T_n)`` expressed through Libors (equals ``delta_n / f_n``)."""
    return float((accruals * _growth_tail(x, accruals)).sum())


def swap_rate_gradient(x, accruals) -> np.ndarray:
    """``dR/dx_m`` by the quotient rule on ``R = N / A``."""
    x = np.asarray(x, dtype=float)
    P = _growth_tail(x, accruals)
    A = float((accruals * P).sum())
    N = float((accruals * P * x).sum())
    R = N / A
    n = x.size
    grad = np.zeros(n)
    for m in range(n):
        r = accruals[m] / (1.0 + accruals[m] * x[m])
        dA = r * float((accruals[:m] * P[:m]).sum())
        dN = accruals[m] * P[m] + r * float((accruals[:m] * P[:m] * x[:m]).sum())
        grad[m] = (dN - R * dA) / A
    return grad


def vswap(model: MarketModel, T: float | None = None, t: float = 0.0, x=None) -> float:
    """Frozen-coefficient variance of ``log R`` over ``[t, T]`` (default ``T = T_0``)."""
    T0 = model.tenor.dates[0]
    T = T0 if T is None else T
    if T > T0 + 1e-12:
        raise ValueError("swaption variance horizon must not exceed T_0")
    x = model.libors if x is None else np.asarray(x, dtype=float)
    R = swap_rate(x, model.accruals)
    g = swap_rate_gradient(x, model.accruals) * x / R
    return float(g @ model.integrated_sigma(t, T) @ g)


def price_swaption_order0(model: MarketModel, K: float) -> float:
    """``sum_j delta_j B_0(T_j) * P_BS(V^swap, R(0), K)``."""
    bonds = model.bonds()
    annuity = float(model.accruals @ bonds[1:])
    R = swap_rate(model.libors, model.accruals)
    return annuity * black_price(vswap(model), R, K)


def _phi_derivs(d: float, order: int) -> list:
    """``[Phi(d), Phi'(d), ..., Phi^{(order)}(d)]`` with ``Phi^{(m)} = (-1)^{m-1} He_{m-1}(d) phi(d)``."""
    pdf = float(norm_pdf(d))
    he = [1.0, d]
    for m in range(2, order):
        he.append(d * he[-1] - (m - 1) * he[-2])
    return [float(norm_cdf(d))] + [(-1) ** (m - 1) * he[m - 1] * pdf for m in range(1, order + 1)]


def swaption_u0_jet(model: MarketModel, K: float, t: float = 0.0, x=None, order: int = 6) -> Jet:
    """Jet of the log-normal proxy ``annuity(x)/B(T_n) * P_BS(V^swap(t, x), R(x), K)``."""
    if K <= 0:
        raise ValueError("swaption proxy jets need a positive strike")
    x = model.libors if x is None else np.asarray(x, dtype=float)
    n, acc = model.n, model.accruals
    space = jet_space(n, order + 1)
    xs = [Jet.variable(space, i, x[i]) for i in range(n)]
    # prod_{i>j}(1 + delta_i x_i), annuity ratio A and N = sum delta_j x_j prod
    tail = [None] * n
    run = Jet.constant(space, 1.0)
    for j in range(n - 1, -1, -1):
        tail[j] = run
        run = run * (1.0 + acc[j] * xs[j])
    A = sum((acc[j] * tail[j] for j in range(n)), Jet.constant(space, 0.0))
    N = sum((acc[j] * xs[j] * tail[j] for j in range(n)), Jet.constant(space, 0.0))
    R = N / A
    grads = [R.derivative(i) for i in range(n)]
    S = model.integrated_sigma(t, model.tenor.dates[0])
    V = Jet.constant(space, 0.0)
    for i in range(n):
        for j in range(n):
            if S[i, j]:
                V = V + grads[i] * grads[j] * xs[i] * xs[j] * S[i, j]
    V = V / (R * R)
    v0, r0 = V.value, R.value
    if v0 <= 0:
        raise ValueError("degenerate swap-rate variance")
    sqrtV = V.compose([_sqrt_deriv(v0, m) for m in range(order + 2)])
    logR = R.compose([math.log(r0 / K)] + [(-1) ** (m - 1) * math.factorial(m - 1) / r0**m for m in range(1, order + 2)])
    d1 = (logR + 0.5 * V) / sqrtV
    d2 = d1 - sqrtV
    bs = R * d1.compose(_phi_derivs(d1.value, order + 1)) - K * d2.compose(_phi_derivs(d2.value, order + 1))
    out = A * bs
    out.order = order
    return out


def _sqrt_deriv(v: float, m: int) -> float:
    c = 1.0
    for i in range(m):
        c *= 0.5 - i
    return c * v ** (0.5 - m)


def price_swaption_corrections(
    model: MarketModel,
    K: float,
    order: int = 2,
    alpha: float = 1.0,
    t: float = 0.0,
    x=None,
    numeraire: float | None = None,
) -> PriceBreakdown:
    """Order-0/1/2 swaption expansion driven by the log-normal proxy ``u_0``.

    The proxy's ``P0`` differs from :func:`price_swaption_order0` only through the
    state dependence of ``V^swap`` (none at ``t = 0``, ``x = L_0``).
    """
    if x is None:
        if t != 0:
            raise ValueError("state x is required when t > 0")
        x = model.libors
    if numeraire is None:
        if t != 0:
            raise ValueError("numeraire B_t(T_n) is required when t > 0")
        numeraire = model.bonds()[-1]
    u0 = swaption_u0_jet(model, K, t, x, order=6 if order == 2 else 3)
    out = expand(model, u0, x, t, model.tenor.dates[0], numeraire, alpha, order)
    out.diagnostics["approximate_proxy"] = True
    out.diagnostics["variance"] = vswap(model, t=t, x=x)
    return out
