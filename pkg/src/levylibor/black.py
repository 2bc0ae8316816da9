"""Black kernel ``P_BS(V, S, K) = E[(S exp(-V/2 + sqrt(V) Z) - K)^+]`` and its spot derivatives."""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize, special

_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(x):
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / _SQRT2)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT2PI * np.exp(-0.5 * x * x)


def black_price(V: float, S: float, K: float) -> float:
    """Undiscounted Black call on a forward ``S`` with total variance ``V``."""
    if V < 0:
        raise ValueError("variance must be nonnegative")
    if S <= 0:
        raise ValueError("forward must be positive")
    if K <= 0:
        return S - K
    if V == 0:
        return max(S - K, 0.0)
    sv = math.sqrt(V)
    d1 = (math.log(S / K) + 0.5 * V) / sv
    return float(S * norm_cdf(d1) - K * norm_cdf(d1 - sv))


def black_spot_jet(V: float, S: float, K: float, max_order: int = 6) -> np.ndarray:
    """``[d^m P_BS / dS^m for m = 0..max_order]``.

    For ``m >= 2`` the derivative is ``phi(d1) S^{1-m} V^{-1/2} q_m(d1)`` with
    ``q_2 = 1`` and ``q_{m+1}(d) = (q_m'(d) - d q_m(d)) / sqrt(V) - (m - 1) q_m(d)``.
    """
    if max_order >= 2 and V < 1e-14:
        raise ValueError("degenerate variance: spot derivatives of order >= 2 blow up")
    out = np.zeros(max_order + 1)
    out[0] = black_price(V, S, K)
    if max_order == 0:
        return out
    if K <= 0:
        out[1] = 1.0
        return out
    sv = math.sqrt(V)
    d1 = (math.log(S / K) + 0.5 * V) / sv
    out[1] = float(norm_cdf(d1))
    q = np.array([1.0])
    dens = float(norm_pdf(d1)) / sv
    for m in range(2, max_order + 1):
        out[m] = dens * S ** (1 - m) * P.polyval(d1, q)
        q = P.polysub(P.polysub(P.polyder(q), P.polymulx(q)) / sv, (m - 1) * q)
    return out


def implied_black_vol(price: float, forward: float, K: float, expiry: float, annuity: float = 1.0) -> float:
    """Black volatility ``sigma`` with ``annuity * P_BS(sigma^2 expiry, forward, K) = price``.

    ``annuity`` is the discount-times-accrual factor multiplying the undiscounted kernel.
    """
    if expiry <= 0 or annuity <= 0:
        raise ValueError("expiry and annuity must be positive")
    lo_b = annuity * max(forward - K, 0.0)
    hi_b = annuity * forward
    if not lo_b < price < hi_b:
        raise ValueError(f"price {price!r} outside arbitrage bounds ({lo_b!r}, {hi_b!r})")
    f = lambda s: annuity * black_price(s * s * expiry, forward, K) - price
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e3:
            raise ValueError("implied volatility search failed to bracket")
    # Brent on a bracket is safeguarded and converges to machine precision
    return optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
