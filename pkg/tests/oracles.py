"""Independent numerical oracles shared by the test modules."""

import math
from itertools import product

import numpy as np
from scipy import integrate

from levylibor.levy import PAPER_CASES


def central_difference(f, x, alpha, h):
    """Tensor-product central difference for the mixed partial with multi-index ``alpha``.

    Each direction uses the ``m``-th order stencil with nodes ``(m/2 - i) h``, so
    the truncation error is even in ``h``.
    """
    x = np.asarray(x, dtype=float)
    axes = [(i, m) for i, m in enumerate(alpha) if m]
    stencils = [[((m / 2 - j) * h[i], (-1) ** j * math.comb(m, j)) for j in range(m + 1)] for i, m in axes]
    total = 0.0
    for combo in product(*stencils):
        y = x.copy()
        w = 1.0
        for (i, _), (off, c) in zip(axes, combo):
            y[i] += off
            w *= c
        total += w * f(y)
    return total / math.prod(h[i] ** m for i, m in axes)


def richardson_partial(f, x, alpha, h, levels=2):
    """Richardson extrapolation of :func:`central_difference` over ``h, h/2, h/4, ...``."""
    h = np.asarray(h, dtype=float)
    table = [central_difference(f, x, alpha, h / 2**j) for j in range(levels + 1)]
    for p in range(1, levels + 1):
        table = [(4**p * table[j + 1] - table[j]) / (4**p - 1) for j in range(len(table) - 1)]
    return table[0]


def multi_indices(nvars, max_order):
    """All multi-indices of total order 1..max_order."""
    out = []
    for total in range(1, max_order + 1):
        for combo in product(range(total + 1), repeat=nvars):
            if sum(combo) == total:
                out.append(combo)
    return out


def as_indices(alpha):
    return [i for i, m in enumerate(alpha) for _ in range(m)]


def cgmy_density(z, C, lp, lm, Y):
    if z > 0:
        return C * math.exp(-lp * z) / z ** (1 + Y)
    return C * math.exp(-lm * abs(z)) / abs(z) ** (1 + Y)


def quad_moment(k, C, lp, lm, Y, lo=0.0, hi=math.inf):
    """∫_{lo<|z|<hi} z^k F(dz) in log coordinates, which tames the singularity at 0."""
    total = 0.0
    for sgn in (1.0, -1.0):
        lam = lp if sgn > 0 else lm
        # z^k F(dz) with z = sgn e^s, dz = e^s ds, collected into one power
        f = lambda s: sgn**k * C * math.exp(-lam * math.exp(s) + (k - Y) * s)
        a = math.log(lo) if lo > 0 else -500.0
        b = math.log(hi) if np.isfinite(hi) else 3.0
        edges = np.linspace(a, b, 120)
        total += sum(integrate.quad(f, x0, x1, epsabs=0, epsrel=1e-13, limit=200)[0] for x0, x1 in zip(edges[:-1], edges[1:]))
    return total


def drift_by_quadrature(model, k, x, case, c=0.0):
    """``-sum_{j>k} lam_k c lam_j w_j + ∫ lam_k z (1 - prod_{j>k}(1 + w_j lam_j z)) F(dz)`` at t = 0.

    The product is evaluated pointwise in z (through log1p/expm1 near the origin
    to avoid cancellation); nothing is expanded into moments.
    """
    C, lp, lm, Y = PAPER_CASES[case]
    lam = model.loadings[:, 0, 0]
    w = model.accruals * x / (1.0 + model.accruals * x)
    a = w[k:] * lam[k:]
    total = -c * lam[k - 1] * float(a.sum())
    for sgn, tilt in ((1.0, lp), (-1.0, lm)):
        def f(s):
            z = sgn * math.exp(s)
            if abs(z) < 1e-2:
                one_minus_prod = -math.expm1(float(np.log1p(a * z).sum()))
            else:
                one_minus_prod = 1.0 - float(np.prod(1.0 + a * z))
            # F(dz) = C e^{-tilt|z|} |z|^{-1-Y} dz and dz = |z| ds
            return lam[k - 1] * sgn * one_minus_prod * C * math.exp(-tilt * abs(z) + (1 - Y) * s)
        edges = np.linspace(-500.0, 3.0, 120)
        total += sum(integrate.quad(f, e0, e1, epsabs=0, epsrel=1e-12, limit=200)[0] for e0, e1 in zip(edges[:-1], edges[1:]))
    return total
