"""Driving Lévy process: jump measures, moments and the alpha-rescaling.

A :class:`LevyMeasure` is a diffusion matrix ``c`` plus a (possibly empty) list of
one-dimensional jump measures, each acting along a fixed direction of R^d.  With a
single direction ``u = (1,)`` this is the usual scalar driver (the CGMY numerics
use ``d = 1``, ``c = 0``).  All moment functionals used by the expansion are exact
sums over the components, so multi-dimensional contraction is a plain product of
inner products.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate, special


class DivergentMomentError(ValueError):
    """Raised when a requested moment of the Lévy measure is infinite."""


def _quad_halfline(func, a: float, b: float = math.inf, points=None) -> float:
    """Adaptive Gauss-Kronrod quadrature on [a, b], split into decades near 0."""
    if b <= a:
        return 0.0
    total = 0.0
    # Integrands are singular-ish at the origin; splitting into geometric pieces
    # keeps QUADPACK well within its subdivision limit.
    edges = [a]
    if a < 1.0 and b > 1.0:
        lo = max(a, 1e-12)
        k = math.floor(math.log10(lo)) + 1
        while 10.0**k < 1.0:
            if 10.0**k > a:
                edges.append(10.0**k)
            k += 1
        edges.append(1.0)
    if b == math.inf:
        edges.append(math.inf)
    else:
        edges.append(b)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, _ = integrate.quad(func, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
        total += val
    return total


class JumpMeasure1D(ABC):
    """One-dimensional Lévy measure on R \\ {0}."""

    @abstractmethod
    def density(self, z):
        """Lévy density at ``z`` (vectorised)."""

    @abstractmethod
    def raw_moment(self, k: int) -> float:
        """``∫ z^k F(dz)`` for ``k >= 2``."""

    def moment_by_quadrature(self, k: int, region: str = "all", eps: float = 0.0) -> float:
        """``∫ z^k F(dz)`` over ``|z| > eps`` (``region="outside"``), ``|z| <= eps``
        (``"inside"``) or the whole line (``"all"``)."""
        pos = lambda z: z**k * float(self.density(z))
        neg = lambda z: (-z) ** k * float(self.density(-z))
        lo, hi = self._support()
        if region == "all":
            return _quad_halfline(pos, 0.0, hi) + _quad_halfline(neg, 0.0, -lo)
        if region == "outside":
            return _quad_halfline(pos, eps, hi) + _quad_halfline(neg, eps, -lo)
        if region == "inside":
            return _quad_halfline(pos, 0.0, min(eps, hi)) + _quad_halfline(neg, 0.0, min(eps, -lo))
        raise ValueError(f"unknown region {region!r}")

    def tail_intensity(self, eps: float) -> float:
        """Total mass ``F(|z| > eps)``."""
        return self.moment_by_quadrature(0, "outside", eps)

    def side_intensities(self, eps: float) -> tuple[float, float]:
        """``(F((eps, inf)), F((-inf, -eps)))``."""
        lo, hi = self._support()
        up = _quad_halfline(lambda z: float(self.density(z)), eps, hi)
        down = _quad_halfline(lambda z: float(self.density(-z)), eps, -lo)
        return up, down

    def _support(self) -> tuple[float, float]:
        return -math.inf, math.inf

    @abstractmethod
    def sample_tail(self, eps: float, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` jump sizes from ``F`` restricted to ``|z| > eps`` (normalised)."""


@dataclass(frozen=True)
class CGMY(JumpMeasure1D):
    """CGMY (tempered stable) Lévy density

    ``C |z|^{-1-Y} (exp(-lambda_plus z) 1{z>0} + exp(-lambda_minus |z|) 1{z<0})``.
    """

    C: float
    lambda_plus: float
    lambda_minus: float
    Y: float

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("CGMY requires C > 0")
        if not (self.lambda_plus > 0 and self.lambda_minus > 0):
            raise ValueError("CGMY requires lambda_plus > 0 and lambda_minus > 0")
        if not 0 < self.Y < 2:
            raise ValueError("CGMY requires 0 < Y < 2")

    def density(self, z):
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            lam = np.where(z > 0, self.lambda_plus, self.lambda_minus)
            out = self.C * np.exp(-lam * a) / a ** (1.0 + self.Y)
        return np.where(a > 0, out, 0.0)

    def raw_moment(self, k: int) -> float:
        return _cgmy_moment(self, k)

    def side_intensities(self, eps: float) -> tuple[float, float]:
        return _cgmy_sides(self, eps)

    def sample_tail(self, eps, size, rng):
        up, down = self.side_intensities(eps)
        n_up = rng.binomial(size, up / (up + down)) if size else 0
        out = np.empty(size)
        out[:n_up] = _pareto_tempered(eps, self.Y, self.lambda_plus, n_up, rng)
        out[n_up:] = -_pareto_tempered(eps, self.Y, self.lambda_minus, size - n_up, rng)
        rng.shuffle(out)
        return out


@lru_cache(maxsize=None)
def _cgmy_moment(m: CGMY, k: int) -> float:
    if k < 2:
        raise DivergentMomentError(f"moment order k={k} < 2 is not defined for a Lévy measure")
    if k <= m.Y:
        raise DivergentMomentError(f"CGMY moment of order {k} diverges for Y={m.Y}")
    g = special.gamma(k - m.Y)
    return m.C * g * (m.lambda_plus ** (m.Y - k) + (-1) ** k * m.lambda_minus ** (m.Y - k))


@lru_cache(maxsize=256)
def _cgmy_sides(m: CGMY, eps: float) -> tuple[float, float]:
    return JumpMeasure1D.side_intensities(m, eps)


def _pareto_tempered(eps: float, Y: float, lam: float, size: int, rng) -> np.ndarray:
    """Sample density prop. to ``z^{-1-Y} exp(-lam z)`` on ``(eps, inf)``.

    Pareto(Y) proposal on (eps, inf), accepted with probability exp(-lam (z - eps)).
    """
    out = np.empty(size)
    filled = 0
    while filled < size:
        need = size - filled
        batch = max(64, int(need * 1.5) + 16)
        u = rng.random(batch)
        z = eps * (1.0 - u) ** (-1.0 / Y)
        keep = z[rng.random(batch) < np.exp(-lam * (z - eps))]
        take = min(need, keep.size)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


@dataclass(eq=False)
class TabulatedJumps(JumpMeasure1D):
    """Lévy density given by samples on a grid, linearly interpolated, zero outside.

    The grid must not contain 0; negative and positive parts are interpolated
    separately.  Integrability of ``z^2`` near the origin and of ``|z|`` in the
    tails is checked at construction.
    """

    z: np.ndarray
    values: np.ndarray
    _pos: tuple = field(init=False, repr=False)
    _neg: tuple = field(init=False, repr=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if z.shape != v.shape or z.ndim != 1:
            raise ValueError("tabulated density needs matching 1-D z and values")
        if np.any(v < 0):
            raise ValueError("Lévy density must be nonnegative")
        if np.any(z == 0):
            raise ValueError("tabulated grid must exclude z = 0")
        order = np.argsort(z)
        self.z, self.values = z[order], v[order]
        p = self.z > 0
        self._pos = (self.z[p], self.values[p])
        self._neg = (-self.z[~p][::-1], self.values[~p][::-1])
        for k in (2, 1):
            if not np.isfinite(self.moment_by_quadrature(k, "all") if k == 2 else self._abs_first_tail()):
                raise DivergentMomentError("tabulated measure violates integrability")

    def _abs_first_tail(self) -> float:
        f = lambda z: abs(z) * float(self.density(z))
        return _quad_halfline(f, 1.0, self._support()[1]) + _quad_halfline(
            lambda z: z * float(self.density(-z)), 1.0, -self._support()[0]
        )

    def _support(self):
        return float(self.z[0]) if self.z[0] < 0 else 0.0, float(self.z[-1]) if self.z[-1] > 0 else 0.0

    def density(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for (grid, vals), mask, sgn in ((self._pos, z > 0, 1.0), (self._neg, z < 0, -1.0)):
            if grid.size:
                a = sgn * z[mask]
                out[mask] = np.interp(a, grid, vals, left=0.0, right=0.0)
        return out

    def raw_moment(self, k: int) -> float:
        if k < 2:
            raise DivergentMomentError(f"moment order k={k} < 2 is not defined for a Lévy measure")
        return _tab_moment(self, k)

    def _support_points(self):
        return self._pos, self._neg

    def sample_tail(self, eps, size, rng):
        # inverse CDF on a fine piecewise-linear mesh of each side
        meshes, masses = [], []
        for grid, _ in (self._pos, self._neg):
            if grid.size == 0 or grid[-1] <= eps:
                meshes.append(None)
                masses.append(0.0)
                continue
            g = np.unique(np.concatenate([[max(eps, grid[0])], grid[grid > eps]]))
            fine = np.unique(np.concatenate([g, np.linspace(g[0], g[-1], 4096)]))
            meshes.append(fine)
            masses.append(None)
        out = np.empty(size)
        cdfs = []
        for i, fine in enumerate(meshes):
            if fine is None:
                cdfs.append(None)
                continue
            sgn = 1.0 if i == 0 else -1.0
            dens = self.density(sgn * fine)
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
            masses[i] = cdf[-1]
            cdfs.append(cdf)
        tot = masses[0] + masses[1]
        if tot <= 0:
            raise ValueError("no tabulated mass beyond eps")
        n_up = rng.binomial(size, masses[0] / tot) if size else 0
        for i, (lo, hi) in enumerate(((0, n_up), (n_up, size))):
            if hi <= lo:
                continue
            cdf, fine = cdfs[i], meshes[i]
            u = rng.random(hi - lo) * cdf[-1]
            out[lo:hi] = (1.0 if i == 0 else -1.0) * np.interp(u, cdf, fine)
        rng.shuffle(out)
        return out


@lru_cache(maxsize=None)
def _tab_moment(m: TabulatedJumps, k: int) -> float:
    return m.moment_by_quadrature(k, "all")


@dataclass(frozen=True)
class ScaledJumps(JumpMeasure1D):
    """``F_alpha(A) = alpha^{-2} F(A / alpha)``: jumps shrunk by alpha, intensity up by alpha^{-2}."""

    base: JumpMeasure1D
    alpha: float

    def density(self, z):
        a = self.alpha
        return self.base.density(np.asarray(z, dtype=float) / a) / a**3

    def raw_moment(self, k: int) -> float:
        return self.alpha ** (k - 2) * self.base.raw_moment(k)

    def moment_by_quadrature(self, k, region="all", eps=0.0):
        return self.alpha ** (k - 2) * self.base.moment_by_quadrature(k, region, eps / self.alpha)

    def side_intensities(self, eps):
        up, down = self.base.side_intensities(eps / self.alpha)
        return up / self.alpha**2, down / self.alpha**2

    def _support(self):
        lo, hi = self.base._support()
        return lo * self.alpha, hi * self.alpha

    def sample_tail(self, eps, size, rng):
        return self.alpha * self.base.sample_tail(eps / self.alpha, size, rng)


@dataclass(frozen=True, eq=False)
class LevyMeasure:
    """Characteristics ``(0, c, F)`` of a driftless martingale Lévy process in R^d.

    Parameters
    ----------
    c : (d, d) array
        Diffusion matrix, symmetric positive semidefinite (units 1/time).
    jumps : sequence of (direction, JumpMeasure1D)
        ``F`` is the sum of the images of each 1-D measure under ``zeta -> zeta * direction``.
    """

    c: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.c, dtype=float))
        if c.shape[0] != c.shape[1]:
            raise ValueError("diffusion matrix must be square")
        if not np.allclose(c, c.T, atol=1e-14):
            raise ValueError("diffusion matrix must be symmetric")
        if c.size and np.linalg.eigvalsh(c).min() < -1e-12:
            raise ValueError("diffusion matrix must be positive semidefinite")
        jumps = []
        for u, m in self.jumps:
            u = np.atleast_1d(np.asarray(u, dtype=float))
            if u.shape != (c.shape[0],):
                raise ValueError("jump direction has wrong dimension")
            jumps.append((u, m))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "jumps", tuple(jumps))
        object.__setattr__(self, "_cache", {})

    @classmethod
    def cgmy(cls, C, lambda_plus, lambda_minus, Y, c=0.0) -> "LevyMeasure":
        return cls(np.array([[c]]), (((1.0,), CGMY(C, lambda_plus, lambda_minus, Y)),))

    @classmethod
    def gaussian(cls, c) -> "LevyMeasure":
        return cls(np.atleast_2d(c))

    @property
    def d(self) -> int:
        return self.c.shape[0]

    @property
    def has_jumps(self) -> bool:
        return bool(self.jumps)

    def raw_moment(self, k: int) -> float:
        """``∫ z^k F(dz)`` (scalar drivers; for d > 1 this is the moment along the first axis)."""
        return self.contracted_moment([np.eye(self.d)[0]] * k, _allow_k2=True)

    def contracted_moment(self, vols: Sequence, _allow_k2: bool = False) -> float:
        """``∫ prod_p <vols[p], z> F(dz)``."""
        k = len(vols)
        if k < 2 or (k == 2 and not _allow_k2):
            raise ValueError("contracted moments are defined here for k >= 3 (k = 2 is the covariance)")
        if not self.jumps:
            return 0.0
        vols = [np.atleast_1d(np.asarray(v, dtype=float)) for v in vols]
        for v in vols:
            if v.shape != (self.d,):
                raise ValueError("loading vector has wrong dimension")
        total = 0.0
        for u, m in self.jumps:
            proj = 1.0
            for v in vols:
                proj *= float(v @ u)
            if proj != 0.0:
                total += proj * self._moment(m, k)
        return total

    def _moment(self, m: JumpMeasure1D, k: int) -> float:
        key = (id(m), k)
        cache = self._cache
        if key not in cache:
            cache[key] = m.raw_moment(k)
        return cache[key]

    def covariance(self, Lambda) -> np.ndarray:
        """``Sigma = Lambda c Lambda^T + ∫ (Lambda z)(Lambda z)^T F(dz)`` for an ``n x d`` loading."""
        L = np.atleast_2d(np.asarray(Lambda, dtype=float))
        if L.shape[1] != self.d:
            raise ValueError("loading matrix has wrong number of columns")
        S = L @ self.c @ L.T
        for u, m in self.jumps:
            p = L @ u
            S = S + self._moment(m, 2) * np.outer(p, p)
        return S

    def scale(self, alpha: float) -> "LevyMeasure":
        """The measure of ``alpha X_{t/alpha^2}``: same ``c``, jumps ``F_alpha``."""
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if alpha == 1:
            return self
        jumps = tuple((u, ScaledJumps(m, alpha)) for u, m in self.jumps)
        return LevyMeasure(self.c, jumps)


# Functional aliases matching the operation names used across the package.


def raw_moment(measure: LevyMeasure, k: int) -> float:
    return measure.raw_moment(k)


def contracted_moment(measure: LevyMeasure, vols) -> float:
    return measure.contracted_moment(vols)


def covariance_sigma(measure: LevyMeasure, Lambda) -> np.ndarray:
    return measure.covariance(Lambda)


def scale(measure: LevyMeasure, alpha: float) -> LevyMeasure:
    return measure.scale(alpha)


#: CGMY parameter sets (C, lambda_plus, lambda_minus, Y) of the four reference cases.
PAPER_CASES = {
    1: (0.01, 10.0, 20.0, 1.8),
    2: (0.1, 10.0, 20.0, 1.2),
    3: (0.2, 10.0, 20.0, 0.5),
    4: (0.2, 3.0, 5.0, 0.2),
}


def paper_case(case: int) -> LevyMeasure:
    return LevyMeasure.cgmy(*PAPER_CASES[case])
