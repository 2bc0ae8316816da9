"""Tenor structure, initial curve, volatility loadings and the terminal-measure drift.

Rate indices are 1-based throughout the public API (``k = 1..n`` addresses
``L^k`` on the accrual period ``[T_{k-1}, T_k]``), matching the usual notation.
Volatility loadings are piecewise constant with breakpoints at tenor dates, so
every time integral of a moment functional is a finite sum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .levy import LevyMeasure


class SingularStateError(ValueError):
    """Raised when some ``1 + delta_j x_j`` vanishes (or is non-positive)."""


@dataclass(frozen=True)
class TenorStructure:
    """Dates ``T_0 < T_1 < ... < T_n`` in years."""

    dates: tuple

    def __post_init__(self):
        d = tuple(float(t) for t in self.dates)
        if len(d) < 2:
            raise ValueError("tenor structure needs at least T_0 and T_1")
        if d[0] < 0 or any(b <= a for a, b in zip(d[:-1], d[1:])):
            raise ValueError("tenor dates must satisfy 0 <= T_0 < T_1 < ... < T_n")
        object.__setattr__(self, "dates", d)

    @property
    def n(self) -> int:
        return len(self.dates) - 1

    @property
    def accruals(self) -> np.ndarray:
        """``delta_k = T_k - T_{k-1}`` for ``k = 1..n`` (0-based array)."""
        return np.diff(self.dates)

    def reset(self, k: int) -> float:
        """Fixing date ``T_{k-1}`` of ``L^k``."""
        return self.dates[k - 1]


def weights(x, accruals) -> np.ndarray:
    """Rational drift weights ``delta_j x_j / (1 + delta_j x_j)``."""
    x = np.asarray(x, dtype=float)
    den = 1.0 + accruals * x
    if np.any(den <= 0):
        raise SingularStateError("state has 1 + delta_j x_j <= 0")
    return accruals * x / den


class MarketModel:
    """Lévy Libor market model under the terminal measure ``Q^{T_n}``.

    Parameters
    ----------
    tenor : TenorStructure
    libors : array of length n
        Initial forward rates ``L_0^1..L_0^n``.
    b0 : float
        Discount factor ``B_0(T_0)``.
    loadings : array
        Either a length-d vector (same constant loading for every rate), an
        ``(n, d)`` array (constant per rate) or an ``(n, n, d)`` array whose
        ``[k-1, i]`` entry is ``lambda^k`` on the i-th mesh interval
        ``[0, T_0], (T_0, T_1], ..., (T_{n-2}, T_{n-1}]``.  Entries after the
        fixing date of each rate are ignored (forced to zero).
    measure : LevyMeasure
    """

    def __init__(self, tenor: TenorStructure, libors, b0: float, loadings, measure: LevyMeasure):
        self.tenor = tenor
        n = tenor.n
        self.libors = np.asarray(libors, dtype=float).reshape(-1)
        if self.libors.shape != (n,):
            raise ValueError(f"expected {n} initial Libor rates, got {self.libors.size}")
        self.accruals = tenor.accruals
        if np.any(1.0 + self.accruals * self.libors <= 0):
            raise ValueError("initial curve violates 1 + delta_k L_0^k > 0")
        if not b0 > 0:
            raise ValueError("B_0(T_0) must be positive")
        self.b0 = float(b0)
        self.measure = measure
        d = measure.d
        lam = np.asarray(loadings, dtype=float)
        if lam.ndim == 0:
            lam = lam.reshape(1)
        if lam.ndim == 1:
            lam = np.broadcast_to(lam, (n, d))
        if lam.ndim == 2:
            lam = np.broadcast_to(lam[:, None, :], (n, n, d))
        if lam.shape != (n, n, d):
            raise ValueError(f"loadings must broadcast to shape {(n, n, d)}, got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("loadings must be finite")
        lam = np.array(lam)
        for k in range(n):
            lam[k, k + 1 :, :] = 0.0  # lambda^{k+1} dead after T_k
        self.loadings = lam
        # mesh intervals: [0, T_0], (T_0, T_1], ..., (T_{n-2}, T_{n-1}]
        self.mesh = np.concatenate([[0.0], np.asarray(tenor.dates[:n])])
        self._moment_cache: dict = {}

    @property
    def n(self) -> int:
        return self.tenor.n

    @property
    def d(self) -> int:
        return self.measure.d

    def with_measure(self, measure: LevyMeasure) -> "MarketModel":
        return MarketModel(self.tenor, self.libors, self.b0, self.loadings, measure)

    # ------------------------------------------------------------------ curve

    def bonds(self) -> np.ndarray:
        """``B_0(T_0), ..., B_0(T_n)``."""
        return bonds_from_libors(self.libors, self.accruals, self.b0)

    # ------------------------------------------------------------- loadings

    def piece(self, t: float) -> int:
        """Index of the mesh interval containing ``t`` (left-closed at 0, right-closed)."""
        i = int(np.searchsorted(self.mesh, t, side="left")) - 1
        return min(max(i, 0), self.n - 1) if t <= self.mesh[-1] else self.n

    def loading_matrix(self, t: float) -> np.ndarray:
        """``Lambda(t)`` as an ``(n, d)`` array; zero once every rate has fixed."""
        i = self.piece(t)
        if i >= self.n:
            return np.zeros((self.n, self.d))
        return self.loadings[:, i, :]

    def sigma(self, t: float) -> np.ndarray:
        return self.measure.covariance(self.loading_matrix(t))

    def _piece_moment(self, idx: tuple, piece: int) -> float:
        """Contracted moment of the given (0-based) rates on a mesh interval, cached."""
        key = (tuple(sorted(idx)), piece)
        out = self._moment_cache.get(key)
        if out is None:
            lam = self.loadings[:, piece, :]
            if len(idx) == 2:
                i, j = idx
                out = float(lam[i] @ self.measure.c @ lam[j])
                out += self.measure.contracted_moment([lam[i], lam[j]], _allow_k2=True) if self.measure.has_jumps else 0.0
            else:
                out = self.measure.contracted_moment([lam[i] for i in idx])
            self._moment_cache[key] = out
        return out

    def _pieces(self, t: float, T: float):
        """Yield ``(piece index, length)`` for the overlap of ``[t, T]`` with the mesh."""
        if T < t:
            raise ValueError("integration bounds must satisfy t <= T")
        for i in range(self.n):
            lo, hi = max(t, self.mesh[i]), min(T, self.mesh[i + 1])
            if hi > lo:
                yield i, hi - lo

    def moment_profile(self, indices: Sequence[int], t: float, T: float) -> list:
        """Per-interval ``(length, value)`` of the moment of the 1-based ``indices`` on ``[t, T]``."""
        idx = tuple(i - 1 for i in indices)
        return [(ln, self._piece_moment(idx, i)) for i, ln in self._pieces(t, T)]

    def integrated_moment(self, indices: Sequence[int], t: float, T: float) -> float:
        """``∫_t^T M_s(lambda^{i_1}, ..., lambda^{i_m}) ds`` (``m = 2`` gives ``∫ Sigma``)."""
        return sum(ln * v for ln, v in self.moment_profile(indices, t, T))

    def nested_moment(self, outer: Sequence[int], inner: Sequence[int], t: float, T: float) -> float:
        """``∫_t^T ds M_s(outer) ∫_s^T M_v(inner) dv``, exact on the piecewise-constant mesh."""
        a = self.moment_profile(outer, t, T)
        b = self.moment_profile(inner, t, T)
        return nested_piecewise(a, b)

    def integrated_sigma(self, t: float, T: float) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for i, ln in self._pieces(t, T):
            out += ln * self.measure.covariance(self.loadings[:, i, :])
        return out

    # ---------------------------------------------------------------- drift

    def drift_layer(self, p: int, k: int, t: float, x) -> float:
        """Order-``p`` layer of the drift of ``L^k`` (signed; the drift is the sum of layers).

        ``p = 0`` is ``-sum_{j>k} Sigma_kj w_j``; ``p >= 1`` is
        ``-sum_{k<j_0<...<j_p} M^{p+2}(lambda^k, lambda^{j_0}, ..., lambda^{j_p}) prod w_{j_l}``.
        """
        n = self.n
        if p < 0:
            raise ValueError("layer index must be >= 0")
        if k == n or p > n - k - 1:
            return 0.0
        w = weights(np.asarray(x, dtype=float), self.accruals)
        piece = self.piece(t)
        if piece >= n:
            return 0.0
        total = 0.0
        for js in itertools.combinations(range(k, n), p + 1):
            m = self._piece_moment((k - 1,) + js, piece)
            if m:
                total += m * float(np.prod(w[list(js)]))
        return -total

    def full_drift(self, k: int, t: float, x, alpha: float = 1.0) -> float:
        """``b_alpha^k(t, x) = sum_p alpha^p drift_layer(p, k, t, x)``."""
        return sum(alpha**p * self.drift_layer(p, k, t, x) for p in range(self.n - k))

    def drift_vector(self, t: float, X: np.ndarray) -> np.ndarray:
        """Exact drift ``b(t, x)`` for a batch of states ``X`` of shape ``(paths, n)``.

        Uses ``∫ <lambda^k,z>(1 - prod_j (1 + w_j <lambda^j,z>)) F(dz) =
        -sum_u <lambda^k,u> sum_q m_{q+1}(u) e_q(w_j <lambda^j,u>)`` with ``e_q`` the
        elementary symmetric polynomials over ``j > k``; identical to summing layers.
        """
        X = np.atleast_2d(X)
        n = self.n
        i = self.piece(t)
        if i >= n:
            return np.zeros_like(X)
        upper, comps = self._drift_tables(i)
        W = (self.accruals * X / (1.0 + self.accruals * X)).T  # (n, paths)
        out = -(upper @ W)
        for proj, moments in comps:
            A = W * proj[:, None]
            E = np.empty((n, X.shape[0]))
            E[0] = 1.0
            E[1:] = 0.0
            for k in range(n - 1, -1, -1):
                q = n - 1 - k  # number of rates above k
                if q and proj[k] != 0.0:
                    out[k] -= proj[k] * (moments[2 : q + 2] @ E[1 : q + 1])
                if k:
                    E[1 : q + 2] += A[k] * E[: q + 1]
        return out.T

    def _drift_tables(self, piece: int):
        key = ("drift", piece)
        tab = self._moment_cache.get(key)
        if tab is None:
            lam = self.loadings[:, piece, :]
            upper = np.triu(lam @ self.measure.c @ lam.T, 1)
            comps = []
            for u, m in self.measure.jumps:
                moments = np.array([0.0, 0.0] + [self.measure._moment(m, q) for q in range(2, self.n + 1)])
                comps.append((lam @ u, moments))
            tab = (upper, comps)
            self._moment_cache[key] = tab
        return tab


def bonds_from_libors(libors, accruals, b0: float) -> np.ndarray:
    """Telescoping ``B(T_k) = B(T_{k-1}) / (1 + delta_k L^k)``, starting from ``B(T_0) = b0``."""
    libors = np.asarray(libors, dtype=float)
    return b0 * np.concatenate([[1.0], np.cumprod(1.0 / (1.0 + accruals * libors))])


def nested_piecewise(outer: list, inner: list) -> float:
    """``∫ a(s) ∫_s^T b(v) dv ds`` for piecewise constants sharing the same pieces.

    ``outer`` and ``inner`` are lists of ``(length, value)`` on identical intervals.
    """
    total = 0.0
    tail = 0.0  # ∫ of b over the intervals to the right of the current one
    for (ln, a), (_, b) in zip(reversed(outer), reversed(inner)):
        total += a * (ln * tail + 0.5 * b * ln * ln)
        tail += b * ln
    return total


def paper_market(measure: LevyMeasure) -> MarketModel:
    """Reference configuration: ``T_0 = 5, ..., T_5 = 10``, flat 6%, unit loadings, ``B_0(T_0) = 1.06^{-5}``."""
    tenor = TenorStructure(tuple(float(t) for t in range(5, 11)))
    return MarketModel(tenor, [0.06] * 5, 1.06**-5, np.ones(measure.d), measure)
