"""Jump-adapted Euler simulation of the Libor vector under the terminal measure.

Jumps larger than ``epsilon`` are simulated exactly as a compound Poisson process
whose jump times are inserted into the deterministic mesh; jumps below
``epsilon`` are replaced by a Brownian motion with matched variance, and the
large-jump compensator ``∫_{|z|>eps} z F(dz)`` enters as a deterministic drift of
the driver.  Rates are never clamped: negative values are counted, and paths
hitting ``1 + delta L <= 1e-6`` or ``|L| > 1e6`` are rejected and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .levy import JumpMeasure1D, LevyMeasure
from .market import MarketModel

_GUARD = 1e-6
_EXPLOSION = 1e6


@dataclass
class SimConfig:
    paths: int = 100_000
    epsilon: float | None = None
    seed: int = 0
    dt: float = 0.05
    batch: int = 50_000
    target_intensity: float = 50.0
    """Large-jump intensity (per year) used to pick ``epsilon`` when it is not given."""

    def __post_init__(self):
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def small_jump_variance(jumps: JumpMeasure1D, eps: float) -> float:
    """``∫_{|z| <= eps} z^2 F(dz)``."""
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return jumps.moment_by_quadrature(2, "inside", eps)


def large_jump_mean(jumps: JumpMeasure1D, eps: float) -> float:
    """``∫_{|z| > eps} z F(dz)``."""
    return jumps.moment_by_quadrature(1, "outside", eps)


def epsilon_for_intensity(jumps: JumpMeasure1D, intensity: float) -> float:
    """Truncation level whose tail mass ``F(|z| > eps)`` equals ``intensity``."""
    lo, hi = 1e-12, 1.0
    while jumps.tail_intensity(hi) > intensity and hi < 1e6:
        hi *= 10.0
    if jumps.tail_intensity(lo) <= intensity:
        return lo
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if jumps.tail_intensity(mid) > intensity:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1 + 1e-6:
            break
    return hi


@dataclass
class JumpComponent:
    """Truncated description of one jump direction used by the simulator."""

    direction: np.ndarray
    measure: JumpMeasure1D
    eps: float
    intensity: float
    small_var: float
    compensator: float

    @classmethod
    def build(cls, direction, measure: JumpMeasure1D, eps: float) -> "JumpComponent":
        return cls(
            np.asarray(direction, dtype=float),
            measure,
            eps,
            measure.tail_intensity(eps),
            small_jump_variance(measure, eps),
            large_jump_mean(measure, eps),
        )


def cgmy_large_jump_sampler(jumps: JumpMeasure1D, eps: float, rng: np.random.Generator):
    """``(intensity, sampler)`` for the jumps of size ``> eps``; ``sampler(size)`` draws sizes."""
    return jumps.tail_intensity(eps), lambda size: jumps.sample_tail(eps, size, rng)


@dataclass
class SimulationBatch:
    """States of one batch of paths at the observation dates."""

    states: dict
    valid: np.ndarray
    negative: np.ndarray


@dataclass
class MCResult:
    estimate: float
    stderr: float
    paths: int
    rejected: int
    negative_fraction: float
    z: float = 1.96
    extra: dict = field(default_factory=dict)

    @property
    def ci(self) -> tuple:
        if not np.isfinite(self.stderr):
            return (math.nan, math.nan)
        return (self.estimate - self.z * self.stderr, self.estimate + self.z * self.stderr)

    def interval(self, level: float = 0.95) -> tuple:
        from scipy.stats import norm

        z = norm.ppf(0.5 + level / 2)
        return (self.estimate - z * self.stderr, self.estimate + z * self.stderr)


class LiborSimulator:
    """Jump-adapted Euler scheme for ``dL = L_- (b(t, L) dt + Lambda(t) dX)`` under ``Q^{T_n}``."""

    def __init__(self, model: MarketModel, config: SimConfig):
        self.model = model
        self.config = config
        meas: LevyMeasure = model.measure
        comps = []
        for u, m in meas.jumps:
            eps = config.epsilon if config.epsilon is not None else epsilon_for_intensity(m, config.target_intensity)
            comps.append(JumpComponent.build(u, m, eps))
        self.components = comps
        d = meas.d
        # covariance of the continuous driver per unit time: c + sum_u sigma_eps^2 u u^T
        cov = meas.c.copy()
        drift = np.zeros(d)
        for comp in comps:
            cov = cov + comp.small_var * np.outer(comp.direction, comp.direction)
            drift -= comp.compensator * comp.direction
        self.cont_cov = cov
        self.cont_chol = _psd_sqrt(cov)
        self.driver_drift = drift
        self.total_intensity = sum(c.intensity for c in comps)

    def grid(self, horizon: float, obs=()) -> np.ndarray:
        T = self.model.tenor
        if horizon > T.dates[-2] + 1e-12:
            raise ValueError("horizon must not exceed T_{n-1}")
        pts = {0.0, horizon}
        pts.update(t for t in self.model.mesh if t < horizon)
        pts.update(t for t in obs if t <= horizon)
        nodes = sorted(pts)
        out = [nodes[0]]
        for a, b in zip(nodes[:-1], nodes[1:]):
            m = max(1, int(math.ceil((b - a) / self.config.dt - 1e-9)))
            out.extend(a + (b - a) * np.arange(1, m + 1) / m)
        return np.array(out)

    def batches(self, horizon: float, obs=()):
        """Yield :class:`SimulationBatch` objects covering ``config.paths`` paths."""
        obs = sorted(set(float(o) for o in obs) | {float(horizon)})
        grid = self.grid(horizon, obs)
        cfg = self.config
        sizes = [cfg.batch] * (cfg.paths // cfg.batch)
        if cfg.paths % cfg.batch:
            sizes.append(cfg.paths % cfg.batch)
        seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
        for size, ss in zip(sizes, seeds):
            yield self._simulate(size, grid, obs, np.random.default_rng(ss))

    def _simulate(self, size: int, grid: np.ndarray, obs, rng) -> SimulationBatch:
        model = self.model
        L = np.tile(model.libors, (size, 1))
        valid = np.ones(size, dtype=bool)
        negative = np.zeros(size, dtype=bool)
        states = {}
        obs_set = {round(o, 12): o for o in obs}
        if 0.0 in obs_set:
            states[obs_set[0.0]] = L.copy()
        comps = self.components
        rate = self.total_intensity
        probs = np.array([c.intensity for c in comps]) / rate if comps else None
        every = np.arange(size)
        for a, b in zip(grid[:-1], grid[1:]):
            mid = 0.5 * (a + b)
            lam = model.loading_matrix(mid)  # constant on the step
            h = b - a
            counts = rng.poisson(rate * h, size) if comps and rate > 0 else np.zeros(size, dtype=int)
            nmax = int(counts.max()) if size else 0
            if nmax == 0:
                self._advance(L, every, lam, mid, np.full(size, h), None, rng)
            else:
                # per-path sorted jump times, padded with b
                times = a + h * rng.random((size, nmax))
                times[np.arange(nmax)[None, :] >= counts[:, None]] = b
                times.sort(axis=1)
                marks = self._draw_marks(counts, nmax, probs, lam, rng)
                t_prev = np.full(size, a)
                for r in range(nmax + 1):
                    act = every if r == 0 else np.flatnonzero(counts >= r)
                    t_next = times[act, r] if r < nmax else np.full(act.size, b)
                    jump = None
                    if r < nmax:
                        has = counts[act] > r
                        jump = np.where(has[:, None], marks[act, r, :], 0.0)
                    self._advance(L, act, lam, mid, t_next - t_prev[act], jump, rng)
                    t_prev[act] = t_next
            negative |= (L < 0).any(axis=1)
            self._guard(L, valid)
            key = round(float(b), 12)
            if key in obs_set:
                states[obs_set[key]] = L.copy()
        return SimulationBatch(states, valid, negative)

    def _draw_marks(self, counts, nmax, probs, lam, rng) -> np.ndarray:
        """Relative rate moves ``Lambda z`` of each jump, shape ``(paths, nmax, n)``."""
        comps = self.components
        tot = int(counts.sum())
        which = rng.choice(len(comps), size=tot, p=probs) if len(comps) > 1 else np.zeros(tot, dtype=int)
        z = np.zeros((tot, self.model.d))
        for ci, comp in enumerate(comps):
            sel = which == ci
            z[sel] = comp.measure.sample_tail(comp.eps, int(sel.sum()), rng)[:, None] * comp.direction[None, :]
        marks = np.zeros((counts.size, nmax, self.model.n))
        slot = np.arange(nmax)[None, :] < counts[:, None]
        marks[slot] = z @ lam.T
        return marks

    def _advance(self, L, act, lam, t, dt, jump, rng):
        """Euler step of length ``dt`` on paths ``act``, then the jump ``L <- L (1 + Lambda z)``.

        ``L <- L (1 + b dt + Lambda (sqrt(cov) dW + driver_drift dt))``.
        """
        X = L[act]
        b = self.model.drift_vector(t, X)
        dW = rng.standard_normal((act.size, self.model.d)) @ self.cont_chol.T
        dX = dW * np.sqrt(dt)[:, None] + self.driver_drift[None, :] * dt[:, None]
        X *= 1.0 + b * dt[:, None] + dX @ lam.T
        if jump is not None:
            X *= 1.0 + jump
        L[act] = X

    def _guard(self, L, valid):
        bad = ((1.0 + self.model.accruals * L) <= _GUARD).any(axis=1) | (np.abs(L) > _EXPLOSION).any(axis=1)
        bad |= ~np.isfinite(L).all(axis=1)
        if bad.any():
            valid &= ~bad
            L[bad] = self.model.libors  # park rejected paths on a harmless state


def _psd_sqrt(cov: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(cov)
    return V * np.sqrt(np.clip(w, 0.0, None))


def simulate_terminal_measure(model: MarketModel, config: SimConfig, horizon: float, obs=()):
    """Generator of simulated batches; see :class:`LiborSimulator`."""
    return LiborSimulator(model, config).batches(horizon, obs)


class _Accumulator:
    def __init__(self, width: int):
        self.s = np.zeros(width)
        self.s2 = np.zeros(width)
        self.count = 0
        self.rejected = 0
        self.negative = 0
        self.total = 0

    def add(self, payoff: np.ndarray, batch: SimulationBatch):
        v = batch.valid
        p = payoff[v]
        self.s += p.sum(axis=0)
        self.s2 += (p * p).sum(axis=0)
        self.count += int(v.sum())
        self.rejected += int((~v).sum())
        self.negative += int(batch.negative.sum())
        self.total += v.size

    def results(self, scale: float) -> list:
        out = []
        for s, s2 in zip(self.s, self.s2):
            mean = s / self.count if self.count else math.nan
            if self.count > 1:
                var = max(s2 / self.count - mean * mean, 0.0) * self.count / (self.count - 1)
                se = math.sqrt(var / self.count)
            else:
                se = math.nan
            out.append(
                MCResult(scale * mean, scale * se, self.count, self.rejected, self.negative / max(self.total, 1))
            )
        return out


def caplet_payoff(L: np.ndarray, model: MarketModel, k: int, strikes) -> np.ndarray:
    """Terminal-measure caplet payoff ``prod_{j>k}(1 + delta_j L^j) (L^k - K)^+`` per strike."""
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    growth = np.prod(1.0 + model.accruals[k:] * L[:, k:], axis=1)
    return growth[:, None] * np.maximum(L[:, [k - 1]] - strikes[None, :], 0.0)


def mc_caplet_price(model: MarketModel, k: int, strikes, config: SimConfig):
    """Discounted caplet prices ``B_0(T_n) delta_k E[payoff]`` for one or several strikes."""
    T = model.tenor.reset(k)
    strikes_arr = np.atleast_1d(np.asarray(strikes, dtype=float))
    if np.any(strikes_arr <= 0):
        raise ValueError("caplet strikes must be positive")
    acc = _Accumulator(strikes_arr.size)
    for batch in simulate_terminal_measure(model, config, T):
        acc.add(caplet_payoff(batch.states[T], model, k, strikes_arr), batch)
    res = acc.results(model.bonds()[-1] * model.accruals[k - 1])
    return res[0] if np.ndim(strikes) == 0 else res


def swaption_payoff(L: np.ndarray, model: MarketModel, strikes) -> np.ndarray:
    """``(annuity / B_{T_0}(T_n)) (R - K)^+`` from Libors at ``T_0`` via telescoping bond ratios."""
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    delta = model.accruals
    g = 1.0 + delta * L
    # prod_{i>j} (1 + delta_i L^i) for j = 1..n
    tail = np.cumprod(g[:, ::-1], axis=1)[:, ::-1]
    ratio = np.concatenate([tail[:, 1:], np.ones((L.shape[0], 1))], axis=1)
    annuity = (delta * ratio).sum(axis=1)
    R = (delta * ratio * L).sum(axis=1) / annuity
    return annuity[:, None] * np.maximum(R[:, None] - strikes[None, :], 0.0)


def mc_swaption_price(model: MarketModel, strikes, config: SimConfig):
    """Payer swaption on the swap ``T_0 -> T_n`` expiring at ``T_0``."""
    T0 = model.tenor.dates[0]
    strikes_arr = np.atleast_1d(np.asarray(strikes, dtype=float))
    acc = _Accumulator(strikes_arr.size)
    for batch in simulate_terminal_measure(model, config, T0):
        acc.add(swaption_payoff(batch.states[T0], model, strikes_arr), batch)
    res = acc.results(model.bonds()[-1])
    return res[0] if np.ndim(strikes) == 0 else res
