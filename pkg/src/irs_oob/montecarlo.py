"""Round-robin Monte Carlo engine and the statistics used to check it.

Random streams are keyed by ``(seed, purpose, trial, ...)`` through
:class:`~irs_oob.geometry.RngStream`, so every trial is a self-contained work
unit and results do not depend on how many worker threads run them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from irs_oob import analytics
from irs_oob.geometry import (
    DEFAULT_LAYOUT,
    DEFAULT_PATHLOSS,
    LinkBudget,
    NetworkLayout,
    PathLossParams,
    RngStream,
    as_generator,
    db_to_linear,
    sample_fading,
    sample_uniform_ues,
)
from irs_oob.irs import beamformed_gain, effective_channel, optimal_phases, random_phases

DEFAULT_SEED = 20231019

# stream purposes
_PLACEMENT = 1
_FADING = 2

_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True)
class SimConfig:
    k_ues: int = 10
    q_ues: int = 10
    n_elements: int = 64
    slots: int = 1000
    trials: int = 100
    gamma_db_grid: tuple[float, ...] = tuple(float(g) for g in range(110, 161, 5))
    seed: int = DEFAULT_SEED
    layout: NetworkLayout = DEFAULT_LAYOUT
    pathloss: PathLossParams = DEFAULT_PATHLOSS
    region_x: tuple[float, float] = (0.0, 200.0)
    region_y: tuple[float, float] = (0.0, 200.0)
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("k_ues", "q_ues", "slots", "trials"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_elements < 0:
            raise ValueError(f"n_elements must be >= 0, got {self.n_elements}")
        if not self.gamma_db_grid:
            raise ValueError("gamma_db_grid must be non-empty")
        if self.slots < max(self.k_ues, self.q_ues):
            raise ValueError(
                f"slots ({self.slots}) must cover every UE at least once "
                f"(K={self.k_ues}, Q={self.q_ues})"
            )
        for op, ues, count in (("X", self.layout.ues_x, self.k_ues), ("Y", self.layout.ues_y, self.q_ues)):
            if ues and len(ues) != count:
                raise ValueError(f"layout lists {len(ues)} operator-{op} UEs but count is {count}")
        object.__setattr__(self, "gamma_db_grid", tuple(float(g) for g in self.gamma_db_grid))
        object.__setattr__(self, "gammas", db_to_linear(self.gamma_db_grid))

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def resolved_layout(self) -> NetworkLayout:
        """The layout with any missing UE population placed uniformly from the seed."""
        ues_x, ues_y = self.layout.ues_x, self.layout.ues_y
        if not ues_x:
            rng = RngStream.derive(self.seed, _PLACEMENT, 0)
            ues_x = tuple(sample_uniform_ues(self.k_ues, self.region_x, self.region_y, rng))
        if not ues_y:
            rng = RngStream.derive(self.seed, _PLACEMENT, 1)
            ues_y = tuple(sample_uniform_ues(self.q_ues, self.region_x, self.region_y, rng))
        return replace(self.layout, ues_x=ues_x, ues_y=ues_y)


@dataclass(frozen=True)
class SeEstimate:
    mean: float
    std_error: float
    n_samples: int


@dataclass
class RoundRobinResult:
    """Ergodic sum-SE per transmit SNR for both operators.

    ``trial_x``/``trial_y`` hold the per-trial sum-SE, shape (trials, gammas);
    ``ue_x``/``ue_y`` the per-trial per-UE time averages, shape
    (trials, gammas, UEs).
    """

    gamma_db: tuple[float, ...]
    n_elements: int
    layout: NetworkLayout
    trial_x: np.ndarray
    trial_y: np.ndarray
    ue_x: np.ndarray
    ue_y: np.ndarray

    @staticmethod
    def _estimate(samples: np.ndarray) -> SeEstimate:
        n = len(samples)
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return SeEstimate(float(np.mean(samples)), se, n)

    @property
    def x(self) -> list[SeEstimate]:
        return [self._estimate(self.trial_x[:, i]) for i in range(len(self.gamma_db))]

    @property
    def y(self) -> list[SeEstimate]:
        return [self._estimate(self.trial_y[:, i]) for i in range(len(self.gamma_db))]

    def per_ue(self, operator: str) -> list[list[SeEstimate]]:
        arr = self.ue_x if operator == "X" else self.ue_y
        return [
            [self._estimate(arr[:, i, u]) for u in range(arr.shape[2])]
            for i in range(len(self.gamma_db))
        ]


class _SlotBudgets(NamedTuple):
    beta_d: np.ndarray
    beta_f: np.ndarray
    beta_g: np.ndarray


def _slot_budgets(budgets: Sequence[LinkBudget], schedule: np.ndarray) -> _SlotBudgets:
    bd = np.array([b.beta_d for b in budgets])
    bf = np.array([b.beta_f for b in budgets])
    bg = np.array([b.beta_g for b in budgets])
    return _SlotBudgets(bd[schedule], bf[schedule], bg[schedule])


def _per_ue_average(rates: np.ndarray, schedule: np.ndarray, n_ues: int) -> np.ndarray:
    counts = np.bincount(schedule, minlength=n_ues)
    sums = np.stack([np.bincount(schedule, weights=r, minlength=n_ues) for r in rates])
    return sums / counts


def round_robin_schedule(slots: int, n_ues: int) -> np.ndarray:
    """UE index served in each slot: slot t serves UE ``t mod n_ues``."""
    return np.arange(slots) % n_ues


def _run_trial(cfg: SimConfig, budgets_x, budgets_y, trial: int, phase_mode: str):
    n = cfg.n_elements
    sched_x = round_robin_schedule(cfg.slots, cfg.k_ues)
    sched_y = round_robin_schedule(cfg.slots, cfg.q_ues)
    draw_x = sample_fading(
        _slot_budgets(budgets_x, sched_x), n, RngStream.derive(cfg.seed, _FADING, trial, 0), cfg.slots
    )
    draw_y = sample_fading(
        _slot_budgets(budgets_y, sched_y), n, RngStream.derive(cfg.seed, _FADING, trial, 1), cfg.slots
    )
    power_x = beamformed_gain(draw_x) ** 2
    if phase_mode == "random":
        phases = random_phases(n, RngStream.derive(cfg.seed, _FADING, trial, 2), cfg.slots)
    else:
        phases = optimal_phases(draw_x)
    power_y = np.abs(effective_channel(draw_y, phases)) ** 2
    gammas = cfg.gammas[:, None]
    rates_x = np.log2(1.0 + power_x[None, :] * gammas)
    rates_y = np.log2(1.0 + power_y[None, :] * gammas)
    return (
        _per_ue_average(rates_x, sched_x, cfg.k_ues),
        _per_ue_average(rates_y, sched_y, cfg.q_ues),
    )


def run_round_robin(cfg: SimConfig, threads: int = 1, phase_mode: str = "random") -> RoundRobinResult:
    """Simulate ``cfg.trials`` independent runs of ``cfg.slots`` round-robin slots.

    Each slot draws fresh fading for the two scheduled UEs. Operator X's UE
    gets the co-phased (beamformed) gain. Operator Y's UE sees the IRS through
    phases that are independent of its channel: fresh uniform phases by
    default, or, with ``phase_mode="inband"``, the actual phases X chose in
    that slot. Both give the same distribution by circular symmetry.
    """
    if phase_mode not in ("random", "inband"):
        raise ValueError(f"phase_mode must be 'random' or 'inband', got {phase_mode!r}")
    layout = cfg.resolved_layout()
    budgets_x = layout.budgets("X", cfg.pathloss)
    budgets_y = layout.budgets("Y", cfg.pathloss)

    def work(t):
        return _run_trial(cfg, budgets_x, budgets_y, t, phase_mode)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(cfg.trials)))
    else:
        results = [work(t) for t in range(cfg.trials)]

    ue_x = np.stack([r[0] for r in results])
    ue_y = np.stack([r[1] for r in results])
    return RoundRobinResult(
        gamma_db=cfg.gamma_db_grid,
        n_elements=cfg.n_elements,
        layout=layout,
        trial_x=ue_x.mean(axis=2),
        trial_y=ue_y.mean(axis=2),
        ue_x=ue_x,
        ue_y=ue_y,
    )


def analytic_sum_se(budgets: Sequence[LinkBudget], n_elements: int, gamma: float, operator: str) -> float:
    """Average of the closed-form per-UE SE over a UE population."""
    fn = analytics.jensen_se_x if operator == "X" else analytics.jensen_se_y
    values = [fn(analytics.OperatorParams.from_budget(n_elements, b, gamma)) for b in budgets]
    return float(np.mean(values))


def sample_gain_pairs(budget: LinkBudget, n_elements: int, count: int, rng):
    """Paired OOB channel powers ``(|h_1|^2, |h_2|^2)`` from the same draws.

    ``h_1`` is the effective channel under uniform random phases and ``h_2``
    is the direct term of that very draw, so the pair carries the dependence
    between the with- and without-IRS gains.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    gen = as_generator(rng)
    chunk = max(1, _CHUNK_ELEMENTS // max(n_elements, 1))
    h1sq = np.empty(count)
    h2sq = np.empty(count)
    for start in range(0, count, chunk):
        m = min(chunk, count - start)
        draw = sample_fading(budget, n_elements, gen, m)
        phases = random_phases(n_elements, gen, m)
        h1sq[start:start + m] = np.abs(effective_channel(draw, phases)) ** 2
        h2sq[start:start + m] = np.abs(draw.h_d) ** 2
    return h1sq, h2sq


def sample_offsets(budget: LinkBudget, n_elements: int, trials: int, rng) -> np.ndarray:
    """Samples of the gain offset ``|h_1|^2 - 1{N != 0} |h_2|^2``."""
    h1sq, h2sq = sample_gain_pairs(budget, n_elements, trials, rng)
    return h1sq - h2sq if n_elements != 0 else h1sq


@dataclass(frozen=True)
class EmpiricalCcdf:
    grid: np.ndarray
    survival: np.ndarray
    n_samples: int

    def std_error(self) -> np.ndarray:
        """Per-point binomial standard error of the survival estimate."""
        p = self.survival
        return np.sqrt(p * (1.0 - p) / self.n_samples)


def offset_grid(mu1: float, mu2: float, points: int = 512) -> np.ndarray:
    """Evaluation grid spanning ``[-8 mu2, 12 mu1]``."""
    return np.linspace(-8.0 * mu2, 12.0 * mu1, points)


def empirical_ccdf(samples, grid) -> EmpiricalCcdf:
    """Fraction of samples ``>= z`` at each grid point."""
    samples = np.sort(np.asarray(samples, dtype=float).ravel())
    grid = np.asarray(grid, dtype=float)
    if samples.size == 0 or grid.size == 0:
        raise ValueError("empirical_ccdf needs non-empty samples and grid")
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted ascending")
    below = np.searchsorted(samples, grid, side="left")
    survival = (samples.size - below) / samples.size
    return EmpiricalCcdf(grid, survival, samples.size)


def ks_distance(emp: EmpiricalCcdf, analytic: Callable[[np.ndarray], np.ndarray]) -> float:
    """Largest absolute gap between the empirical and analytic CCDF on the grid."""
    return float(np.max(np.abs(emp.survival - np.asarray(analytic(emp.grid), dtype=float))))


class DominanceResult(NamedTuple):
    holds: bool
    max_violation: float


def binomial_slack(a: EmpiricalCcdf, b: EmpiricalCcdf, sigmas: float = 3.0) -> np.ndarray:
    """Per-point tolerance for comparing two independent empirical CCDFs."""
    return sigmas * np.sqrt(a.std_error() ** 2 + b.std_error() ** 2)


def dominance_check(ccdf_small_n: EmpiricalCcdf, ccdf_large_n: EmpiricalCcdf, slack=0.0) -> DominanceResult:
    """Check ``survival_large >= survival_small - slack`` on the shared grid."""
    if ccdf_small_n.grid.shape != ccdf_large_n.grid.shape or not np.array_equal(
        ccdf_small_n.grid, ccdf_large_n.grid
    ):
        raise ValueError("dominance_check requires both CCDFs on the same grid")
    excess = ccdf_small_n.survival - slack - ccdf_large_n.survival
    worst = max(float(np.max(excess)), 0.0)
    return DominanceResult(worst <= 0.0, worst)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    std_err: float = 0.0


def fit_slope(points) -> SlopeFit:
    """Ordinary least squares of SE (bits) on log2 N."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (log2 N, SE) pairs")
    x, y = pts[:, 0], pts[:, 1]
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct abscissae")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if not sxx > 0:
        raise ValueError("abscissae spread underflows; cannot fit a slope")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    dof = len(x) - 2
    std_err = math.sqrt(ss_res / dof / sxx) if dof > 0 else 0.0
    return SlopeFit(slope, intercept, r2, std_err)


def quadrature_ccdf_oracle(mu1: float, mu2: float, z: float, tol: float = 1e-12) -> float:
    """Pr(E1 - E2 >= z) for independent exponentials, by numerical integration.

    Integrates the joint density ``e^{-x/mu1} e^{-y/mu2} / (mu1 mu2)`` over
    ``{x >= max(0, y + z)}`` after rescaling both axes by ``mu2``. The outer
    (y) axis is covered in segments of width ``4 mu2``; segments are added
    until the running estimate changes by less than ``tol``.
    """
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError("means must be positive")
    r = mu2 / mu1
    zs = z / mu2

    # x = mu2 * u, y = mu2 * v
    def density(u, v):
        return r * math.exp(-u * r - v)

    def inner(v):
        lo = max(0.0, v + zs)
        val, _ = integrate.quad(density, lo, math.inf, args=(v,), epsabs=1e-16, epsrel=1e-13, limit=200)
        return val

    def outer(a, b):
        val, _ = integrate.quad(inner, a, b, epsabs=1e-16, epsrel=1e-13, limit=200)
        return val

    kink = max(0.0, -zs)
    est = outer(0.0, kink) if kink > 0.0 else 0.0
    a = kink
    for _ in range(1000):
        step = outer(a, a + 4.0)
        est += step
        a += 4.0
        if abs(step) < tol:
            break
    return est
