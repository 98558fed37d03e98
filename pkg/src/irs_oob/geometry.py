"""Node placement, distance-based path loss and i.i.d. Rayleigh fading.

All gains are linear power gains. The default constants reproduce the
evaluation setup: BS-X at (0, 200) m, BS-Y at (200, 0) m, the IRS at the
origin, UEs uniform over the square [0, 200]^2, C0 = -30 dB at d0 = 1 m and
exponents 1.5 / 2 / 3 on the BS-IRS / IRS-UE / BS-UE links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


class Position(NamedTuple):
    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class PathLossParams:
    """Parameters of ``beta = c0 * (d0 / d) ** alpha``.

    ``c0`` is the linear gain at the reference distance ``d0`` (metres).
    """

    c0: float = 1e-3
    d0: float = 1.0
    alpha_bs_irs: float = 1.5
    alpha_irs_ue: float = 2.0
    alpha_direct: float = 3.0

    def __post_init__(self):
        if not (self.c0 > 0 and math.isfinite(self.c0)):
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if not (self.d0 > 0 and math.isfinite(self.d0)):
            raise ValueError(f"d0 must be positive, got {self.d0}")
        for name in ("alpha_bs_irs", "alpha_irs_ue", "alpha_direct"):
            if not getattr(self, name) >= 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class LinkBudget:
    """Per-link large-scale gains seen by one UE.

    ``beta_r`` is the per-element cascaded gain ``beta_f * beta_g``; it is
    derived, never passed in, so the product identity holds exactly.
    """

    beta_d: float
    beta_f: float
    beta_g: float
    beta_r: float = field(init=False)

    def __post_init__(self):
        for name in ("beta_d", "beta_f", "beta_g"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        object.__setattr__(self, "beta_r", self.beta_f * self.beta_g)

    @property
    def beta_tilde(self) -> float:
        """Ratio of the cascaded to the direct gain."""
        return self.beta_r / self.beta_d


@dataclass(frozen=True)
class NetworkLayout:
    bs_x: Position = Position(0.0, 200.0)
    bs_y: Position = Position(200.0, 0.0)
    irs: Position = Position(0.0, 0.0)
    ues_x: tuple[Position, ...] = ()
    ues_y: tuple[Position, ...] = ()

    def base_station(self, operator: str) -> Position:
        if operator == "X":
            return self.bs_x
        if operator == "Y":
            return self.bs_y
        raise ValueError(f"unknown operator {operator!r}")

    def ues(self, operator: str) -> tuple[Position, ...]:
        return self.ues_x if operator == "X" else self.ues_y

    def budgets(self, operator: str, params: PathLossParams) -> list[LinkBudget]:
        bs = self.base_station(operator)
        return [link_budget(ue, bs, self.irs, params) for ue in self.ues(operator)]


DEFAULT_LAYOUT = NetworkLayout()
DEFAULT_PATHLOSS = PathLossParams()


@dataclass(frozen=True)
class FadingDraw:
    """Channel realisation(s) for one UE.

    ``h_d`` has shape ``batch``; ``f`` and ``g`` have shape ``batch + (N,)``.
    A single draw uses ``batch = ()``.
    """

    h_d: np.ndarray
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if np.shape(self.f) != np.shape(self.g):
            raise ValueError(f"f and g shapes differ: {np.shape(self.f)} vs {np.shape(self.g)}")

    @property
    def n_elements(self) -> int:
        return np.shape(self.f)[-1]


def mix_stream_id(*indices: int) -> int:
    """Fold integer indices into one 64-bit stream id (splitmix64 chain)."""
    h = 0x9E3779B97F4A7C15
    for i in indices:
        h = (h ^ (int(i) & _MASK64)) & _MASK64
        h = (h + 0x9E3779B97F4A7C15) & _MASK64
        h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & _MASK64
        h ^= h >> 31
    return h


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Each call to :meth:`generator` returns a fresh Philox generator positioned
    at the start of the stream, so the same key always replays the same
    sequence and distinct stream ids never overlap.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")

    @classmethod
    def derive(cls, seed: int, *indices: int) -> "RngStream":
        return cls(seed, mix_stream_id(*indices))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def path_loss(params: PathLossParams, alpha, d):
    """Linear power gain ``c0 * (d0 / d) ** alpha``."""
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError(f"distance must be positive, got {d}")
    out = params.c0 * (params.d0 / d) ** alpha
    return float(out) if out.ndim == 0 else out


def link_budget(ue: Position, bs: Position, irs: Position, params: PathLossParams) -> LinkBudget:
    ue, bs, irs = Position(*ue), Position(*bs), Position(*irs)
    d_f = bs.distance_to(irs)
    d_g = irs.distance_to(ue)
    d_d = bs.distance_to(ue)
    for name, d in (("BS-IRS", d_f), ("IRS-UE", d_g), ("BS-UE", d_d)):
        if not d > 0:
            raise ValueError(f"{name} distance is zero: coincident nodes")
    return LinkBudget(
        beta_d=path_loss(params, params.alpha_direct, d_d),
        beta_f=path_loss(params, params.alpha_bs_irs, d_f),
        beta_g=path_loss(params, params.alpha_irs_ue, d_g),
    )


def complex_normal(gen: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    re = gen.standard_normal(shape)
    im = gen.standard_normal(shape)
    return scale * (re + 1j * im)


def sample_fading(budget: LinkBudget, n_elements: int, rng, size=None) -> FadingDraw:
    """Draw ``h_d ~ CN(0, beta_d)``, ``f ~ CN(0, beta_f I)``, ``g ~ CN(0, beta_g I)``.

    ``budget`` fields may be arrays broadcastable to ``size`` (one budget per
    batch entry, e.g. per scheduled slot).
    """
    if n_elements < 0:
        raise ValueError(f"n_elements must be >= 0, got {n_elements}")
    gen = as_generator(rng)
    batch = () if size is None else tuple(np.atleast_1d(size))
    beta_d = np.asarray(budget.beta_d, dtype=float)
    beta_f = np.asarray(budget.beta_f, dtype=float)[..., None]
    beta_g = np.asarray(budget.beta_g, dtype=float)[..., None]
    h_d = complex_normal(gen, batch, beta_d)
    f = complex_normal(gen, batch + (n_elements,), beta_f)
    g = complex_normal(gen, batch + (n_elements,), beta_g)
    return FadingDraw(h_d, f, g)


def sample_uniform_ues(
    count: int,
    x_range: Sequence[float] = (0.0, 200.0),
    y_range: Sequence[float] = (0.0, 200.0),
    rng=None,
) -> list[Position]:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    (x0, x1), (y0, y1) = x_range, y_range
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"empty placement region x={x_range}, y={y_range}")
    gen = as_generator(rng if rng is not None else RngStream(0))
    xs = gen.uniform(x0, x1, count)
    ys = gen.uniform(y0, y1, count)
    return [Position(float(x), float(y)) for x, y in zip(xs, ys)]
