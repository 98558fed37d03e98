"""Closed-form spectral efficiencies and gain-offset distributions.

The spectral-efficiency expressions move the expectation inside ``log2`` and
are therefore upper bounds (Jensen) on the ergodic rate, used as
approximations. The offset ``Z = |h_1|^2 - |h_2|^2`` compares the out-of-band
channel power with and without the IRS; its closed-form CCDF treats the two
powers as independent exponentials, which is the limit of the exact
dependent law as their correlation vanishes.

Notation: ``beta_r`` cascaded per-element gain, ``beta_d`` direct gain,
``gamma`` linear transmit SNR ``P / sigma^2``. The dependent-difference law
has its own parameter also conventionally called gamma; here it is
``simon_gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from irs_oob.geometry import LinkBudget

PI2_16 = math.pi**2 / 16.0
PI32_4 = math.pi**1.5 / 4.0


def _check_positive(**values):
    for name, v in values.items():
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite, got {v}")


def _check_count(n):
    if n < 0 or int(n) != n:
        raise ValueError(f"n_elements must be a non-negative integer, got {n}")


@dataclass(frozen=True)
class OperatorParams:
    n_elements: int
    beta_r: float
    beta_d: float
    gamma: float

    def __post_init__(self):
        _check_count(self.n_elements)
        _check_positive(beta_r=self.beta_r, beta_d=self.beta_d, gamma=self.gamma)

    @classmethod
    def from_budget(cls, n_elements: int, budget: LinkBudget, gamma: float) -> "OperatorParams":
        return cls(n_elements, budget.beta_r, budget.beta_d, gamma)


@dataclass(frozen=True)
class CcdfParams:
    n_elements: int
    beta_tilde: float
    beta_d: float

    def __post_init__(self):
        _check_count(self.n_elements)
        _check_positive(beta_tilde=self.beta_tilde, beta_d=self.beta_d)

    @classmethod
    def from_budget(cls, n_elements: int, budget: LinkBudget) -> "CcdfParams":
        return cls(n_elements, budget.beta_tilde, budget.beta_d)

    @property
    def mu1(self) -> float:
        return self.beta_d * (1.0 + self.n_elements * self.beta_tilde)

    @property
    def mu2(self) -> float:
        return self.beta_d


def mean_gain_x(n_elements, beta_r, beta_d):
    """E[(|h_d| + sum_n |f_n g_n|)^2] for independent Rayleigh links."""
    n = n_elements
    return (
        n * n * PI2_16 * beta_r
        + n * (beta_r - PI2_16 * beta_r + PI32_4 * np.sqrt(beta_d * beta_r))
        + beta_d
    )


def mean_gain_y(n_elements, beta_r, beta_d):
    """E[|h_d + sum_n f_n g_n e^{j theta_n}|^2] for any phases independent of the channels."""
    return n_elements * beta_r + beta_d


def jensen_se_x(p: OperatorParams) -> float:
    """Upper-bound approximation of the in-band ergodic SE, bits/s/Hz."""
    return float(np.log2(1.0 + mean_gain_x(p.n_elements, p.beta_r, p.beta_d) * p.gamma))


def jensen_se_y(p: OperatorParams) -> float:
    """Upper-bound approximation of the out-of-band ergodic SE, bits/s/Hz."""
    return float(np.log2(1.0 + mean_gain_y(p.n_elements, p.beta_r, p.beta_d) * p.gamma))


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def ccdf_z(p: CcdfParams, z):
    """Pr(Z >= z) for the out-of-band gain offset.

    With ``x = N * beta_tilde``::

        z <  0:  1 - exp(z / beta_d) / (x + 2)
        z >= 0:  (x + 1) / (x + 2) * exp(-z / (beta_d * (1 + x)))

    With no IRS the offset is just ``|h_d|^2``, so the CCDF is 1 below zero
    and ``exp(-z / beta_d)`` above it.
    """
    z = np.asarray(z, dtype=float)
    zneg = np.minimum(z, 0.0)
    zpos = np.maximum(z, 0.0)
    with np.errstate(under="ignore"):
        if p.n_elements == 0:
            return _scalar_or_array(np.where(z < 0, 1.0, np.exp(-zpos / p.beta_d)))
        x = p.n_elements * p.beta_tilde
        below = 1.0 - np.exp(zneg / p.beta_d) / (x + 2.0)
        above = (x + 1.0) / (x + 2.0) * np.exp(-zpos / (p.beta_d * (1.0 + x)))
    return _scalar_or_array(np.where(z < 0, below, above))


def prob_offset_negative(p: CcdfParams) -> float:
    """Pr(Z < 0): the chance the IRS lowers the instantaneous out-of-band gain."""
    if p.n_elements == 0:
        return 0.0
    return 1.0 / (p.n_elements * p.beta_tilde + 2.0)


def rho12(n_elements, beta_r, beta_d) -> float:
    """Correlation between the channel powers with and without the IRS."""
    _check_count(n_elements)
    _check_positive(beta_r=beta_r, beta_d=beta_d)
    return 1.0 / (1.0 + n_elements * (beta_r / beta_d))


@dataclass(frozen=True)
class SimonParams:
    """Parameters of the difference of two correlated exponential powers.

    ``mu1``/``mu2`` are the means (equal to the standard deviations) of the
    powers with and without the IRS; ``rho12`` is their correlation.
    """

    mu1: float
    mu2: float
    rho12: float

    def __post_init__(self):
        _check_positive(mu1=self.mu1, mu2=self.mu2)
        if self.mu1 < self.mu2:
            raise ValueError(f"mu1 must be >= mu2, got mu1={self.mu1}, mu2={self.mu2}")
        if not 0.0 <= self.rho12 < 1.0:
            raise ValueError(f"rho12 must lie in [0, 1), got {self.rho12}")
        if not (self.alpha_plus > 0 and self.alpha_minus > 0):
            raise ValueError("non-positive decay rate; parameters are numerically degenerate")

    @classmethod
    def from_budget(cls, n_elements: int, budget: LinkBudget) -> "SimonParams":
        return cls(
            mu1=mean_gain_y(n_elements, budget.beta_r, budget.beta_d),
            mu2=budget.beta_d,
            rho12=rho12(n_elements, budget.beta_r, budget.beta_d),
        )

    @property
    def sigma1(self) -> float:
        return self.mu1

    @property
    def sigma2(self) -> float:
        return self.mu2

    @property
    def _denom(self) -> float:
        return self.mu1 * self.mu2 * (1.0 - self.rho12**2)

    @property
    def simon_gamma(self) -> float:
        d = self.mu2 - self.mu1
        return 2.0 * math.sqrt(d * d + 4.0 * self._denom) / self._denom

    @property
    def alpha_plus(self) -> float:
        return self.simon_gamma + 2.0 * (self.mu2 - self.mu1) / self._denom

    @property
    def alpha_minus(self) -> float:
        return self.simon_gamma - 2.0 * (self.mu2 - self.mu1) / self._denom


def simon_cdf(sp: SimonParams, z):
    """CDF Pr(Z < z) of the correlated-exponential difference."""
    z = np.asarray(z, dtype=float)
    k = 8.0 / (sp._denom * sp.simon_gamma)
    with np.errstate(under="ignore"):
        below = k / sp.alpha_minus * np.exp(sp.alpha_minus * np.minimum(z, 0.0) / 4.0)
        above = 1.0 - k / sp.alpha_plus * np.exp(-sp.alpha_plus * np.maximum(z, 0.0) / 4.0)
    return _scalar_or_array(np.where(z < 0, below, above))


def ccdf_limit(mu1, mu2, z):
    """Pr(E1 - E2 >= z) for independent exponentials with means mu1, mu2."""
    _check_positive(mu1=mu1, mu2=mu2)
    z = np.asarray(z, dtype=float)
    with np.errstate(under="ignore"):
        below = 1.0 - mu2 / (mu1 + mu2) * np.exp(np.minimum(z, 0.0) / mu2)
        above = mu1 / (mu1 + mu2) * np.exp(-np.maximum(z, 0.0) / mu1)
    return _scalar_or_array(np.where(z < 0, below, above))
