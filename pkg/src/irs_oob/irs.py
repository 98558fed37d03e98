"""IRS phase configurations and the end-to-end scalar channel.

Phase configurations are plain float arrays of radians normalised to
``[0, 2*pi)``; the last axis indexes IRS elements, leading axes are batch.
Reflection coefficients are unit modulus with continuous phase.
"""

from __future__ import annotations

import numpy as np

from irs_oob.geometry import FadingDraw, as_generator

TWO_PI = 2.0 * np.pi


def normalize_phases(theta) -> np.ndarray:
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    # mod can round a tiny negative input up to exactly 2*pi
    return np.where(theta >= TWO_PI, 0.0, theta)


def optimal_phases(draw: FadingDraw) -> np.ndarray:
    """Phases that co-phase every cascaded path with the direct path.

    ``theta_n = arg(h_d) - arg(f_n) - arg(g_n)``. A zero direct channel has
    angle 0 by convention (``np.angle(0) == 0``).
    """
    ref = np.angle(np.asarray(draw.h_d))[..., None]
    return normalize_phases(ref - np.angle(draw.f) - np.angle(draw.g))


def random_phases(n_elements: int, rng, size=None) -> np.ndarray:
    """I.i.d. uniform phases on ``[0, 2*pi)``."""
    if n_elements < 0:
        raise ValueError(f"n_elements must be >= 0, got {n_elements}")
    gen = as_generator(rng)
    batch = () if size is None else tuple(np.atleast_1d(size))
    return normalize_phases(gen.uniform(0.0, TWO_PI, batch + (n_elements,)))


def effective_channel(draw: FadingDraw, phases) -> np.ndarray | complex:
    """``h_d + sum_n g_n * exp(j*theta_n) * f_n``."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape[-1:] != np.shape(draw.f)[-1:]:
        raise ValueError(
            f"phase config has {phases.shape[-1:]} elements, draw has {np.shape(draw.f)[-1:]}"
        )
    cascade = np.sum(draw.g * np.exp(1j * phases) * draw.f, axis=-1)
    h = draw.h_d + cascade
    return complex(h) if np.ndim(h) == 0 else h


def beamformed_gain(draw: FadingDraw):
    """Amplitude under the optimal configuration: ``|h_d| + sum |f_n g_n|``."""
    g = np.abs(draw.h_d) + np.sum(np.abs(draw.f * draw.g), axis=-1)
    return float(g) if np.ndim(g) == 0 else g


def snr_and_rate(h, gamma):
    """Receive SNR ``|h|^2 * gamma`` and rate ``log2(1 + snr)`` in bits/s/Hz."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(~(gamma > 0)):
        raise ValueError(f"transmit SNR must be positive, got {gamma}")
    snr = np.abs(h) ** 2 * gamma
    rate = np.log2(1.0 + snr)
    if np.ndim(snr) == 0:
        return float(snr), float(rate)
    return snr, rate
