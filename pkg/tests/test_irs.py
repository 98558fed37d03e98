import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from irs_oob.geometry import FadingDraw, LinkBudget, RngStream, sample_fading
from irs_oob.irs import (
    TWO_PI,
    beamformed_gain,
    effective_channel,
    normalize_phases,
    optimal_phases,
    random_phases,
    snr_and_rate,
)


def draw_of(h_d, f, g):
    return FadingDraw(np.asarray(h_d, complex), np.asarray(f, complex), np.asarray(g, complex))


def test_optimal_phase_example():
    d = draw_of(1, [1j] * 3, [1j] * 3)
    assert np.allclose(optimal_phases(d), math.pi)


def test_zero_direct_channel_uses_angle_zero():
    d = draw_of(0, [1j], [1])
    theta = optimal_phases(d)
    assert theta[0] == pytest.approx(1.5 * math.pi)
    assert abs(effective_channel(d, theta)) == pytest.approx(1.0)


def test_effective_channel_examples():
    assert effective_channel(draw_of(2 - 1j, [], []), []) == 2 - 1j
    assert abs(effective_channel(draw_of(1, [1], [1]), [math.pi])) < 1e-15
    assert effective_channel(draw_of(1, [1] * 4, [1] * 4), [0.0] * 4) == pytest.approx(5.0)


def test_length_mismatch():
    with pytest.raises(ValueError):
        effective_channel(draw_of(1, [1, 1], [1, 1]), [0.0])


def test_beamformed_gain_examples():
    assert beamformed_gain(draw_of(3 + 4j, [1], [2j])) == pytest.approx(7.0)
    assert beamformed_gain(draw_of(-2j, [], [])) == pytest.approx(2.0)


def test_random_phases_empty_and_range(rng):
    assert random_phases(0, rng).shape == (0,)
    theta = random_phases(64, rng, 1000)
    assert theta.shape == (1000, 64)
    assert np.all((theta >= 0) & (theta < TWO_PI))


def test_random_phase_circular_mean():
    z = np.exp(1j * random_phases(1, RngStream(4), 1_000_000)[:, 0])
    se = 1 / math.sqrt(2 * z.size)
    assert abs(z.real.mean()) <= 3 * se and abs(z.imag.mean()) <= 3 * se


@given(st.floats(-1e3, 1e3, allow_nan=False))
def test_normalize_phases_range(t):
    v = float(normalize_phases(t))
    assert 0 <= v < TWO_PI


def test_snr_and_rate_examples():
    assert snr_and_rate(0, 1.0) == (0.0, 0.0)
    assert snr_and_rate(1.0, 1.0)[1] == pytest.approx(1.0)
    assert snr_and_rate(math.sqrt(3), 1.0)[1] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        snr_and_rate(1.0, 0.0)


budgets = st.builds(
    LinkBudget,
    beta_d=st.floats(1e-3, 1e3),
    beta_f=st.floats(1e-3, 1e3),
    beta_g=st.floats(1e-3, 1e3),
)


@settings(max_examples=50, deadline=None)
@given(budget=budgets, n=st.integers(0, 32), seed=st.integers(0, 2**32))
def test_coherent_addition_identity(budget, n, seed):
    d = sample_fading(budget, n, RngStream(seed))
    h = effective_channel(d, optimal_phases(d))
    assert abs(h) == pytest.approx(beamformed_gain(d), rel=1e-12)
    # every cascaded term lands on the direct path's angle
    terms = d.g * np.exp(1j * optimal_phases(d)) * d.f
    if n:
        diff = np.angle(terms * np.conj(d.h_d))
        assert np.allclose(diff, 0.0, atol=1e-9)


def test_optimal_dominates_random_configs():
    budget = LinkBudget(1.0, 1.0, 1.0)
    draws = sample_fading(budget, 8, RngStream(21), 10_000)
    best = beamformed_gain(draws)
    gen = RngStream(22).generator()
    for _ in range(100):
        h = np.abs(effective_channel(draws, random_phases(8, gen, 10_000)))
        assert np.all(h <= best * (1 + 1e-12))


def test_oob_magnitude_invariant_to_inband_choice():
    # phases optimal for an independent draw vs fresh uniform phases
    oob = LinkBudget(1.0, 0.5, 0.8)
    n, m = 16, 100_000
    y = sample_fading(oob, n, RngStream(31), m)
    other = sample_fading(LinkBudget(3.0, 2.0, 0.1), n, RngStream(32), m)
    a = np.abs(effective_channel(y, optimal_phases(other)))
    b = np.abs(effective_channel(y, random_phases(n, RngStream(33), m)))
    assert stats.ks_2samp(a, b).statistic < 0.01


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**32),
    re=st.floats(-5, 5),
    im=st.floats(-5, 5),
)
def test_scaling_direct_and_bs_links(seed, re, im):
    c = complex(re, im)
    d = sample_fading(LinkBudget(1.0, 1.0, 1.0), 6, RngStream(seed))
    theta = random_phases(6, RngStream(seed, 1))
    scaled = FadingDraw(c * d.h_d, c * d.f, d.g)
    assert effective_channel(scaled, theta) == pytest.approx(c * effective_channel(d, theta), abs=1e-12)
    assert beamformed_gain(scaled) == pytest.approx(abs(c) * beamformed_gain(d), rel=1e-12, abs=1e-12)


@given(
    h=st.floats(0, 1e3),
    dh=st.floats(0, 1e3),
    g=st.floats(1e-6, 1e6),
    dg=st.floats(0, 1e6),
)
def test_rate_monotone(h, dh, g, dg):
    base = snr_and_rate(h, g)[1]
    assert snr_and_rate(h + dh, g)[1] >= base
    assert snr_and_rate(h, g + dg)[1] >= base
