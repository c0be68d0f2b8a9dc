"""Screen-pattern tests: closed-form Fraunhofer oracles plus sampling checks."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from eraserlab.errors import DegenerateWindowError
from eraserlab.screen import (
    ScreenCondition,
    ScreenPattern,
    SlitGeometry,
    conditioned_pattern,
    sample_positions_from_uniforms,
    sample_screen_position,
    slit_amplitude,
    visibility,
)

DEFAULT = SlitGeometry()
# wider slit separation (d/a = 10): pooled envelope is nearly flat across a
# two-fringe central window, which is what the low-visibility checks need
WIDE = SlitGeometry(slit_separation=300e-6)

ALL_CONDITIONS = list(ScreenCondition)
FRINGED = [ScreenCondition.ON_D3, ScreenCondition.ON_D4]


def oracle_sinc(z):
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.sin(np.pi * z[nz]) / (np.pi * z[nz])
    return out


def test_geometry_validation():
    with pytest.raises(ValueError):
        SlitGeometry(slit_width=0.0)
    with pytest.raises(ValueError):
        SlitGeometry(slit_width=2e-4, slit_separation=1e-4)
    with pytest.raises(ValueError):
        SlitGeometry(wavelength=-1e-9)
    assert DEFAULT.far_field_ok


def test_amplitude_center_and_mirror_symmetry():
    assert slit_amplitude(DEFAULT, 0.0, 1) == pytest.approx(1.0, abs=1e-12)
    assert slit_amplitude(DEFAULT, 0.0, 2) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(-2e-2, 2e-2, 101)
    a1 = np.abs(slit_amplitude(DEFAULT, xs, 1))
    a2 = np.abs(slit_amplitude(DEFAULT, xs[::-1], 2))
    np.testing.assert_allclose(a1, a2, atol=1e-12)
    with pytest.raises(ValueError):
        slit_amplitude(DEFAULT, 0.0, 3)


def test_first_envelope_zero():
    # independent Fraunhofer oracle: envelope is sin(pi a x / lam L)/(pi a x / lam L)
    g = DEFAULT
    x0 = g.wavelength * g.screen_distance / g.slit_width
    assert g.envelope_zero == pytest.approx(x0, rel=1e-15)
    assert abs(slit_amplitude(g, x0, 1)) < 1e-12
    assert abs(slit_amplitude(g, x0, 2)) < 1e-12
    assert abs(slit_amplitude(g, 0.9 * x0, 1)) > 1e-3
    xs = np.linspace(-2 * x0, 2 * x0, 501)
    want = np.abs(oracle_sinc(g.slit_width * xs / (g.wavelength * g.screen_distance)))
    np.testing.assert_allclose(np.abs(slit_amplitude(g, xs, 1)), want, atol=1e-12)


def test_envelope_shift_moves_envelopes_oppositely():
    g = SlitGeometry(envelope_shift=5e-4)
    assert abs(slit_amplitude(g, g.envelope_zero + 5e-4, 1)) < 1e-12
    assert abs(slit_amplitude(g, -(g.envelope_zero + 5e-4), 2)) < 1e-12


def test_patterns_normalized_and_weighted():
    for g in (DEFAULT, WIDE):
        for cond in ALL_CONDITIONS:
            p = conditioned_pattern(g, cond)
            assert p.intensity.min() >= 0.0
            assert p.intensity.sum() * p.bin_width == pytest.approx(1.0, abs=1e-9)
    w = {c: conditioned_pattern(DEFAULT, c).weight for c in ALL_CONDITIONS}
    assert w[ScreenCondition.ON_D1] == pytest.approx(0.5, abs=1e-12)
    assert w[ScreenCondition.ON_D2] == pytest.approx(0.5, abs=1e-12)
    assert w[ScreenCondition.ON_D3] + w[ScreenCondition.ON_D4] == pytest.approx(1.0, abs=1e-12)
    assert w[ScreenCondition.NO_CONDITION] == pytest.approx(1.0, abs=1e-15)


def test_basis_completeness_pointwise():
    # joint-scale identity: D3+D4 == D1+D2 == pooled, bin by bin
    for g in (DEFAULT, WIDE, SlitGeometry(envelope_shift=3e-4)):
        parts = {c: conditioned_pattern(g, c) for c in ALL_CONDITIONS}
        joint = {c: parts[c].intensity * parts[c].weight for c in ALL_CONDITIONS}
        eraser_sum = joint[ScreenCondition.ON_D3] + joint[ScreenCondition.ON_D4]
        path_sum = joint[ScreenCondition.ON_D1] + joint[ScreenCondition.ON_D2]
        pooled = joint[ScreenCondition.NO_CONDITION]
        scale = pooled.max()
        np.testing.assert_allclose(eraser_sum, pooled, atol=1e-12 * scale)
        np.testing.assert_allclose(path_sum, pooled, atol=1e-12 * scale)


def test_center_bright_for_d3_dark_for_d4():
    # continuum check at exactly x = 0
    amp_sum = slit_amplitude(DEFAULT, 0.0, 1) + slit_amplitude(DEFAULT, 0.0, 2)
    amp_diff = slit_amplitude(DEFAULT, 0.0, 1) - slit_amplitude(DEFAULT, 0.0, 2)
    assert abs(amp_diff) ** 2 == pytest.approx(0.0, abs=1e-12)
    assert abs(amp_sum) ** 2 == pytest.approx(4.0, abs=1e-12)
    # binned check: nearest bin center sits dx/2 off zero, so allow the
    # corresponding sin^2 leakage
    d3 = conditioned_pattern(DEFAULT, ScreenCondition.ON_D3)
    d4 = conditioned_pattern(DEFAULT, ScreenCondition.ON_D4)
    mid = np.argmin(np.abs(d3.xs))
    assert d3.intensity[mid] == d3.intensity.max()
    offset = abs(d3.xs[mid])
    leak = math.sin(math.pi * offset / DEFAULT.fringe_period) ** 2
    # 1.1 margin: the reference D4 maximum sits half a period off-center,
    # where the envelope has already drooped a few percent
    assert d4.intensity[mid] <= d4.intensity.max() * leak * 1.1


def _peak_positions(p: ScreenPattern) -> np.ndarray:
    i = p.intensity
    interior = (i[1:-1] > i[:-2]) & (i[1:-1] >= i[2:])
    return p.xs[1:-1][interior]


def test_fringe_period_and_interleaving():
    # d/a = 10 keeps the envelope's pull on peak positions well under a bin
    g = WIDE
    d3 = conditioned_pattern(g, ScreenCondition.ON_D3)
    d4 = conditioned_pattern(g, ScreenCondition.ON_D4)
    dx = d3.bin_width
    peaks3 = _peak_positions(d3)
    peaks4 = _peak_positions(d4)
    central3 = peaks3[np.abs(peaks3) < 2.5 * g.fringe_period]
    assert len(central3) >= 3
    gaps = np.diff(np.sort(central3))
    assert np.all(np.abs(gaps - g.fringe_period) <= dx)
    # D4 maxima sit half a period off the D3 maxima
    for x3 in central3:
        nearest4 = peaks4[np.argmin(np.abs(peaks4 - x3))]
        assert abs(abs(nearest4 - x3) - 0.5 * g.fringe_period) <= dx
    # at the default geometry the stronger envelope pulls peaks inward by
    # up to about a bin, so allow two
    d3_default = conditioned_pattern(DEFAULT, ScreenCondition.ON_D3)
    peaks = _peak_positions(d3_default)
    central = peaks[np.abs(peaks) < 2.5 * DEFAULT.fringe_period]
    gaps = np.diff(np.sort(central))
    assert np.all(np.abs(gaps - DEFAULT.fringe_period) <= 2 * d3_default.bin_width)


def test_pattern_validation():
    xs = np.arange(64) * 0.03125  # 64 bins of width 1/32 -> density 0.5
    flat = np.full(64, 0.5)
    ScreenPattern(xs, flat)  # ok
    with pytest.raises(ValueError):
        ScreenPattern(xs, 2 * flat)  # not normalized
    with pytest.raises(ValueError):
        ScreenPattern(xs, -flat)
    with pytest.raises(ValueError):
        ScreenPattern(np.concatenate([xs[:32], xs[32:] * 2]), flat)


def fringe_aligned_pattern(g: SlitGeometry, cond: ScreenCondition,
                           periods: float = 4.0, per_period: int = 21) -> ScreenPattern:
    """Grid whose bin centers include an exact dark fringe of ``cond``."""
    n = int(round(2 * periods * per_period))
    return conditioned_pattern(g, cond, n_bins=n,
                               halfwidth=periods * g.fringe_period)


def test_visibility_ideal_patterns():
    g = WIDE
    window = 4 * g.fringe_period
    # with a bin center landing exactly on a dark fringe the contrast is 1
    d3 = fringe_aligned_pattern(g, ScreenCondition.ON_D3)
    assert visibility(d3, window) == pytest.approx(1.0, abs=1e-9)
    # the stock grid misses the exact zero by at most half a bin
    assert visibility(conditioned_pattern(g, ScreenCondition.ON_D3), window) > 0.995
    # fringe-free patterns: only envelope droop contributes, so judge them
    # over the minimal two-period window
    pooled = conditioned_pattern(g, ScreenCondition.NO_CONDITION)
    assert visibility(pooled, 2 * g.fringe_period) < 0.05
    # default geometry's envelope still keeps pooled contrast far below fringes
    pooled_default = conditioned_pattern(DEFAULT, ScreenCondition.NO_CONDITION)
    assert visibility(pooled_default, 2 * DEFAULT.fringe_period) < 0.07
    single = conditioned_pattern(g, ScreenCondition.ON_D1)
    assert visibility(single, 2 * g.fringe_period) < 0.05


def test_visibility_with_uniform_background():
    # oracle: mix 10% uniform floor into the D3 density and evaluate directly
    g = WIDE
    window = 4 * g.fringe_period
    d3 = conditioned_pattern(g, ScreenCondition.ON_D3)
    span = d3.xs[-1] - d3.xs[0] + d3.bin_width
    uniform = np.full_like(d3.intensity, 1.0 / span)
    mixed = ScreenPattern(d3.xs, 0.9 * d3.intensity + 0.1 * uniform)
    mask = np.abs(d3.xs) <= 0.5 * window
    i_max = 0.9 * d3.intensity[mask].max() + 0.1 / span
    i_min = 0.9 * d3.intensity[mask].min() + 0.1 / span
    want = (i_max - i_min) / (i_max + i_min)
    assert visibility(mixed, window) == pytest.approx(want, abs=1e-12)
    assert 0.7 < want < 1.0


def test_visibility_degenerate_window():
    d3 = conditioned_pattern(DEFAULT, ScreenCondition.ON_D3)
    with pytest.raises(DegenerateWindowError):
        visibility(d3, d3.bin_width)  # a couple of bins at most
    with pytest.raises(DegenerateWindowError):
        visibility(d3, -1.0)


def test_sampling_single_bin_delta():
    xs = np.linspace(0.0, 63.0, 64)
    intensity = np.zeros(64)
    intensity[17] = 1.0  # bin width is 1, so density 1 integrates to 1
    p = ScreenPattern(xs, intensity)
    rng = np.random.default_rng(0)
    draws = sample_screen_position(p, rng, size=500)
    assert np.all(draws == xs[17])
    assert sample_screen_position(p, rng) == xs[17]


def test_sampling_uniform_ks():
    xs = np.linspace(-0.5, 0.5, 200)
    width = xs[1] - xs[0]
    p = ScreenPattern(xs, np.full(200, 1.0 / (200 * width)))
    rng = np.random.default_rng(7)
    draws = sample_screen_position(p, rng, size=100_000)
    lo, hi = xs[0] - width / 2, xs[-1] + width / 2
    stat = stats.kstest(draws, stats.uniform(loc=lo, scale=hi - lo).cdf).statistic
    assert stat < 1.63 / math.sqrt(100_000)  # 1% critical value


def test_sampling_histogram_matches_pattern():
    g = WIDE
    p = conditioned_pattern(g, ScreenCondition.ON_D3, n_bins=256)
    rng = np.random.default_rng(21)
    n = 100_000
    draws = sample_screen_position(p, rng, size=n)
    masses = p.bin_masses()
    counts = np.array([(draws == x).sum() for x in p.xs])
    assert counts.sum() == n
    sigma = np.sqrt(np.maximum(n * masses * (1 - masses), 1.0))
    assert np.all(np.abs(counts - n * masses) <= 3.2 * sigma)


def test_sampling_dark_fringe_bound():
    g = WIDE
    p = conditioned_pattern(g, ScreenCondition.ON_D4)
    rng = np.random.default_rng(3)
    n = 100_000
    draws = sample_screen_position(p, rng, size=n)
    mid = int(np.argmin(np.abs(p.xs)))
    bound = p.bin_masses()[mid]  # the pattern's own mass bound for that bin
    hits = int((draws == p.xs[mid]).sum())
    assert hits <= n * bound + 3 * math.sqrt(n * bound) + 1
    assert hits < 10


def test_sampling_from_uniforms_is_deterministic():
    p = conditioned_pattern(DEFAULT, ScreenCondition.ON_D3, n_bins=128)
    u = np.random.default_rng(5).random(1000)
    a = sample_positions_from_uniforms(p, u)
    b = sample_positions_from_uniforms(p, u)
    np.testing.assert_array_equal(a, b)
    # u = 1 boundary stays inside the grid
    edge = sample_positions_from_uniforms(p, np.array([0.0, 1.0 - 1e-16, 1.0]))
    assert np.all(np.isin(edge, p.xs))
