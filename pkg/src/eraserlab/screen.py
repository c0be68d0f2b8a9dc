"""Far-field double-slit screen patterns and conditioned fringe sampling.

Amplitudes use the Fraunhofer (far-field) approximation: each slit
contributes a common sinc envelope times a position-dependent phase, so the
four conditioned patterns and their fringe-free pool come out in closed
form.  Intensities are kept on a joint scale internally (pattern mass =
probability of the conditioning outcome) which makes the completeness
identities exact: OnD3 + OnD4 == OnD1 + OnD2 == NoCondition pointwise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ._kernels import categorical_sample, categorical_sample_rows
from .errors import DegenerateWindowError

__all__ = [
    "ScreenCondition",
    "SlitGeometry",
    "ScreenPattern",
    "slit_amplitude",
    "conditioned_pattern",
    "visibility",
    "empirical_visibility",
    "histogram_pattern",
    "sample_screen_position",
    "sample_positions_from_uniforms",
    "write_pattern_csv",
]

MASS_TOL = 1e-9
DEFAULT_BINS = 2048
DEFAULT_HALFWIDTH_ZEROS = 3.0  # grid spans +-3 envelope zeros


class ScreenCondition(Enum):
    """Lower-side outcome the screen histogram is conditioned on."""

    ON_D1 = "OnD1"
    ON_D2 = "OnD2"
    ON_D3 = "OnD3"
    ON_D4 = "OnD4"
    NO_CONDITION = "NoCondition"


@dataclass(frozen=True)
class SlitGeometry:
    """Double-slit layout: widths/separation at the mask, distance to screen.

    ``envelope_shift`` offsets each slit's diffraction envelope by the
    geometric shadow displacement (+shift for slit 1, -shift for slit 2);
    the default 0 keeps a common envelope for both slits.
    """

    slit_width: float = 30e-6
    slit_separation: float = 150e-6
    wavelength: float = 700e-9
    screen_distance: float = 1.0
    envelope_shift: float = 0.0

    def __post_init__(self) -> None:
        if not (self.slit_width > 0):
            raise ValueError("slit_width must be positive")
        if not (self.slit_separation > self.slit_width):
            raise ValueError("slit_separation must exceed slit_width")
        if not (self.wavelength > 0):
            raise ValueError("wavelength must be positive")
        if not (self.screen_distance > 0):
            raise ValueError("screen_distance must be positive")

    @property
    def fringe_period(self) -> float:
        """Spacing of interference fringes on the screen."""
        return self.wavelength * self.screen_distance / self.slit_separation

    @property
    def envelope_zero(self) -> float:
        """First zero of the single-slit envelope."""
        return self.wavelength * self.screen_distance / self.slit_width

    @property
    def fresnel_number(self) -> float:
        return self.slit_separation**2 / (self.wavelength * self.screen_distance)

    @property
    def far_field_ok(self) -> bool:
        """Flags (does not enforce) validity of the far-field approximation."""
        return self.fresnel_number < 0.1

    def grid(self, n_bins: int = DEFAULT_BINS,
             halfwidth: Optional[float] = None) -> np.ndarray:
        """Bin centers of a uniform screen grid (default +-3 envelope zeros)."""
        if halfwidth is None:
            halfwidth = DEFAULT_HALFWIDTH_ZEROS * self.envelope_zero
        edges = np.linspace(-halfwidth, halfwidth, n_bins + 1)
        return 0.5 * (edges[:-1] + edges[1:])


def slit_amplitude(g: SlitGeometry, x, slit: int) -> np.ndarray:
    """Far-field amplitude at screen position ``x`` from one slit (1 or 2).

    sinc envelope (first zero at wavelength*L/slit_width) times the phase
    exp(+-i*pi*d*x/(wavelength*L)); slit 1 takes the + sign.
    """
    if slit not in (1, 2):
        raise ValueError(f"slit must be 1 or 2, got {slit!r}")
    sign = 1.0 if slit == 1 else -1.0
    lam_l = g.wavelength * g.screen_distance
    x = np.asarray(x, dtype=float)
    x_env = x - sign * g.envelope_shift
    envelope = np.sinc(g.slit_width * x_env / lam_l)
    phase = np.exp(1j * sign * np.pi * g.slit_separation * x / lam_l)
    return envelope * phase


def _joint_intensity(g: SlitGeometry, xs: np.ndarray,
                     condition: ScreenCondition) -> np.ndarray:
    """Unnormalized screen density on the joint scale.

    Each conditioned density integrates to the probability of its lower-side
    outcome, so OnD1+OnD2, OnD3+OnD4 and NoCondition agree pointwise.
    """
    psi1 = slit_amplitude(g, xs, 1)
    psi2 = slit_amplitude(g, xs, 2)
    if condition is ScreenCondition.ON_D1:
        return 0.5 * np.abs(psi1) ** 2
    if condition is ScreenCondition.ON_D2:
        return 0.5 * np.abs(psi2) ** 2
    if condition is ScreenCondition.ON_D3:
        return 0.25 * np.abs(psi1 + psi2) ** 2
    if condition is ScreenCondition.ON_D4:
        return 0.25 * np.abs(psi1 - psi2) ** 2
    return 0.5 * (np.abs(psi1) ** 2 + np.abs(psi2) ** 2)


@dataclass(frozen=True)
class ScreenPattern:
    """Normalized screen intensity over uniform bins.

    ``intensity`` is a probability density (unit mass over the window);
    ``weight`` is the probability of the conditioning outcome within the
    window, so ``intensity * weight`` restores the joint scale.
    """

    xs: np.ndarray
    intensity: np.ndarray
    weight: float = 1.0
    condition: Optional[ScreenCondition] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=float)
        intensity = np.asarray(self.intensity, dtype=float)
        if xs.ndim != 1 or xs.shape != intensity.shape or xs.size < 2:
            raise ValueError("xs and intensity must be matching 1-D arrays")
        if np.any(intensity < 0) or not np.all(np.isfinite(intensity)):
            raise ValueError("intensity must be finite and non-negative")
        dx = np.diff(xs)
        if not np.allclose(dx, dx[0], rtol=1e-9, atol=0.0):
            raise ValueError("xs must be uniformly spaced")
        mass = float(intensity.sum() * dx[0])
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"intensity mass {mass!r} not normalized")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "intensity", intensity)
        self.xs.setflags(write=False)
        self.intensity.setflags(write=False)

    @property
    def bin_width(self) -> float:
        return float(self.xs[1] - self.xs[0])

    def bin_masses(self) -> np.ndarray:
        """Per-bin probabilities (sum exactly 1)."""
        masses = self.intensity * self.bin_width
        return masses / masses.sum()

    def bin_cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.bin_masses())
        cdf[-1] = 1.0
        return cdf


def conditioned_pattern(g: SlitGeometry, condition: ScreenCondition,
                        n_bins: int = DEFAULT_BINS,
                        halfwidth: Optional[float] = None) -> ScreenPattern:
    """Normalized screen pattern for one conditioning outcome.

    The pattern's ``weight`` is that outcome's probability restricted to the
    sampled window (OnD1/OnD2: exactly 1/2 each; OnD3/OnD4 sum to 1).
    """
    xs = g.grid(n_bins=n_bins, halfwidth=halfwidth)
    dx = xs[1] - xs[0]
    raw = _joint_intensity(g, xs, condition)
    pooled = _joint_intensity(g, xs, ScreenCondition.NO_CONDITION)
    mass = float(raw.sum() * dx)
    pooled_mass = float(pooled.sum() * dx)
    return ScreenPattern(
        xs=xs,
        intensity=raw / mass,
        weight=mass / pooled_mass,
        condition=condition,
    )


def visibility(p: ScreenPattern, window_around_center: float) -> float:
    """Fringe contrast (Imax - Imin)/(Imax + Imin) within ``+-window/2``.

    The caller must choose a window spanning at least two fringe periods for
    the result to mean fringe contrast; a window covering fewer than four
    bins (or carrying no intensity) raises DegenerateWindowError.
    """
    if not (window_around_center > 0):
        raise DegenerateWindowError("window must be positive")
    mask = np.abs(p.xs) <= 0.5 * window_around_center
    if int(mask.sum()) < 4:
        raise DegenerateWindowError(
            f"window {window_around_center!r} m covers only {int(mask.sum())} bins"
        )
    selected = p.intensity[mask]
    i_max = float(selected.max())
    i_min = float(selected.min())
    if i_max + i_min == 0.0:
        raise DegenerateWindowError("window carries no intensity")
    return (i_max - i_min) / (i_max + i_min)


def empirical_visibility(positions: np.ndarray, fringe_period: float,
                         window_around_center: float) -> float:
    """Fringe contrast of sampled hits at a known fringe period.

    Returns ``2 |mean(exp(2 pi i x / period))|`` over hits inside
    ``+-window/2`` — the quadrature amplitude of the fringe component, which
    converges to the pattern's (Imax-Imin)/(Imax+Imin) for a cosine fringe.
    Unlike a histogram max/min, its sampling noise floor is ~2/sqrt(n), so it
    can certify the *absence* of fringes from a finite sample.  Choose a
    window of a whole number of periods so the envelope does not leak in.
    """
    if not (window_around_center > 0 and fringe_period > 0):
        raise DegenerateWindowError("window and period must be positive")
    x = np.asarray(positions, dtype=float)
    x = x[np.abs(x) <= 0.5 * window_around_center]
    if x.size == 0:
        raise DegenerateWindowError("window contains no hits")
    return float(2.0 * np.abs(np.exp(2j * np.pi * x / fringe_period).mean()))


def histogram_pattern(positions: np.ndarray, xs: np.ndarray,
                      weight: float = 1.0) -> ScreenPattern:
    """Bin sampled hits onto an existing pattern grid.

    ``xs`` are uniform bin centers (typically some ScreenPattern's grid);
    hits outside the grid are dropped.  The result is normalized, so it can
    be compared bin-by-bin with an analytic pattern.
    """
    xs = np.asarray(xs, dtype=float)
    dx = float(xs[1] - xs[0])
    edges = np.concatenate([xs - 0.5 * dx, [xs[-1] + 0.5 * dx]])
    counts, _ = np.histogram(np.asarray(positions, dtype=float), bins=edges)
    n_in = int(counts.sum())
    if n_in == 0:
        raise DegenerateWindowError("no hits fall on the grid")
    return ScreenPattern(xs=xs, intensity=counts / (n_in * dx), weight=weight)


def sample_screen_position(p: ScreenPattern, rng: np.random.Generator,
                           size: Optional[int] = None):
    """Draw screen hits (bin centers) by inverse CDF over the bins."""
    cdf = p.bin_cdf()
    if size is None:
        idx = categorical_sample(cdf, np.asarray([rng.random()]))
        return float(p.xs[idx[0]])
    u = rng.random(size)
    return p.xs[categorical_sample(cdf, u)]


def sample_positions_from_uniforms(p: ScreenPattern, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling from externally supplied uniforms.

    Used by the batch driver so draws consume a fixed uniform layout and
    stay byte-identical across serial/parallel execution.
    """
    return p.xs[categorical_sample(p.bin_cdf(), np.asarray(u, dtype=float))]


def sample_positions_by_row(patterns: list[ScreenPattern], rows: np.ndarray,
                            u: np.ndarray) -> np.ndarray:
    """Row-selected inverse-CDF sampling: hit ``i`` uses ``patterns[rows[i]]``.

    All patterns must share one grid.
    """
    if not patterns:
        raise ValueError("patterns must be non-empty")
    xs = patterns[0].xs
    cdf_rows = np.stack([p.bin_cdf() for p in patterns])
    idx = categorical_sample_rows(cdf_rows, np.asarray(rows, dtype=np.int64),
                                  np.asarray(u, dtype=float))
    return xs[idx]


def write_pattern_csv(p: ScreenPattern, path) -> None:
    """Write (x_m, intensity) rows, scaled back to the joint scale.

    The written intensity is density * weight, so conditioned files sum
    pointwise to the pooled (NoCondition) file.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x_m", "intensity"])
        for x, i in zip(p.xs, p.intensity * p.weight):
            writer.writerow([f"{x:.12e}", f"{i:.12e}"])
