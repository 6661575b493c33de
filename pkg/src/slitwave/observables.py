"""Singles and coincidence patterns and fringe metrics.

A single detector counts in proportion to |Phi|^2.  Joint detection of
the degenerate collinear photon pair counts in proportion to
|Phi_s . Phi_i|^2 with an unconjugated complex dot product; both photons
traverse the same slits, so the default coincidence pattern evaluates
signal and idler at the same scan angle.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, DomainError, RunConfig
from .kirchhoff import _scalar_profiles
from .slitfield import ComplexVec3

THREADS_ENV = "SLITWAVE_THREADS"


def singles_intensity(amp: ComplexVec3) -> float:
    """|Phi_x|^2 + |Phi_y|^2 + |Phi_z|^2."""
    return amp.norm_sq()


def coincidence_intensity(amp_s: ComplexVec3, amp_i: ComplexVec3) -> float:
    """|Phi_s . Phi_i|^2 with the unconjugated bilinear dot product."""
    return abs(amp_s.dot(amp_i)) ** 2


@dataclass(frozen=True, eq=False)
class PatternSeries:
    """Sampled patterns over a strictly increasing beta grid (rad)."""

    beta_grid: np.ndarray
    singles: np.ndarray
    coincidence: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        beta = np.asarray(self.beta_grid, dtype=float)
        s = np.asarray(self.singles, dtype=float)
        c = np.asarray(self.coincidence, dtype=float)
        if not (beta.shape == s.shape == c.shape) or beta.ndim != 1:
            raise ConfigError("beta_grid, singles and coincidence must be equal-length 1-D arrays")
        if beta.size >= 2 and not np.all(np.diff(beta) > 0.0):
            raise ConfigError("beta_grid must be strictly increasing")
        object.__setattr__(self, "beta_grid", beta)
        object.__setattr__(self, "singles", s)
        object.__setattr__(self, "coincidence", c)

    def __len__(self) -> int:
        return self.beta_grid.size

    def normalized_copy(self) -> "PatternSeries":
        """Peak-normalize both columns to a maximum of 1."""
        smax = self.singles.max(initial=0.0)
        cmax = self.coincidence.max(initial=0.0)
        if smax <= 0.0 or cmax <= 0.0:
            raise DomainError("cannot peak-normalize an identically zero pattern")
        return replace(
            self,
            singles=self.singles / smax,
            coincidence=self.coincidence / cmax,
            normalized=True,
        )


def _total_scalar(betas, cfg: RunConfig) -> np.ndarray:
    geom, wave = cfg.geometry, cfg.wave
    if geom.slit_count == 1:
        prof = _scalar_profiles(
            betas, geom, wave, cfg.truncation, cfg.alpha, cfg.screen_R,
            cfg.variant, slit_indices=(1,),
        )
        return prof[1]
    prof = _scalar_profiles(
        betas, geom, wave, cfg.truncation, cfg.alpha, cfg.screen_R, cfg.variant,
    )
    return wave.c1 * prof[1] + wave.c2 * prof[2]


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def evaluate_pattern(betas, cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """Raw (singles, coincidence) arrays at arbitrary scan angles.

    Grid points are independent, so the evaluation may be chunked across
    threads (capped by the SLITWAVE_THREADS environment variable);
    results are reassembled in grid order either way.
    """
    betas = np.asarray(betas, dtype=float)
    workers = _thread_count()
    if workers == 1 or betas.size < 2 * workers:
        g = _total_scalar(betas, cfg)
    else:
        chunks = np.array_split(np.arange(betas.size), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _total_scalar(betas[idx], cfg), chunks))
        g = np.concatenate(parts)
    amp_sq = cfg.wave.amplitude_sq
    g_sq = np.abs(g) ** 2
    singles = amp_sq * g_sq
    coincidence = (amp_sq * g_sq) ** 2
    return singles, coincidence


def sweep(beta_min: float, beta_max: float, n_points: int, cfg: RunConfig) -> PatternSeries:
    """Uniform scan over [beta_min, beta_max] with n_points samples.

    Singles come from the total amplitude; coincidence uses the
    degenerate collinear pairing (signal and idler at the same beta).
    The returned series is unnormalized; call normalized_copy() to
    peak-normalize.
    """
    if n_points < 2:
        raise ConfigError(f"n_points must be >= 2, got {n_points}")
    if not beta_max > beta_min:
        raise ConfigError("beta_max must exceed beta_min")
    betas = np.linspace(beta_min, beta_max, n_points)
    singles, coincidence = evaluate_pattern(betas, cfg)
    return PatternSeries(beta_grid=betas, singles=singles, coincidence=coincidence)


def coincidence_pair(beta_s: float, beta_i: float, cfg: RunConfig) -> float:
    """Joint-detection intensity for distinct signal/idler scan angles."""
    g = _total_scalar(np.array([beta_s, beta_i]), cfg)
    dot = cfg.wave.amplitude_sq * g[0] * g[1]
    return abs(dot) ** 2


@dataclass(frozen=True)
class FringeMetrics:
    """Peak structure of one pattern column.

    Positions are sub-grid (3-point parabolic refinement); visibility is
    (Imax - Imin)/(Imax + Imin) across the central peak and its two
    flanking minima.  first_envelope_zero is taken from a separately
    computed single-slit envelope and is NaN when none was supplied.
    """

    peak_positions: np.ndarray
    mean_fringe_spacing: float
    visibility: float
    first_envelope_zero: float

    @property
    def is_empty(self) -> bool:
        return self.peak_positions.size == 0

    @classmethod
    def empty(cls) -> "FringeMetrics":
        return cls(np.array([]), math.nan, math.nan, math.nan)


def _refine_parabolic(x, y, i):
    """Sub-grid extremum location and value from points i-1, i, i+1."""
    denom = y[i - 1] - 2.0 * y[i] + y[i + 1]
    if denom == 0.0:
        return x[i], y[i]
    delta = 0.5 * (y[i - 1] - y[i + 1]) / denom
    h = x[i + 1] - x[i]
    return x[i] + delta * h, y[i] - 0.25 * (y[i - 1] - y[i + 1]) * delta


def _interior_extrema(y, kind):
    sign = 1.0 if kind == "max" else -1.0
    v = sign * np.asarray(y)
    idx = [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] > v[i + 1]]
    return idx


SPACING_WINDOW = 2.0e-3  # rad; fringe spacing averages peaks inside |beta| <= 2 mrad


def fringe_metrics(
    series: PatternSeries,
    which: str = "singles",
    envelope: PatternSeries | None = None,
) -> FringeMetrics:
    """Detect fringe peaks and derive spacing, visibility and envelope zero.

    Returns the empty-metrics value when the series has no interior
    maximum (flat or monotone data).
    """
    if which not in ("singles", "coincidence"):
        raise ConfigError(f"which must be 'singles' or 'coincidence', got {which!r}")
    if len(series) < 3:
        raise ConfigError("need at least 3 samples to detect peaks")
    beta = series.beta_grid
    y = getattr(series, which)

    maxima = _interior_extrema(y, "max")
    if not maxima:
        return FringeMetrics.empty()

    refined = np.array([_refine_parabolic(beta, y, i) for i in maxima])
    positions, heights = refined[:, 0], refined[:, 1]

    inside = np.abs(positions) <= SPACING_WINDOW
    spacing = math.nan
    if inside.sum() >= 2:
        spacing = float(np.mean(np.diff(positions[inside])))

    # central fringe group: tallest peak and its flanking minima
    visibility = math.nan
    central = maxima[int(np.argmax(heights))]
    minima = _interior_extrema(y, "min")
    left = [i for i in minima if i < central]
    right = [i for i in minima if i > central]
    if left and right:
        _, vmax = _refine_parabolic(beta, y, central)
        _, vleft = _refine_parabolic(beta, y, left[-1])
        _, vright = _refine_parabolic(beta, y, right[0])
        vmin = 0.5 * (vleft + vright)
        visibility = (vmax - vmin) / (vmax + vmin)

    env_zero = math.nan
    if envelope is not None:
        ey = getattr(envelope, which)
        env_minima = _interior_extrema(ey, "min")
        positive = [i for i in env_minima if envelope.beta_grid[i] > 0.0]
        if positive:
            env_zero, _ = _refine_parabolic(envelope.beta_grid, ey, positive[0])
            env_zero = float(env_zero)

    return FringeMetrics(
        peak_positions=positions,
        mean_fringe_spacing=spacing,
        visibility=float(visibility),
        first_envelope_zero=env_zero,
    )
