"""Photon wave function inside a slit as a truncated waveguide-mode series.

The field in an aperture of width ``a`` (y), length ``b`` (x) and
thickness ``c`` (z) is a double series of hard-wall modes

    sum_{m,n>=0}  16 A_j / ((2m+1)(2n+1) pi^2)
                  * sin((2n+1) pi x / b) * sin((2m+1) pi y / a)
                  * exp(i kz(m,n) z)

per Cartesian component j, where only odd harmonics survive the overlap
with the uniform incident wave.  The longitudinal wavenumber

    kz(m,n) = sqrt(k^2 - ((2n+1) pi / b)^2 - ((2m+1) pi / a)^2)

turns imaginary past cutoff; the decaying branch +i sqrt|.| is taken so
evanescent modes attenuate through the plate.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import (
    ConfigError,
    DomainError,
    IncidentWave,
    ModeVariant,
    SlitGeometry,
    TruncationPolicy,
    TWO_PI,
    C_LIGHT,
)


def sin_pi(t):
    """sin(pi * t), exactly 0.0 at integer t.

    Reduces the argument by the nearest integer before calling sin, so
    mode profiles vanish identically (not just to round-off) on the
    aperture edges and stay fully accurate for large harmonic numbers.
    """
    t = np.asarray(t, dtype=float)
    n = np.round(t)
    r = t - n
    sign = np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.sin(np.pi * r)


def cos_pi(t):
    """cos(pi * t) with the same exact argument reduction as :func:`sin_pi`."""
    t = np.asarray(t, dtype=float)
    n = np.round(t)
    r = t - n
    sign = np.where(np.mod(n, 2.0) == 0.0, 1.0, -1.0)
    return sign * np.cos(np.pi * r)


@dataclass(frozen=True)
class ModeIndex:
    """Zero-based mode index pair; harmonics are the odd integers 2m+1, 2n+1.

    m counts width-direction (y) modes, n length-direction (x) modes.
    Even harmonics carry zero coefficient and are not represented.
    """

    m: int
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ConfigError(f"mode indices must be >= 0, got ({self.m}, {self.n})")

    @property
    def width_harmonic(self) -> int:
        return 2 * self.m + 1

    @property
    def length_harmonic(self) -> int:
        return 2 * self.n + 1


@dataclass(frozen=True)
class ComplexVec3:
    """Three complex Cartesian field components."""

    x: complex
    y: complex
    z: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=complex)

    def dot(self, other: "ComplexVec3") -> complex:
        """Unconjugated bilinear dot product."""
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm_sq(self) -> float:
        """|x|^2 + |y|^2 + |z|^2."""
        return abs(self.x) ** 2 + abs(self.y) ** 2 + abs(self.z) ** 2

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_array().view(float))))

    @classmethod
    def from_scalar(cls, amplitude: tuple[float, float, float], scalar: complex) -> "ComplexVec3":
        ax, ay, az = amplitude
        return cls(ax * scalar, ay * scalar, az * scalar)


def mode_coefficient(idx: ModeIndex, amplitude_j: float) -> float:
    """Overlap coefficient of mode (m, n) with a uniform incident component A_j.

    16 A_j / ((2m+1)(2n+1) pi^2); even harmonics integrate to zero
    against the flat profile and never appear.
    """
    return 16.0 * amplitude_j / (idx.width_harmonic * idx.length_harmonic * math.pi**2)


def _kz_from_radicand(radicand):
    """Complex longitudinal wavenumber from k^2 - qx^2 - qy^2.

    Positive radicand: propagating, real kz.  Negative: evanescent,
    +i sqrt|.| so exp(i kz z) decays for z > 0.
    """
    radicand = np.asarray(radicand, dtype=float)
    kz = np.where(
        radicand >= 0.0,
        np.sqrt(np.abs(radicand)) + 0.0j,
        1j * np.sqrt(np.abs(radicand)),
    )
    return kz


def longitudinal_wavenumber(idx: ModeIndex, geom: SlitGeometry, wavelength: float) -> complex:
    """kz(m, n) for one mode of the given aperture."""
    if not wavelength > 0.0:
        raise ConfigError(f"wavelength must be positive, got {wavelength!r}")
    k = TWO_PI / wavelength
    qy = idx.width_harmonic * math.pi / geom.width_a
    qx = idx.length_harmonic * math.pi / geom.length_b
    return complex(_kz_from_radicand(k * k - qx * qx - qy * qy))


@dataclass(frozen=True, eq=False)
class ModeSelection:
    """Retained (m, n) grid: arrays are indexed [m, n]; treat as read-only."""

    m: np.ndarray        # (M,) int
    n: np.ndarray        # (N,) int
    kz: np.ndarray       # (M, N) complex
    keep: np.ndarray     # (M, N) bool

    @property
    def retained(self) -> int:
        return int(self.keep.sum())


@lru_cache(maxsize=16)
def select_modes(geom: SlitGeometry, wavelength: float, trunc: TruncationPolicy) -> ModeSelection:
    """Apply the truncation policy and return the retained mode grid.

    Modes inside the caps are ranked by |coefficient| x attenuation,
    i.e. by attenuation / ((2m+1)(2n+1)); summing in decreasing-weight
    order is the same as summing in increasing (2m+1)(2n+1) order for
    propagating modes.  The lowest-ranked modes are dropped while their
    total weight stays below tail_eps times the weight kept, and any
    mode attenuated below evanescent_floor across the plate thickness
    goes regardless.  Mode (0, 0) is always kept.
    """
    k = TWO_PI / wavelength
    m = np.arange(trunc.max_m + 1)
    n = np.arange(trunc.max_n + 1)
    qy = (2 * m + 1) * math.pi / geom.width_a
    qx = (2 * n + 1) * math.pi / geom.length_b
    kz = _kz_from_radicand(k * k - qx[None, :] ** 2 - qy[:, None] ** 2)

    attenuation = np.exp(-kz.imag * geom.thickness_c)
    keep = attenuation >= trunc.evanescent_floor

    weight = attenuation / np.outer(2 * m + 1, 2 * n + 1)
    weight = np.where(keep, weight, 0.0)

    flat = weight.ravel()
    order = np.argsort(flat, kind="stable")
    csum = np.cumsum(flat[order])
    total = csum[-1]
    if total > 0.0:
        # largest prefix of smallest weights with sum < tail_eps * rest
        droppable = csum < trunc.tail_eps / (1.0 + trunc.tail_eps) * total
        drop_idx = order[droppable]
        keep.ravel()[drop_idx] = False
    keep[0, 0] = True

    return ModeSelection(m=m, n=n, kz=kz, keep=keep)


def _check_inside(value, lo, hi, what):
    if not (lo <= value <= hi):
        raise DomainError(f"{what} = {value!r} outside [{lo!r}, {hi!r}]")


def slit_wavefunction(
    x: float,
    y: float,
    z: float,
    t: float,
    slit_index: int,
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    variant: ModeVariant = ModeVariant.LITERAL,
) -> ComplexVec3:
    """Field at a point inside slit 1 or 2 of the plate.

    The second slit's interior field is the first slit's translated by
    the center offset a + d (same for both variants; the variant only
    matters for far-field integrals).  Points outside the aperture or
    the plate raise DomainError.  The time factor exp(-i omega t) is a
    pure phase and is irrelevant to intensities; pass t = 0 for those.
    """
    del variant  # interior field is translation-invariant across variants
    lo, hi = geom.y_interval(slit_index)
    _check_inside(x, 0.0, geom.length_b, "x")
    _check_inside(y, lo, hi, "y")
    _check_inside(z, 0.0, geom.thickness_c, "z")
    y_eff = y - lo

    sel = select_modes(geom, wave.wavelength, trunc)
    mh = 2 * sel.m + 1
    nh = 2 * sel.n + 1
    sx = sin_pi(nh * (x / geom.length_b))          # (N,)
    sy = sin_pi(mh * (y_eff / geom.width_a))       # (M,)
    coeff = 16.0 / (math.pi**2 * np.outer(mh, nh))
    term = coeff * np.exp(1j * sel.kz * z) * sy[:, None] * sx[None, :]
    scalar = complex(np.sum(np.where(sel.keep, term, 0.0)))

    omega = C_LIGHT * TWO_PI / wave.wavelength
    scalar *= complex(np.exp(-1j * omega * t))
    return ComplexVec3.from_scalar(wave.amplitude, scalar)


def slit_wavefunction_infinite_length(
    y: float,
    z: float,
    t: float,
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
) -> ComplexVec3:
    """Field for the limiting case of an infinitely long slit (b -> infinity).

    Single sum over width modes: 4 A_j / ((2m+1) pi) sin((2m+1) pi y / a)
    exp(i sqrt(k^2 - ((2m+1) pi / a)^2) z).
    """
    _check_inside(y, 0.0, geom.width_a, "y")
    _check_inside(z, 0.0, geom.thickness_c, "z")

    k = TWO_PI / wave.wavelength
    m = np.arange(trunc.max_m + 1)
    mh = 2 * m + 1
    qy = mh * math.pi / geom.width_a
    kz = _kz_from_radicand(k * k - qy * qy)
    keep = np.exp(-kz.imag * geom.thickness_c) >= trunc.evanescent_floor
    keep[0] = True

    sy = sin_pi(mh * (y / geom.width_a))
    term = 4.0 / (math.pi * mh) * sy * np.exp(1j * kz * z)
    scalar = complex(np.sum(np.where(keep, term, 0.0)))

    omega = C_LIGHT * k
    scalar *= complex(np.exp(-1j * omega * t))
    return ComplexVec3.from_scalar(wave.amplitude, scalar)
