"""Closed-form far-field diffraction amplitudes of the modal slit fields.

Each retained mode contributes, per Cartesian component,

    coeff(m,n) * exp(i kz c) * [ i kz + (i k - 1/R) sqrt(cos^2 a - sin^2 b) ]
    * Ix(n) * Iy(m)

under the global factor -exp(i k R) / (4 pi R), where Ix and Iy are
line integrals of exp(-i q u) sin(p pi u / L) over the aperture sides.
Those integrals have an elementary antiderivative; it is evaluated here
in a phase-factored sinc form that stays stable through the removable
resonances q = +-p pi / L.

Angle conventions: the scan direction has transverse wavenumbers
qx = k sin(alpha) along the slit length and qy = k sin(beta) across the
width; the obliquity radical sqrt(cos^2 alpha - sin^2 beta) is the z
direction cosine of the observation ray and must be real.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import (
    DetectorDirection,
    DomainError,
    IncidentWave,
    ModeVariant,
    SlitGeometry,
    TruncationPolicy,
    TWO_PI,
)
from .slitfield import (
    ComplexVec3,
    ModeIndex,
    longitudinal_wavenumber,
    select_modes,
)

# Series branch of sin(x)/x.  With x = (q -+ p pi/L) * (u1-u0)/2 this
# window is the resonance neighbourhood |q L/pi -+ p| < 1e-6 for a
# full-side interval.
_RESONANCE_WINDOW = 0.5e-6 * math.pi


def _stable_sinc(x):
    """sin(x)/x, switching to the expanded form 1 - x^2/6 inside the window."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _RESONANCE_WINDOW
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


def _exp_integral(a, u0, u1):
    """integral of exp(i a u) du over [u0, u1], exact for every real a.

    Factoring the midpoint phase gives
    exp(i a (u0+u1)/2) * (u1-u0) * sinc(a (u1-u0)/2), which has no
    cancellation between endpoint exponentials and degrades gracefully
    to (u1-u0) as a -> 0.
    """
    half = 0.5 * (u1 - u0)
    mid = 0.5 * (u0 + u1)
    a = np.asarray(a, dtype=float)
    return np.exp(1j * a * mid) * (u1 - u0) * _stable_sinc(a * half)


def _line_sine_closed(q, p, L, u0, u1, shifted=False):
    """Closed form of integral exp(-i q u) sin(p pi (u - u_ref)/L) du.

    u_ref is u0 when ``shifted`` else 0.  Splitting the sine into
    exponentials leaves two phase integrals handled by
    :func:`_exp_integral`; broadcasting over array q and p is supported.
    """
    kappa = np.asarray(p, dtype=float) * math.pi / L
    q = np.asarray(q, dtype=float)
    if shifted:
        plus = np.exp(-1j * kappa * u0) * _exp_integral(kappa - q, u0, u1)
        minus = np.exp(1j * kappa * u0) * _exp_integral(-(kappa + q), u0, u1)
    else:
        plus = _exp_integral(kappa - q, u0, u1)
        minus = _exp_integral(-(kappa + q), u0, u1)
    return (plus - minus) / 2j


def line_integral_sine(
    q: float,
    p: int,
    L: float,
    interval: tuple[float, float],
    shifted: bool = False,
) -> complex:
    """integral over [u0, u1] of exp(-i q u) sin(p pi (u - u_ref)/L) du.

    The phase factor always uses the absolute coordinate u; ``shifted``
    selects whether the sine is referenced to the interval's own lower
    edge (u_ref = u0) or to the origin.  Resonances q = +-p pi / L are
    removable and handled internally.
    """
    u0, u1 = interval
    if not L > 0.0:
        raise DomainError(f"mode length L must be positive, got {L!r}")
    if not u1 > u0:
        raise DomainError(f"interval must be increasing, got [{u0!r}, {u1!r}]")
    if p < 1:
        raise DomainError(f"harmonic p must be >= 1, got {p!r}")
    return complex(_line_sine_closed(q, p, L, u0, u1, shifted=shifted))


def _direction_cosine_sq(direction: DetectorDirection):
    x2 = math.cos(direction.alpha) ** 2 - math.sin(direction.beta) ** 2
    if x2 < 0.0:
        raise DomainError(
            f"sin^2(beta) exceeds cos^2(alpha) at alpha={direction.alpha!r}, "
            f"beta={direction.beta!r}; the obliquity radical would be imaginary"
        )
    return x2


def obliquity_prefactor(
    idx: ModeIndex,
    direction: DetectorDirection,
    geom: SlitGeometry,
    wavelength: float,
) -> complex:
    """Per-mode bracket i kz + (i k - 1/R) sqrt(cos^2 alpha - sin^2 beta)."""
    x = math.sqrt(_direction_cosine_sq(direction))
    k = TWO_PI / wavelength
    kz = longitudinal_wavenumber(idx, geom, wavelength)
    return 1j * kz + (1j * k - 1.0 / direction.screen_R) * x


@dataclass(frozen=True)
class FarFieldAmplitude:
    """Total far-field amplitude at one detector direction.

    per_slit carries the two un-weighted single-slit amplitudes and is
    present only for a two-slit geometry.
    """

    direction: DetectorDirection
    value: ComplexVec3
    per_slit: tuple[ComplexVec3, ComplexVec3] | None = None


def _scalar_profiles(
    betas,
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    alpha: float,
    screen_R: float,
    variant: ModeVariant,
    slit_indices: tuple[int, ...] = (1, 2),
):
    """Unit-amplitude far-field scalars G_s(beta) for the requested slits.

    The modal coefficients scale linearly with the incident component
    A_j while everything else is component independent, so the vector
    amplitude is A_j * G; computing the scalar once covers x, y, z.

    Returns a dict {slit_index: complex ndarray over betas}.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    k = TWO_PI / wave.wavelength
    a = geom.width_a
    b = geom.length_b

    sel = select_modes(geom, wave.wavelength, trunc)
    mh = 2 * sel.m + 1
    nh = 2 * sel.n + 1

    # n-direction factors are beta independent: fold them into per-m sums.
    qx = k * math.sin(alpha)
    ix = _line_sine_closed(qx, nh, b, 0.0, b)                       # (N,)
    coeff = 16.0 / (math.pi**2 * np.outer(mh, nh))                  # (M, N)
    common = np.where(sel.keep, coeff * np.exp(1j * sel.kz * geom.thickness_c), 0.0)
    s_kz = np.sum(common * (1j * sel.kz) * ix[None, :], axis=1)     # (M,)
    s_u = np.sum(common * ix[None, :], axis=1)                      # (M,)
    m_live = (np.abs(s_kz) > 0.0) | (np.abs(s_u) > 0.0)
    mh_live = mh[m_live]

    sin_b = np.sin(betas)
    x2 = np.cos(alpha) ** 2 - sin_b**2
    if np.any(x2 < 0.0):
        worst = betas[np.argmin(x2)]
        raise DomainError(
            f"sin^2(beta) exceeds cos^2(alpha) at alpha={alpha!r}, beta={worst!r}"
        )
    x_cos = np.sqrt(x2)                                             # (B,)

    qy = k * sin_b                                                  # (B,)
    bracket = s_kz[m_live, None] + (1j * k - 1.0 / screen_R) * x_cos[None, :] * s_u[m_live, None]

    prefactor = -np.exp(1j * k * screen_R) / (4.0 * math.pi * screen_R)

    out = {}
    for slit_index in slit_indices:
        lo, hi = geom.y_interval(slit_index)
        shifted = slit_index == 2 and variant is ModeVariant.SHIFTED
        iy = _line_sine_closed(qy[None, :], mh_live[:, None], a, lo, hi, shifted=shifted)
        out[slit_index] = prefactor * np.sum(bracket * iy, axis=0)
    return out


def slit_amplitude(
    slit_index: int,
    direction: DetectorDirection,
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    variant: ModeVariant = ModeVariant.LITERAL,
) -> ComplexVec3:
    """Far-field amplitude contributed by one slit, unweighted by c1/c2."""
    profiles = _scalar_profiles(
        [direction.beta], geom, wave, trunc,
        direction.alpha, direction.screen_R, variant,
        slit_indices=(slit_index,),
    )
    return ComplexVec3.from_scalar(wave.amplitude, complex(profiles[slit_index][0]))


def total_amplitude(
    direction: DetectorDirection,
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    variant: ModeVariant = ModeVariant.LITERAL,
) -> FarFieldAmplitude:
    """Coherent superposition c1 Phi_1 + c2 Phi_2 (or Phi_1 alone for one slit)."""
    if geom.slit_count == 1:
        profiles = _scalar_profiles(
            [direction.beta], geom, wave, trunc,
            direction.alpha, direction.screen_R, variant, slit_indices=(1,),
        )
        value = ComplexVec3.from_scalar(wave.amplitude, complex(profiles[1][0]))
        return FarFieldAmplitude(direction=direction, value=value, per_slit=None)

    profiles = _scalar_profiles(
        [direction.beta], geom, wave, trunc,
        direction.alpha, direction.screen_R, variant,
    )
    g1 = complex(profiles[1][0])
    g2 = complex(profiles[2][0])
    value = ComplexVec3.from_scalar(wave.amplitude, wave.c1 * g1 + wave.c2 * g2)
    per_slit = (
        ComplexVec3.from_scalar(wave.amplitude, g1),
        ComplexVec3.from_scalar(wave.amplitude, g2),
    )
    return FarFieldAmplitude(direction=direction, value=value, per_slit=per_slit)
