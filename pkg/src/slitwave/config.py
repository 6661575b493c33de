"""Physical parameters, unit conventions and validation.

Everything in this package works in strict SI: meters, radians, rad/m.
Display units (nm, mm, mrad) exist only at the file/CLI layer, see
:mod:`slitwave.io`.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

TWO_PI = 2.0 * math.pi
C_LIGHT = 299_792_458.0  # m/s

# |c1^2 + c2^2 - 1| allowed before validation complains.  Wide enough to
# admit (0.955, 0.298), which misses exact normalization by 8.29e-4.
DEFAULT_NORMALIZATION_TOL = 2e-3


class SlitwaveError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SlitwaveError):
    """Invalid physical configuration or malformed run description."""


class DomainError(SlitwaveError):
    """Evaluation requested outside an operation's domain of validity."""


class ModeVariant(Enum):
    """How the second slit's mode profile enters the far-field integral.

    LITERAL integrates ``sin((2m+1) pi y/a)`` over the offset aperture
    ``[a+d, 2a+d]`` with the sine still referenced to the first slit's
    edge.  SHIFTED re-references the sine to the second aperture's own
    lower edge, making the two slits congruent; the two-slit pattern is
    then exactly mirror symmetric and the slit-2 amplitude is the slit-1
    amplitude times ``exp(-i k sin(beta) (a+d))``.
    """

    LITERAL = "literal"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class SlitGeometry:
    """Rectangular slit(s) in an opaque plate.

    x runs along the slit length ``b``, y across the width ``a``, z
    through the plate thickness.  Slit 1 occupies y in [0, a]; slit 2,
    when present, occupies y in [a+d, 2a+d].
    """

    width_a: float        # slit width along y (m)
    length_b: float       # slit length along x (m)
    thickness_c: float    # plate thickness along z (m)
    separation_d: float = 0.0   # edge-to-edge gap between the slits (m)
    slit_count: int = 1

    def y_interval(self, slit_index: int) -> tuple[float, float]:
        """Aperture [lo, hi] in y for slit 1 or slit 2."""
        if slit_index == 1:
            return 0.0, self.width_a
        if slit_index == 2:
            lo = self.width_a + self.separation_d
            return lo, lo + self.width_a
        raise ConfigError(f"slit_index must be 1 or 2, got {slit_index!r}")

    @property
    def center_separation(self) -> float:
        """Distance between slit centers, a + d."""
        return self.width_a + self.separation_d


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave at normal incidence with a constant real amplitude vector."""

    wavelength: float                        # m
    amplitude: tuple[float, float, float]    # (Ax, Ay, Az), arbitrary units
    c1: float = 1.0                          # superposition weight, slit 1
    c2: float = 0.0                          # superposition weight, slit 2

    @property
    def amplitude_sq(self) -> float:
        ax, ay, az = self.amplitude
        return ax * ax + ay * ay + az * az


@dataclass(frozen=True)
class DetectorDirection:
    """Observation direction on the far-field screen.

    alpha is the angle between the observation ray and the yz-plane,
    beta the angle to the xz-plane; the ray direction is
    (sin alpha, sin beta, sqrt(1 - sin^2 alpha - sin^2 beta)).
    """

    alpha: float     # rad
    beta: float      # rad
    screen_R: float  # screen distance (m)


@dataclass(frozen=True)
class TruncationPolicy:
    """Caps and stopping rules for the modal double series.

    The infinite sum over (m, n) is cut three ways: hard caps max_m and
    max_n, removal of evanescent modes attenuated below
    ``evanescent_floor`` across the plate thickness, and a relative tail
    cut: modes are ranked by |coefficient| x attenuation and the
    smallest are dropped while their summed weight stays below
    ``tail_eps`` times the retained weight.
    """

    max_m: int = 200
    max_n: int = 2000
    tail_eps: float = 1e-4
    evanescent_floor: float = 1e-8


@dataclass(frozen=True)
class Violation:
    """One violated invariant: which field, and why."""

    field_name: str
    message: str

    def __str__(self) -> str:
        return f"{self.field_name}: {self.message}"


@dataclass(frozen=True)
class RunConfig:
    """Everything a pattern evaluation needs, bundled.

    The detector scan direction beta is not part of the bundle; it is
    the independent variable of every sweep.
    """

    geometry: SlitGeometry
    wave: IncidentWave
    truncation: TruncationPolicy
    alpha: float = 0.0
    screen_R: float = 1.0
    variant: ModeVariant = ModeVariant.LITERAL

    def direction(self, beta: float) -> DetectorDirection:
        return DetectorDirection(self.alpha, beta, self.screen_R)

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def wavenumber(wave: IncidentWave) -> float:
    """Free-space wavenumber k = 2 pi / lambda (rad/m)."""
    if not wave.wavelength > 0.0:
        raise ConfigError(f"wavelength must be positive, got {wave.wavelength!r}")
    return TWO_PI / wave.wavelength


def validate(
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    normalization_tol: float = DEFAULT_NORMALIZATION_TOL,
) -> list[Violation]:
    """Check every invariant; an empty list means the configuration is ok.

    Violations are data, not exceptions: callers decide whether to abort.
    The check is pure and idempotent.
    """
    out: list[Violation] = []

    def bad(name, msg):
        out.append(Violation(name, msg))

    if not geom.width_a > 0.0:
        bad("width_a", f"slit width must be > 0, got {geom.width_a!r}")
    if not geom.length_b > 0.0:
        bad("length_b", f"slit length must be > 0, got {geom.length_b!r}")
    if not geom.thickness_c >= 0.0:
        bad("thickness_c", f"plate thickness must be >= 0, got {geom.thickness_c!r}")
    if geom.slit_count not in (1, 2):
        bad("slit_count", f"slit count must be 1 or 2, got {geom.slit_count!r}")
    elif geom.slit_count == 2 and not geom.separation_d >= 0.0:
        bad("separation_d", f"slit separation must be >= 0, got {geom.separation_d!r}")

    if not wave.wavelength > 0.0:
        bad("wavelength", f"wavelength must be > 0, got {wave.wavelength!r}")
    norm = wave.c1 * wave.c1 + wave.c2 * wave.c2
    if abs(norm - 1.0) > normalization_tol:
        bad(
            "normalization",
            f"c1^2 + c2^2 = {norm:.6g} differs from 1 by more than {normalization_tol:g}",
        )

    if not trunc.max_m >= 0:
        bad("max_m", f"mode cap must be >= 0, got {trunc.max_m!r}")
    if not trunc.max_n >= 0:
        bad("max_n", f"mode cap must be >= 0, got {trunc.max_n!r}")
    if not 0.0 < trunc.tail_eps < 1.0:
        bad("tail_eps", f"tail threshold must be in (0, 1), got {trunc.tail_eps!r}")
    if not 0.0 < trunc.evanescent_floor < 1.0:
        bad(
            "evanescent_floor",
            f"attenuation floor must be in (0, 1), got {trunc.evanescent_floor!r}",
        )

    return out
