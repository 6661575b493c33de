"""Modal slit-diffraction engine with two-photon coincidence patterns."""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    DetectorDirection,
    DomainError,
    IncidentWave,
    ModeVariant,
    RunConfig,
    SlitGeometry,
    SlitwaveError,
    TruncationPolicy,
    Violation,
    validate,
    wavenumber,
)
from .slitfield import (
    ComplexVec3,
    ModeIndex,
    longitudinal_wavenumber,
    mode_coefficient,
    slit_wavefunction,
    slit_wavefunction_infinite_length,
)
from .kirchhoff import (
    FarFieldAmplitude,
    line_integral_sine,
    obliquity_prefactor,
    slit_amplitude,
    total_amplitude,
)
from .observables import (
    FringeMetrics,
    PatternSeries,
    coincidence_intensity,
    coincidence_pair,
    fringe_metrics,
    singles_intensity,
    sweep,
)
from .oracle import (
    ConvergenceFailure,
    QuadratureSpec,
    kirchhoff_surface_quadrature,
    line_integral_quadrature,
)
from .calibrate import FitResult, FitSpec, ReferenceSeries, fit, residuals

__all__ = [
    "ComplexVec3",
    "ConfigError",
    "ConvergenceFailure",
    "DetectorDirection",
    "DomainError",
    "FarFieldAmplitude",
    "FitResult",
    "FitSpec",
    "FringeMetrics",
    "IncidentWave",
    "ModeIndex",
    "ModeVariant",
    "PatternSeries",
    "QuadratureSpec",
    "ReferenceSeries",
    "RunConfig",
    "SlitGeometry",
    "SlitwaveError",
    "TruncationPolicy",
    "Violation",
    "coincidence_intensity",
    "coincidence_pair",
    "fit",
    "fringe_metrics",
    "kirchhoff_surface_quadrature",
    "line_integral_quadrature",
    "line_integral_sine",
    "longitudinal_wavenumber",
    "mode_coefficient",
    "obliquity_prefactor",
    "residuals",
    "singles_intensity",
    "slit_amplitude",
    "slit_wavefunction",
    "slit_wavefunction_infinite_length",
    "sweep",
    "total_amplitude",
    "validate",
    "wavenumber",
]
