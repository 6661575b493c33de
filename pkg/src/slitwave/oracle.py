"""Independent brute-force checks of the closed-form diffraction paths.

Two integrand families only: the aperture-side line integrals
exp(-i q u) sin(p pi u / L), and the full surface integral propagating
the exit-plane modal field to an observation point with the exact
spherical kernel exp(i k r)/r (no far-field substitutions).  Neither
path calls the closed-form evaluators it is meant to validate; only the
modal field itself is shared.

Adaptive quadrature on oscillatory integrands diverges quietly when the
initial mesh undersamples the phase, so every integral here starts from
a density floor of ``initial_panels_per_wavelength`` panels per
oscillation period before any halving takes place.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import (
    ConfigError,
    DomainError,
    IncidentWave,
    ModeVariant,
    SlitGeometry,
    SlitwaveError,
    TruncationPolicy,
    TWO_PI,
)
from .slitfield import ComplexVec3, select_modes, sin_pi


@dataclass(frozen=True)
class QuadratureSpec:
    """Error control for the oracle integrators.

    abs_tol and rel_tol bound the final error estimate (whichever is
    looser wins); max_subdivisions caps panel-halving generations;
    initial_panels_per_wavelength sets the oscillation-aware density
    floor of the starting mesh.
    """

    abs_tol: float = 1e-18
    rel_tol: float = 1e-11
    max_subdivisions: int = 28
    initial_panels_per_wavelength: int = 8

    def __post_init__(self):
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise ConfigError("quadrature tolerances must be positive")
        if self.initial_panels_per_wavelength < 4:
            raise ConfigError("initial_panels_per_wavelength must be >= 4")
        if self.max_subdivisions < 1:
            raise ConfigError("max_subdivisions must be >= 1")


class ConvergenceFailure(SlitwaveError):
    """Quadrature ran out of subdivisions; carries its best estimate."""

    def __init__(self, message: str, estimate: complex, error_bound: float):
        super().__init__(f"{message} (best estimate {estimate!r}, error bound {error_bound:.3e})")
        self.estimate = estimate
        self.error_bound = error_bound


_EPS = float(np.finfo(float).eps)
_MAX_ACTIVE_PANELS = 2_000_000


def _adaptive_simpson(f, a, b, spec: QuadratureSpec, min_panels: int):
    """Panel-halving Simpson with Richardson error estimates.

    f maps an ndarray of abscissae to complex values.  Each panel keeps
    its coarse Simpson value; the refinement compares it against the
    two-half value, accepts the panel when |S2 - S1|/15 fits its share
    of the global budget (apportioned by width), and splits it
    otherwise.  Two guards keep cancellation-heavy integrands from
    splitting forever: a panel whose error estimate is already at the
    rounding noise of the sampled magnitudes is accepted as converged,
    and the whole integral is accepted as soon as the summed error
    estimate meets the global tolerance.  Returns (value, error_bound).
    """
    n0 = max(4, int(min_panels))
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    flo, fmid, fhi = f(lo), f(mid), f(hi)
    s1 = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    width_total = float(b - a)
    f_scale = float(max(np.abs(flo).max(), np.abs(fmid).max(), np.abs(fhi).max(), 1e-300))
    acc_value = 0.0 + 0.0j
    acc_err = 0.0
    err_sum = math.inf

    for _ in range(spec.max_subdivisions):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        f_scale = float(max(f_scale, np.abs(flm).max(), np.abs(frm).max()))
        s_left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        s_right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        s2 = s_left + s_right
        err = np.abs(s2 - s1) / 15.0
        richardson = s2 + (s2 - s1) / 15.0

        global_est = acc_value + richardson.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(global_est))
        err_sum = acc_err + float(err.sum())
        if err_sum <= tol:
            return global_est, err_sum

        width = hi - lo
        noise = 16.0 * _EPS * f_scale * width
        ok = (err <= tol * width / width_total) | (err <= noise)

        acc_value += richardson[ok].sum()
        acc_err += float(err[ok].sum())
        if bool(np.all(ok)):
            return acc_value, acc_err

        split = ~ok
        if 2 * int(split.sum()) > _MAX_ACTIVE_PANELS:
            break
        lo, hi, mid = (
            np.concatenate([lo[split], mid[split]]),
            np.concatenate([mid[split], hi[split]]),
            np.concatenate([lm[split], rm[split]]),
        )
        flo, fhi, fmid, s1 = (
            np.concatenate([flo[split], fmid[split]]),
            np.concatenate([fmid[split], fhi[split]]),
            np.concatenate([flm[split], frm[split]]),
            np.concatenate([s_left[split], s_right[split]]),
        )

    raise ConvergenceFailure(
        f"adaptive Simpson ran out of subdivisions with {lo.size} panels still open",
        estimate=acc_value + s1.sum(),
        error_bound=err_sum,
    )


def line_integral_quadrature(
    q: float,
    p: int,
    L: float,
    interval: tuple[float, float],
    spec: QuadratureSpec | None = None,
    shifted: bool = False,
    full_output: bool = False,
):
    """Adaptive quadrature of exp(-i q u) sin(p pi (u - u_ref)/L) over [u0, u1].

    The starting mesh resolves max(|q|, p pi / L) at the configured
    panels-per-period density.  Raises ConvergenceFailure with the best
    estimate when the subdivision budget runs out.
    """
    spec = spec or QuadratureSpec()
    u0, u1 = interval
    if not L > 0.0:
        raise DomainError(f"mode length L must be positive, got {L!r}")
    if not u1 > u0:
        raise DomainError(f"interval must be increasing, got [{u0!r}, {u1!r}]")
    u_ref = u0 if shifted else 0.0

    def f(u):
        return np.exp(-1j * q * u) * sin_pi(p * ((u - u_ref) / L))

    oscillation = max(abs(q), p * math.pi / L)
    periods = oscillation * (u1 - u0) / TWO_PI
    min_panels = max(8, math.ceil(spec.initial_panels_per_wavelength * periods))
    value, err = _adaptive_simpson(f, u0, u1, spec, min_panels)
    return (value, err) if full_output else value


def _simpson_weights(n_panels: int, a: float, b: float) -> np.ndarray:
    """Composite Simpson weights on n_panels (even) uniform panels."""
    h = (b - a) / n_panels
    w = np.full(n_panels + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _exit_plane_field(xs, ys, geom, wave, trunc, slit_index, variant):
    """Modal field and its z derivative on the exit plane z = c.

    xs and ys are 1-D; the return values are (len(xs), len(ys)) grids at
    unit incident amplitude (the Cartesian components share this scalar
    shape).  The gradient is termwise analytic: each mode differentiates
    to i kz times itself.  For the second slit the LITERAL variant keeps
    the sine referenced to the first slit's edge, the SHIFTED variant to
    the aperture's own edge.
    """
    sel = select_modes(geom, wave.wavelength, trunc)
    mh = 2 * sel.m + 1
    nh = 2 * sel.n + 1
    coeff = 16.0 / (math.pi**2 * np.outer(mh, nh))
    c_grid = np.where(sel.keep, coeff * np.exp(1j * sel.kz * geom.thickness_c), 0.0)

    lo, _ = geom.y_interval(slit_index)
    y_ref = lo if (slit_index == 2 and variant is ModeVariant.SHIFTED) else 0.0

    sx = sin_pi(np.multiply.outer(np.asarray(xs, float) / geom.length_b, nh))          # (X, N)
    sy = sin_pi(np.multiply.outer((np.asarray(ys, float) - y_ref) / geom.width_a, mh))  # (Y, M)

    psi = sx @ c_grid.T @ sy.T
    dpsi = sx @ (c_grid * (1j * sel.kz)).T @ sy.T
    return psi, dpsi


def _kernel(px, py, pz, xg, yg, z_plane, k):
    dx = px - xg
    dy = py - yg
    dz = pz - z_plane
    r = np.sqrt(dx * dx + dy * dy + dz * dz)
    return np.exp(1j * k * r) / r, (1j * k - 1.0 / r) * dz / r


def _aperture_oscillation_panels(px, py, pz, geom, slit_index, k, max_mh, max_nh, per_wavelength):
    """Oscillation-aware starting panel counts (even) for one aperture."""
    lo, hi = geom.y_interval(slit_index)
    xs = np.linspace(0.0, geom.length_b, 33)
    ys = np.linspace(lo, hi, 33)
    dz = pz - geom.thickness_c
    r_x = np.sqrt((px - xs) ** 2 + (py - 0.5 * (lo + hi)) ** 2 + dz * dz)
    r_y = np.sqrt((px - 0.5 * geom.length_b) ** 2 + (py - ys) ** 2 + dz * dz)
    periods_x = k * (r_x.max() - r_x.min()) / TWO_PI + 0.5 * max_nh + 1.0
    periods_y = k * (r_y.max() - r_y.min()) / TWO_PI + 0.5 * max_mh + 1.0
    nx = 2 * math.ceil(per_wavelength * periods_x / 2.0)
    ny = 2 * math.ceil(per_wavelength * periods_y / 2.0)
    return max(nx, 8), max(ny, 8)


def _surface_scalar_tensor(P, geom, wave, trunc, slit_index, variant, spec):
    """One aperture's exact-kernel surface integral by refining tensor Simpson."""
    px, py, pz = P
    k = TWO_PI / wave.wavelength
    lo, hi = geom.y_interval(slit_index)
    sel = select_modes(geom, wave.wavelength, trunc)
    kept_m = 2 * sel.m[sel.keep.any(axis=1)] + 1
    kept_n = 2 * sel.n[sel.keep.any(axis=0)] + 1
    nx, ny = _aperture_oscillation_panels(
        px, py, pz, geom, slit_index, k,
        int(kept_m.max()), int(kept_n.max()),
        spec.initial_panels_per_wavelength,
    )

    prev = None
    value = math.nan + 0.0j
    err = math.inf
    for _ in range(spec.max_subdivisions):
        if (nx + 1) * (ny + 1) > _MAX_SURFACE_POINTS:
            raise ConvergenceFailure(
                f"surface grid {nx}x{ny} exceeds the memory guard; move the "
                f"observation point farther out or relax the tolerances",
                estimate=value,
                error_bound=err,
            )
        xs = np.linspace(0.0, geom.length_b, nx + 1)
        ys = np.linspace(lo, hi, ny + 1)
        wx = _simpson_weights(nx, 0.0, geom.length_b)
        wy = _simpson_weights(ny, lo, hi)

        psi, dpsi = _exit_plane_field(xs, ys, geom, wave, trunc, slit_index, variant)
        green, obliq = _kernel(px, py, pz, xs[:, None], ys[None, :], geom.thickness_c, k)
        integrand = green * (dpsi + obliq * psi)
        value = complex(np.einsum("i,ij,j->", wx, integrand, wy))

        if prev is not None:
            err = abs(value - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(value)):
                return value, err
        prev = value
        nx *= 2
        ny *= 2

    raise ConvergenceFailure(
        f"surface quadrature failed to settle within {spec.max_subdivisions} refinements",
        estimate=value,
        error_bound=err,
    )


def kirchhoff_surface_quadrature(
    P: tuple[float, float, float],
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    spec: QuadratureSpec | None = None,
    variant: ModeVariant = ModeVariant.LITERAL,
    full_output: bool = False,
):
    """Exact-kernel surface integral of the exit field to the point P.

    No far-field approximations: the kernel uses the true distance
    r = |P - r'| with the surface normal z-hat, integrating
    exp(i k r)/r * [dpsi/dz + (i k - 1/r)(dz/r) psi] over the exit
    aperture(s) at z = c and applying -1/(4 pi) plus, for a two-slit
    geometry, the (c1, c2) superposition weights.  P must lie strictly
    beyond the exit plane.
    """
    spec = spec or QuadratureSpec()
    px, py, pz = (float(v) for v in P)
    if not pz > geom.thickness_c:
        raise DomainError(
            f"observation point z={pz!r} must lie strictly beyond the exit plane "
            f"z={geom.thickness_c!r}"
        )

    if geom.slit_count == 1:
        pieces = {1: 1.0}
    else:
        pieces = {1: wave.c1, 2: wave.c2}

    scalar = 0.0 + 0.0j
    err_total = 0.0
    for slit_index, weight in pieces.items():
        value, err = _surface_scalar_tensor(
            (px, py, pz), geom, wave, trunc, slit_index, variant, spec,
        )
        scalar += weight * value
        err_total += abs(weight) * err

    scalar *= -1.0 / (4.0 * math.pi)
    vec = ComplexVec3.from_scalar(wave.amplitude, scalar)
    return (vec, err_total / (4.0 * math.pi)) if full_output else vec


def kirchhoff_surface_quadrature_nested(
    P: tuple[float, float, float],
    geom: SlitGeometry,
    wave: IncidentWave,
    trunc: TruncationPolicy,
    spec: QuadratureSpec | None = None,
    variant: ModeVariant = ModeVariant.LITERAL,
) -> ComplexVec3:
    """Slow cross-check of the tensor integrator: iterated 1-D quadratures.

    The outer adaptive pass runs along x; its integrand is itself an
    adaptive 1-D quadrature along y at that fixed x.  Exercises a
    disjoint composition of the same panel machinery, which is the
    point; keep the mode count small.
    """
    spec = spec or QuadratureSpec()
    px, py, pz = (float(v) for v in P)
    if not pz > geom.thickness_c:
        raise DomainError("observation point must lie strictly beyond the exit plane")

    k = TWO_PI / wave.wavelength
    if geom.slit_count == 1:
        pieces = {1: 1.0}
    else:
        pieces = {1: wave.c1, 2: wave.c2}

    scalar = 0.0 + 0.0j
    for slit_index, weight in pieces.items():
        lo, hi = geom.y_interval(slit_index)
        sel = select_modes(geom, wave.wavelength, trunc)
        max_mh = int((2 * sel.m[sel.keep.any(axis=1)] + 1).max())
        max_nh = int((2 * sel.n[sel.keep.any(axis=0)] + 1).max())
        nx0, ny0 = _aperture_oscillation_panels(
            px, py, pz, geom, slit_index, k, max_mh, max_nh,
            spec.initial_panels_per_wavelength,
        )

        def inner(x):
            def fy(y):
                psi, dpsi = _exit_plane_field(
                    np.array([x]), y, geom, wave, trunc, slit_index, variant,
                )
                green, obliq = _kernel(px, py, pz, x, y, geom.thickness_c, k)
                return green * (dpsi[0] + obliq * psi[0])

            value, _ = _adaptive_simpson(fy, lo, hi, spec, ny0)
            return value

        def fx(xs):
            return np.array([inner(float(x)) for x in np.atleast_1d(xs)])

        value, _ = _adaptive_simpson(fx, 0.0, geom.length_b, spec, nx0)
        scalar += weight * value

    scalar *= -1.0 / (4.0 * math.pi)
    return ComplexVec3.from_scalar(wave.amplitude, scalar)
