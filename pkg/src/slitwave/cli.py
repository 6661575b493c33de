"""Command-line interface: simulate, validate, fit.

Exit codes: 0 success, 2 configuration error, 3 numerical-validation
failure, 4 I/O or data-file error.
"""

import argparse
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import FitSpec, fit, residuals
from .config import ConfigError, ModeVariant, SlitwaveError, validate
from .io import (
    FullConfig,
    IOFormatError,
    PRESETS,
    RunManifest,
    SweepSettings,
    config_from_dict,
    file_digest,
    load_config,
    read_reference_csv,
    resolved_si_dict,
    write_manifest,
    write_overlay_csv,
    write_pattern_csv,
    write_svg,
)
from .kirchhoff import line_integral_sine
from .observables import evaluate_pattern, sweep
from .oracle import (
    ConvergenceFailure,
    QuadratureSpec,
    kirchhoff_surface_quadrature,
    line_integral_quadrature,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slitwave",
        description="Modal slit-diffraction patterns and two-photon coincidence curves.",
    )
    parser.add_argument("--version", action="version", version=f"slitwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--preset", choices=sorted(PRESETS), help="bundled configuration")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")

    sim = sub.add_parser("simulate", parents=[common], help="sweep a pattern to CSV")
    sim.add_argument("--points", type=int, help="override sample count")
    sim.add_argument("--beta-range", type=float, help="override scan half-range (mrad)")
    sim.add_argument("--slits", type=int, choices=(1, 2), help="override slit count")
    sim.add_argument("--variant", choices=("literal", "shifted"), help="slit-2 integrand variant")
    sim.add_argument("--c1", type=float, help="override superposition weight c1")
    sim.add_argument("--c2", type=float, help="override superposition weight c2")
    sim.add_argument("--svg", action="store_true", help="also write pattern.svg")

    val = sub.add_parser("validate", parents=[common], help="run the oracle cross-checks")
    val.add_argument("--fast", action="store_true", help="reduced grids, same pass criteria")
    val.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    fitp = sub.add_parser("fit", parents=[common], help="calibrate against measured counts")
    fitp.add_argument("reference", type=Path, help="CSV with beta_mrad,counts[,sigma]")
    fitp.add_argument("--free", default="c1,amplitude_scale",
                      help="comma-separated free parameters")
    fitp.add_argument("--target", choices=("singles", "coincidence"), default="coincidence")
    fitp.add_argument("--max-evals", type=int, default=500)
    fitp.add_argument("--tol", type=float, default=1e-7)

    return parser


def _resolve_config(args) -> FullConfig:
    if args.config is not None and args.preset is not None:
        raise ConfigError("give either --config or --preset, not both")
    if args.config is not None:
        full = load_config(args.config)
    else:
        preset = args.preset or "paper_fig4"
        full = config_from_dict(PRESETS[preset])
    return full


def _apply_overrides(full: FullConfig, args) -> FullConfig:
    run, swp, raw = full.run, full.sweep, dict(full.raw)
    geom, wave = run.geometry, run.wave
    if getattr(args, "slits", None) is not None:
        geom = replace(geom, slit_count=args.slits)
        raw["slits"] = args.slits
    if getattr(args, "c1", None) is not None:
        wave = replace(wave, c1=args.c1)
        raw["c1"] = args.c1
    if getattr(args, "c2", None) is not None:
        wave = replace(wave, c2=args.c2)
        raw["c2"] = args.c2
    if getattr(args, "variant", None) is not None:
        run = run.replace(variant=ModeVariant(args.variant))
        raw["variant"] = args.variant
    run = run.replace(geometry=geom, wave=wave)
    if getattr(args, "points", None) is not None:
        swp = SweepSettings(swp.beta_half_range, args.points)
        raw["points"] = args.points
    if getattr(args, "beta_range", None) is not None:
        swp = SweepSettings(args.beta_range * 1e-3, swp.points)
        raw["beta_range_mrad"] = args.beta_range
    return FullConfig(run=run, sweep=swp, raw=raw)


def _check_valid(full: FullConfig) -> None:
    violations = validate(full.run.geometry, full.run.wave, full.run.truncation)
    if violations:
        listing = "; ".join(str(v) for v in violations)
        raise ConfigError(f"invalid configuration: {listing}")
    if full.sweep.points < 2:
        raise ConfigError(f"points must be >= 2, got {full.sweep.points}")


def cmd_simulate(args) -> int:
    full = _apply_overrides(_resolve_config(args), args)
    _check_valid(full)
    args.out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    half = full.sweep.beta_half_range
    series = sweep(-half, half, full.sweep.points, full.run).normalized_copy()
    elapsed = time.perf_counter() - t0

    csv_path = args.out / "pattern.csv"
    write_pattern_csv(csv_path, series)
    outputs = [{"path": csv_path.name, "sha256": file_digest(csv_path),
                "bytes": csv_path.stat().st_size}]
    if args.svg:
        svg_path = args.out / "pattern.svg"
        write_svg(svg_path, series)
        outputs.append({"path": svg_path.name, "sha256": file_digest(svg_path),
                        "bytes": svg_path.stat().st_size})

    from .slitfield import select_modes

    sel = select_modes(full.run.geometry, full.run.wave.wavelength, full.run.truncation)
    manifest = RunManifest(
        command="simulate",
        config_resolved=resolved_si_dict(full),
        config_display=full.raw,
        truncation_used={
            "modes_retained": sel.retained,
            "grid_m": int(sel.m.size),
            "grid_n": int(sel.n.size),
        },
        timing_seconds=elapsed,
        outputs=outputs,
    )
    write_manifest(args.out / "manifest.json", manifest)

    print(f"wrote {csv_path} ({full.sweep.points} rows) in {elapsed:.2f} s")
    print(f"wrote {args.out / 'manifest.json'} ({sel.retained} modes retained)")
    return EXIT_OK


def _validation_checks(full: FullConfig, fast: bool, inject_fault: bool):
    """Yield (name, passed, detail) tuples for the oracle cross-check suite."""
    run = full.run
    geom, wave, trunc = run.geometry, run.wave, run.truncation
    k = 2.0 * math.pi / wave.wavelength
    sign = -1.0 if inject_fault else 1.0

    # closed-form line integrals vs adaptive quadrature
    spec = QuadratureSpec(abs_tol=1e-20, rel_tol=1e-10)
    n_q = 8 if fast else 24
    tol = 1e-9
    worst = 0.0
    a = geom.width_a
    for p in (1, 3, 9):
        kappa = p * math.pi / a
        qs = np.concatenate([
            np.linspace(-2.5 * kappa, 2.5 * kappa, n_q),
            [kappa * (1.0 - 1e-4), kappa * (1.0 + 1e-4), -kappa],
        ])
        for q in qs:
            closed = sign * line_integral_sine(q, p, a, (0.0, a))
            quad = line_integral_quadrature(q, p, a, (0.0, a), spec)
            worst = max(worst, abs(closed - quad) / max(abs(quad), 1e-300))
    yield ("line-integral closed form vs quadrature", worst <= tol,
           f"max rel dev {worst:.2e} (tol {tol:.0e})")

    # far-field closed form vs exact surface integral, single slit
    reduced = replace(trunc, max_m=6, max_n=6)
    geom1 = replace(geom, slit_count=1)
    run1 = run.replace(geometry=geom1, truncation=reduced)
    R = 1e3 * (2 * geom.width_a + geom.separation_d)
    betas = np.linspace(-4e-3, 4e-3, 5 if fast else 9)
    qspec = QuadratureSpec(abs_tol=1e-30, rel_tol=1e-6, max_subdivisions=12,
                           initial_panels_per_wavelength=8)
    closed_mag = _total_mag(betas, run1)
    center = (0.5 * geom.length_b, 0.5 * geom.width_a, geom.thickness_c)
    oracle_mag = []
    for b in betas:
        direction = np.array([0.0, math.sin(b), math.sqrt(1.0 - math.sin(b) ** 2)])
        point = np.array(center) + R * direction
        vec = kirchhoff_surface_quadrature(tuple(point), geom1, wave, reduced, qspec)
        oracle_mag.append(math.sqrt(vec.norm_sq()))
    oracle_mag = np.array(oracle_mag)
    closed_n = closed_mag / closed_mag.max()
    oracle_n = oracle_mag / oracle_mag.max()
    rms = float(np.sqrt(np.mean((closed_n - oracle_n) ** 2)))
    yield ("far-field amplitude vs exact surface quadrature", rms <= 0.01,
           f"RMS dev {rms:.3e} of peak (tol 1e-2), R = {R:.3g} m")

    # parity: even harmonics have no overlap with the uniform incident wave
    spec_parity = QuadratureSpec(abs_tol=1e-16, rel_tol=1e-10)
    even = abs(line_integral_quadrature(0.0, 2, geom.width_a, (0.0, geom.width_a), spec_parity))
    yield ("even-harmonic overlap vanishes", even < 1e-12 * geom.width_a,
           f"residual {even:.2e} m")


def _total_mag(betas, run):
    singles, _ = evaluate_pattern(betas, run)
    return np.sqrt(singles)


def cmd_validate(args) -> int:
    full = _apply_overrides(_resolve_config(args), args)
    _check_valid(full)
    failures = 0
    for name, passed, detail in _validation_checks(full, args.fast, args.inject_fault):
        status = "PASS" if passed else "FAIL"
        print(f"{status}  {name}: {detail}")
        failures += 0 if passed else 1
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return EXIT_VALIDATION
    print("all checks passed")
    return EXIT_OK


def cmd_fit(args) -> int:
    full = _apply_overrides(_resolve_config(args), args)
    _check_valid(full)
    args.out.mkdir(parents=True, exist_ok=True)
    ref = read_reference_csv(args.reference)

    free = tuple(p.strip() for p in args.free.split(",") if p.strip())
    initial = {
        "c1": full.run.wave.c1,
        "amplitude_scale": 1.0,
        "length_b": full.run.geometry.length_b,
        "thickness_c": full.run.geometry.thickness_c,
    }
    spec = FitSpec(free=free, initial=initial, target=args.target,
                   max_evals=args.max_evals, tol=args.tol)
    result = fit(spec, ref, full.run)

    model = ref.counts + result.residuals * (ref.sigma if ref.sigma is not None else 1.0)
    overlay = args.out / "fit_overlay.csv"
    write_overlay_csv(overlay, ref, model)

    print(f"target: {args.target}; free: {', '.join(free)}")
    for name in free:
        print(f"  {name} = {result.params[name]:.9g}")
    if "c1" in result.params and "c2" in result.params:
        print(f"  c2 = {result.params['c2']:.9g} (unit-circle constraint)")
    print(f"rss = {result.rss:.6e} after {result.n_evals} evaluations; "
          f"converged = {result.converged}")
    print(f"wrote {overlay}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"simulate": cmd_simulate, "validate": cmd_validate, "fit": cmd_fit}[args.command]
    try:
        return handler(args)
    except IOFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SlitwaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
