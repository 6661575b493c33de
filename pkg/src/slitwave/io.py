"""Config files, CSV import/export, SVG plots and the run manifest.

Files speak display units (nm, mm, mrad); everything is converted to SI
at the parse boundary.  CSV numbers are written with 17 significant
digits and a '.' decimal separator regardless of locale, so a written
pattern re-reads to the same doubles.
"""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .calibrate import ReferenceSeries
from .config import (
    ConfigError,
    IncidentWave,
    ModeVariant,
    RunConfig,
    SlitGeometry,
    SlitwaveError,
    TruncationPolicy,
)
from .observables import PatternSeries

PATTERN_HEADER = "beta_mrad,singles,coincidence"
REFERENCE_HEADERS = ("beta_mrad,counts", "beta_mrad,counts,sigma")


class IOFormatError(SlitwaveError):
    """Malformed data file; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# run configuration files

PRESETS: dict[str, dict] = {
    "paper_fig4": {
        "wavelength_nm": 916.0,
        "slit_width_mm": 0.13,
        "slit_separation_mm": 0.4,
        "slit_length_mm": 13.1,
        "thickness_mm": 0.0265,
        "slits": 2,
        "c1": 0.955,
        "c2": 0.298,
        "amplitude": {"ax": 0.896, "ay": 0.896, "az": 0.896},
        "alpha_mrad": 0.0,
        "screen_R_m": 1.0,
        "beta_range_mrad": 5.0,
        "points": 801,
        "truncation": {
            "max_m": 200,
            "max_n": 2000,
            "tail_eps": 1e-4,
            "evanescent_floor": 1e-8,
        },
        "variant": "literal",
    },
}

_TOP_KEYS = {
    "wavelength_nm", "slit_width_mm", "slit_separation_mm", "slit_length_mm",
    "thickness_mm", "slits", "c1", "c2", "amplitude", "alpha_mrad",
    "screen_R_m", "beta_range_mrad", "points", "truncation", "variant",
}
_REQUIRED_KEYS = {"wavelength_nm", "slit_width_mm", "slit_length_mm", "thickness_mm"}


@dataclass(frozen=True)
class SweepSettings:
    """Scan half-range (rad) and sample count for the CLI sweep."""

    beta_half_range: float
    points: int


@dataclass(frozen=True)
class FullConfig:
    run: RunConfig
    sweep: SweepSettings
    raw: dict


def _get_number(raw, key, default=None):
    value = raw.get(key, default)
    if value is None:
        raise ConfigError(f"missing required config key {key!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
    return float(value)


def config_from_dict(raw: dict) -> FullConfig:
    """Build a validated-shape RunConfig bundle from a display-unit dict."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(raw)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")

    geom = SlitGeometry(
        width_a=_get_number(raw, "slit_width_mm") * 1e-3,
        length_b=_get_number(raw, "slit_length_mm") * 1e-3,
        thickness_c=_get_number(raw, "thickness_mm") * 1e-3,
        separation_d=_get_number(raw, "slit_separation_mm", 0.0) * 1e-3,
        slit_count=int(raw.get("slits", 2)),
    )

    amp = raw.get("amplitude", {"ax": 1.0, "ay": 1.0, "az": 1.0})
    if not isinstance(amp, dict) or set(amp) != {"ax", "ay", "az"}:
        raise ConfigError("amplitude must be an object with keys ax, ay, az")
    wave = IncidentWave(
        wavelength=_get_number(raw, "wavelength_nm") * 1e-9,
        amplitude=(float(amp["ax"]), float(amp["ay"]), float(amp["az"])),
        c1=_get_number(raw, "c1", 1.0),
        c2=_get_number(raw, "c2", 0.0),
    )

    trunc_raw = raw.get("truncation", {})
    if not isinstance(trunc_raw, dict):
        raise ConfigError("truncation must be an object")
    defaults = TruncationPolicy()
    unknown = set(trunc_raw) - {"max_m", "max_n", "tail_eps", "evanescent_floor"}
    if unknown:
        raise ConfigError(f"unknown truncation keys: {sorted(unknown)}")
    trunc = TruncationPolicy(
        max_m=int(trunc_raw.get("max_m", defaults.max_m)),
        max_n=int(trunc_raw.get("max_n", defaults.max_n)),
        tail_eps=float(trunc_raw.get("tail_eps", defaults.tail_eps)),
        evanescent_floor=float(trunc_raw.get("evanescent_floor", defaults.evanescent_floor)),
    )

    variant_name = raw.get("variant", "literal")
    try:
        variant = ModeVariant(variant_name)
    except ValueError:
        raise ConfigError(
            f"variant must be 'literal' or 'shifted', got {variant_name!r}"
        ) from None

    run = RunConfig(
        geometry=geom,
        wave=wave,
        truncation=trunc,
        alpha=_get_number(raw, "alpha_mrad", 0.0) * 1e-3,
        screen_R=_get_number(raw, "screen_R_m", 1.0),
        variant=variant,
    )
    sweep = SweepSettings(
        beta_half_range=_get_number(raw, "beta_range_mrad", 5.0) * 1e-3,
        points=int(raw.get("points", 801)),
    )
    if sweep.points < 2:
        raise ConfigError(f"points must be >= 2, got {sweep.points}")
    return FullConfig(run=run, sweep=sweep, raw=dict(raw))


def load_config(path) -> FullConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise IOFormatError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def resolved_si_dict(full: FullConfig) -> dict:
    """SI-resolved view of a configuration, as stored in the manifest."""
    run = full.run
    g, w, t = run.geometry, run.wave, run.truncation
    return {
        "wavelength_m": w.wavelength,
        "amplitude": list(w.amplitude),
        "c1": w.c1,
        "c2": w.c2,
        "width_a_m": g.width_a,
        "length_b_m": g.length_b,
        "thickness_c_m": g.thickness_c,
        "separation_d_m": g.separation_d,
        "slit_count": g.slit_count,
        "alpha_rad": run.alpha,
        "screen_R_m": run.screen_R,
        "variant": run.variant.value,
        "truncation": {
            "max_m": t.max_m,
            "max_n": t.max_n,
            "tail_eps": t.tail_eps,
            "evanescent_floor": t.evanescent_floor,
        },
        "beta_half_range_rad": full.sweep.beta_half_range,
        "points": full.sweep.points,
    }


# ---------------------------------------------------------------------------
# CSV

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_pattern_csv(path, series: PatternSeries) -> None:
    lines = [PATTERN_HEADER]
    beta_mrad = series.beta_grid * 1e3
    for b, s, c in zip(beta_mrad, series.singles, series.coincidence):
        lines.append(f"{_fmt(b)},{_fmt(s)},{_fmt(c)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_pattern_csv(path) -> PatternSeries:
    rows = _read_rows(path, PATTERN_HEADER.split(","), exact_width=True)
    data = np.array(rows, dtype=float)
    return PatternSeries(
        beta_grid=data[:, 0] * 1e-3,
        singles=data[:, 1],
        coincidence=data[:, 2],
    )


def read_reference_csv(path) -> ReferenceSeries:
    """Parse measured counts; errors name the offending 1-based line."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IOFormatError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise IOFormatError("empty reference file", line=1)
    header = lines[0].strip()
    if header not in REFERENCE_HEADERS:
        raise IOFormatError(
            f"header must be one of {REFERENCE_HEADERS}, got {header!r}", line=1,
        )
    width = len(header.split(","))

    beta, counts, sigma = [], [], []
    prev = -math.inf
    for lineno, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        parts = text.split(",")
        if len(parts) != width:
            raise IOFormatError(
                f"expected {width} comma-separated values, got {len(parts)}", line=lineno,
            )
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise IOFormatError(f"unparseable number in {text!r}", line=lineno) from None
        b = values[0] * 1e-3
        if not b > prev:
            raise IOFormatError(
                f"beta_mrad values must be strictly increasing, got {values[0]!r}",
                line=lineno,
            )
        prev = b
        beta.append(b)
        counts.append(values[1])
        if width == 3:
            if not values[2] > 0.0:
                raise IOFormatError(f"sigma must be > 0, got {values[2]!r}", line=lineno)
            sigma.append(values[2])
    if not beta:
        raise IOFormatError("reference file has a header but no data rows", line=2)
    try:
        return ReferenceSeries(
            beta=np.array(beta),
            counts=np.array(counts),
            sigma=np.array(sigma) if sigma else None,
        )
    except ConfigError as exc:
        raise IOFormatError(str(exc)) from exc


def write_reference_csv(path, ref: ReferenceSeries) -> None:
    has_sigma = ref.sigma is not None
    lines = [REFERENCE_HEADERS[1] if has_sigma else REFERENCE_HEADERS[0]]
    for i in range(len(ref)):
        row = [_fmt(ref.beta[i] * 1e3), _fmt(ref.counts[i])]
        if has_sigma:
            row.append(_fmt(ref.sigma[i]))
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_overlay_csv(path, ref: ReferenceSeries, model: np.ndarray) -> None:
    lines = ["beta_mrad,counts,model"]
    for i in range(len(ref)):
        lines.append(f"{_fmt(ref.beta[i] * 1e3)},{_fmt(ref.counts[i])},{_fmt(model[i])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_rows(path, header_fields, exact_width):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IOFormatError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0].strip() != ",".join(header_fields):
        raise IOFormatError(f"expected header {','.join(header_fields)!r}", line=1)
    rows = []
    for lineno, text in enumerate(lines[1:], start=2):
        if not text.strip():
            continue
        parts = text.split(",")
        if exact_width and len(parts) != len(header_fields):
            raise IOFormatError(
                f"expected {len(header_fields)} values, got {len(parts)}", line=lineno,
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise IOFormatError(f"unparseable number in {text!r}", line=lineno) from None
    if not rows:
        raise IOFormatError("no data rows", line=2)
    return rows


# ---------------------------------------------------------------------------
# SVG

_SVG_W, _SVG_H = 960, 540
_MARGIN = {"left": 70, "right": 20, "top": 30, "bottom": 50}
_SERIES_STYLE = (("singles", "#1f77b4"), ("coincidence", "#d62728"))


def write_svg(path, series: PatternSeries, title: str = "slitwave pattern") -> None:
    """Minimal self-contained polyline plot of both pattern columns."""
    x0, x1 = _MARGIN["left"], _SVG_W - _MARGIN["right"]
    y0, y1 = _SVG_H - _MARGIN["bottom"], _MARGIN["top"]
    beta = series.beta_grid * 1e3
    ymax = max(series.singles.max(), series.coincidence.max(), 1e-300)

    def sx(b):
        return x0 + (b - beta[0]) / (beta[-1] - beta[0]) * (x1 - x0)

    def sy(v):
        return y0 + (v / ymax) * (y1 - y0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for i in range(5):
        b = beta[0] + i * (beta[-1] - beta[0]) / 4.0
        parts.append(
            f'<text x="{sx(b):.1f}" y="{y0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{b:.3g}</text>'
        )
        v = i * ymax / 4.0
        parts.append(
            f'<text x="{x0 - 8}" y="{sy(v) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{v:.3g}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.1f}" y="{_SVG_H - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">beta (mrad)</text>'
    )
    for idx, (name, color) in enumerate(_SERIES_STYLE):
        values = getattr(series, name)
        pts = " ".join(f"{sx(b):.2f},{sy(v):.2f}" for b, v in zip(beta, values))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = y1 + 14 + 16 * idx
        parts.append(f'<line x1="{x1 - 130}" y1="{ly}" x2="{x1 - 105}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{x1 - 100}" y="{ly + 4}" font-family="sans-serif" font-size="12">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# manifest

@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run and check its outputs."""

    command: str
    config_resolved: dict
    config_display: dict
    truncation_used: dict
    timing_seconds: float
    outputs: list = field(default_factory=list)
    tool_version: str = __version__
    numpy_version: str = np.__version__
    created_unix: float = field(default_factory=time.time)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def write_manifest(path, manifest: RunManifest) -> None:
    payload = {
        "tool": "slitwave",
        "tool_version": manifest.tool_version,
        "numpy_version": manifest.numpy_version,
        "created_unix": manifest.created_unix,
        "command": manifest.command,
        "config_resolved_si": manifest.config_resolved,
        "config_display": manifest.config_display,
        "truncation_used": manifest.truncation_used,
        "timing_seconds": manifest.timing_seconds,
        "outputs": manifest.outputs,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
