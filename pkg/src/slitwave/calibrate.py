"""Least-squares calibration of the model's free parameters.

The measured counts carry an unknown overall scale, so the model is the
peak-normalized pattern times a free amplitude_scale; the superposition
weights are constrained to the unit circle (c2 = sqrt(1 - c1^2)) even
though published values may miss it slightly.  Minimization is a
derivative-free Nelder-Mead simplex with bound clamping and one
deterministic restart from the best point; identical inputs always
reproduce identical results bit for bit.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, RunConfig
from .observables import evaluate_pattern

PARAM_ORDER = ("c1", "amplitude_scale", "length_b", "thickness_c")

DEFAULT_BOUNDS = {
    "c1": (1e-3, 1.0 - 1e-9),
    "amplitude_scale": (1e-6, 1e6),
    "length_b": (1e-6, 1.0),
    "thickness_c": (0.0, 1e-2),
}


@dataclass(frozen=True, eq=False)
class ReferenceSeries:
    """Digitized measured counts on a strictly increasing angle grid."""

    beta: np.ndarray
    counts: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if beta.ndim != 1 or beta.shape != counts.shape:
            raise ConfigError("beta and counts must be equal-length 1-D arrays")
        if beta.size >= 2 and not np.all(np.diff(beta) > 0.0):
            raise ConfigError("reference beta grid must be strictly increasing")
        if np.any(counts < 0.0):
            raise ConfigError("reference counts must be >= 0")
        sigma = self.sigma
        if sigma is not None:
            sigma = np.asarray(sigma, dtype=float)
            if sigma.shape != beta.shape:
                raise ConfigError("sigma must match the beta grid length")
            if not np.all(sigma > 0.0):
                raise ConfigError("sigma values must be > 0")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "sigma", sigma)

    def __len__(self) -> int:
        return self.beta.size


@dataclass(frozen=True)
class FitSpec:
    """Which parameters move, where they start, and when to stop."""

    free: tuple[str, ...]
    initial: dict
    bounds: dict | None = None
    target: str = "singles"
    max_evals: int = 500
    tol: float = 1e-7

    def __post_init__(self):
        unknown = [p for p in self.free if p not in PARAM_ORDER]
        if unknown:
            raise ConfigError(f"unknown fit parameters {unknown}; choose from {PARAM_ORDER}")
        if self.target not in ("singles", "coincidence"):
            raise ConfigError(f"target must be 'singles' or 'coincidence', got {self.target!r}")
        if self.max_evals < 1:
            raise ConfigError("max_evals must be >= 1")
        if not self.tol > 0.0:
            raise ConfigError("tol must be > 0")
        bounds = dict(DEFAULT_BOUNDS)
        bounds.update(self.bounds or {})
        object.__setattr__(self, "bounds", bounds)
        for name in self.free:
            if name not in self.initial:
                raise ConfigError(f"free parameter {name!r} needs an initial value")
            lo, hi = bounds[name]
            v = self.initial[name]
            if not lo <= v <= hi:
                raise ConfigError(f"initial {name}={v!r} outside bounds [{lo}, {hi}]")
        if "c1" in self.free:
            c1 = self.initial["c1"]
            if not 0.0 < c1 < 1.0:
                raise ConfigError(f"free c1 must start inside (0, 1), got {c1!r}")


@dataclass(frozen=True, eq=False)
class FitResult:
    params: dict
    rss: float
    n_evals: int
    converged: bool
    residuals: np.ndarray
    rss_trace: tuple[float, ...]


def _configure(params: dict, cfg: RunConfig) -> tuple[RunConfig, float]:
    """Apply a parameter dict to the run configuration.

    c1 drags c2 along the unit-circle constraint; geometric parameters
    replace their counterparts; amplitude_scale is returned separately
    (it multiplies the normalized model, not the field).
    """
    wave = cfg.wave
    geom = cfg.geometry
    if "c1" in params:
        c1 = float(params["c1"])
        wave = replace(wave, c1=c1, c2=math.sqrt(max(0.0, 1.0 - c1 * c1)))
    if "length_b" in params:
        geom = replace(geom, length_b=float(params["length_b"]))
    if "thickness_c" in params:
        geom = replace(geom, thickness_c=float(params["thickness_c"]))
    scale = float(params.get("amplitude_scale", 1.0))
    return cfg.replace(wave=wave, geometry=geom), scale


def _model_counts(params: dict, ref: ReferenceSeries, cfg: RunConfig, target: str) -> np.ndarray:
    cfg2, scale = _configure(params, cfg)
    singles, coincidence = evaluate_pattern(ref.beta, cfg2)
    col = singles if target == "singles" else coincidence
    peak = col.max()
    if peak <= 0.0:
        raise ConfigError("model pattern is identically zero over the reference grid")
    return scale * col / peak


def residuals(
    params: dict,
    ref: ReferenceSeries,
    cfg: RunConfig,
    target: str = "singles",
) -> np.ndarray:
    """(model - counts)/sigma at exactly the reference angles (sigma 1 if absent)."""
    model = _model_counts(params, ref, cfg, target)
    sigma = ref.sigma if ref.sigma is not None else 1.0
    return (model - ref.counts) / sigma


def _nelder_mead(objective, x0, steps, lo, hi, tol, budget):
    """Clamped Nelder-Mead on a box; returns (best_x, best_f, spread).

    Standard reflection/expansion/contraction/shrink coefficients.
    ``budget`` is a shared mutable [remaining_evals]; the loop stops when
    either the relative simplex spread drops below tol or the budget
    runs dry.  Fully deterministic.
    """
    ndim = x0.size
    width = np.where(hi > lo, hi - lo, 1.0)

    def clamp(x):
        return np.minimum(np.maximum(x, lo), hi)

    def ev(x):
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        return objective(x)

    simplex = [clamp(x0)]
    for i in range(ndim):
        v = x0.copy()
        v[i] = v[i] + steps[i]
        simplex.append(clamp(v))
    simplex = np.array(simplex)
    values = []
    for v in simplex:
        f = ev(v)
        if f is None:
            return simplex[0], math.inf, math.inf
        values.append(f)
    values = np.array(values)

    while True:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        spread = float(np.max(np.abs(simplex[1:] - simplex[0]) / width))
        if spread < tol or budget[0] <= 0:
            return simplex[0], float(values[0]), spread

        centroid = simplex[:-1].mean(axis=0)
        xr = clamp(centroid + (centroid - simplex[-1]))
        fr = ev(xr)
        if fr is None:
            return simplex[0], float(values[0]), spread

        if fr < values[0]:
            xe = clamp(centroid + 2.0 * (centroid - simplex[-1]))
            fe = ev(xe)
            if fe is not None and fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            inside = fr >= values[-1]
            xc = clamp(centroid + 0.5 * ((simplex[-1] if inside else xr) - centroid))
            fc = ev(xc)
            if fc is None:
                return simplex[0], float(values[0]), spread
            if fc < min(values[-1], fr):
                simplex[-1], values[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, ndim + 1):
                    simplex[i] = clamp(simplex[0] + 0.5 * (simplex[i] - simplex[0]))
                    f = ev(simplex[i])
                    if f is None:
                        return simplex[0], float(values[0]), math.inf
                    values[i] = f


def fit(spec: FitSpec, ref: ReferenceSeries, cfg: RunConfig) -> FitResult:
    """Minimize the residual sum of squares over the free parameters.

    Two simplex descents: one from the initial point, then a restart
    from the best point with a tighter initial step.  The evaluation
    budget spans both.  With an empty free set the initial parameters
    are evaluated once and returned as converged.
    """
    free = tuple(p for p in PARAM_ORDER if p in spec.free)
    fixed = {k: float(v) for k, v in spec.initial.items()}

    trace: list[float] = []
    best_rss = [math.inf]

    def objective(x) -> float:
        params = dict(fixed)
        params.update(zip(free, x))
        r = residuals(params, ref, cfg, spec.target)
        rss = float(np.dot(r, r))
        best_rss[0] = min(best_rss[0], rss)
        trace.append(best_rss[0])
        return rss

    if not free:
        r = residuals(fixed, ref, cfg, spec.target)
        rss = float(np.dot(r, r))
        return FitResult(
            params=dict(fixed), rss=rss, n_evals=1, converged=True,
            residuals=r, rss_trace=(rss,),
        )

    lo = np.array([spec.bounds[p][0] for p in free])
    hi = np.array([spec.bounds[p][1] for p in free])
    x0 = np.array([spec.initial[p] for p in free])
    steps = 0.05 * (hi - lo)
    steps = np.where(steps > 0.0, steps, 1e-3)
    # keep the first simplex inside the box
    steps = np.where(x0 + steps > hi, -steps, steps)

    budget = [spec.max_evals]
    x_best, f_best, _ = _nelder_mead(objective, x0, steps, lo, hi, spec.tol, budget)
    x_best2, f_best2, spread = _nelder_mead(
        objective, x_best, 0.25 * steps, lo, hi, spec.tol, budget,
    )
    if f_best2 <= f_best:
        x_best, f_best = x_best2, f_best2

    params = dict(fixed)
    params.update(zip(free, x_best))
    if "c1" in params:
        c1 = float(params["c1"])
        params["c2"] = math.sqrt(max(0.0, 1.0 - c1 * c1))
    final_res = residuals(params, ref, cfg, spec.target)
    n_evals = spec.max_evals - budget[0]
    return FitResult(
        params=params,
        rss=f_best,
        n_evals=n_evals,
        converged=bool(spread < spec.tol),
        residuals=final_res,
        rss_trace=tuple(trace),
    )
