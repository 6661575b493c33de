import math
import time
import numpy as np
from dataclasses import replace
from slitwave import *
from slitwave.observables import evaluate_pattern, sweep
from slitwave.config import RunConfig
from slitwave.calibrate import FitSpec, ReferenceSeries, fit, residuals

geom = SlitGeometry(0.13e-3, 1.31e-2, 2.65e-5, 0.4e-3, 2)
wave = IncidentWave(916e-9, (0.896, 0.896, 0.896), 0.955, 0.298)
trunc = TruncationPolicy()
cfg = RunConfig(geometry=geom, wave=wave, truncation=trunc)

# --- FD Helmholtz residual ratio when h halves
k = wavenumber(wave)
small = TruncationPolicy(max_m=4, max_n=4)
rng = np.random.default_rng(7)

def field(x, y, z):
    return slit_wavefunction(x, y, z, 0.0, 1, geom, wave, small).x

def fd_residual(x, y, z, h):
    lap = (
        field(x + h, y, z) + field(x - h, y, z)
        + field(x, y + h, z) + field(x, y - h, z)
        + field(x, y, z + h) + field(x, y, z - h)
        - 6.0 * field(x, y, z)
    ) / (h * h)
    return abs(lap + k * k * field(x, y, z))

h0 = 2e-3 / k
ratios = []
for _ in range(20):
    x = rng.uniform(0.2, 0.8) * geom.length_b
    y = rng.uniform(0.2, 0.8) * geom.width_a
    z = rng.uniform(0.3, 0.7) * geom.thickness_c
    if abs(field(x, y, z)) < 0.3:
        continue
    r1 = fd_residual(x, y, z, h0)
    r2 = fd_residual(x, y, z, h0 / 2)
    ratios.append(r1 / r2)
ratios = np.array(ratios)
print(f"FD ratio: n={ratios.size} min={ratios.min():.3f} max={ratios.max():.3f} median={np.median(ratios):.3f}")

# --- center-point partial sums decreasing
for cut in (10, 50, 250, 1000, 2000):
    tr = TruncationPolicy(max_m=cut, max_n=cut, tail_eps=1e-15, evanescent_floor=1e-300)
    v = slit_wavefunction(geom.length_b / 2, geom.width_a / 2, 0.0, 0.0, 1, geom, wave, tr).x
    print(f"cut={cut}: |partial - A| = {abs(v - 0.896):.6e}")

# --- slit-2 translation
tr = TruncationPolicy(max_m=30, max_n=30)
u = 0.3 * geom.width_a
f1 = slit_wavefunction(1e-3, u, 1e-5, 0.0, 1, geom, wave, tr)
f2 = slit_wavefunction(1e-3, geom.width_a + geom.separation_d + u, 1e-5, 0.0, 2, geom, wave, tr)
print(f"translation rel dev: {abs(f1.x - f2.x) / abs(f1.x):.2e}")

# --- finite-b vs infinite-b at x=b/2
trn = TruncationPolicy(max_m=150, max_n=8000, tail_eps=1e-15, evanescent_floor=1e-12)
y, z = 0.37 * geom.width_a, 0.8 * geom.thickness_c
t0 = time.perf_counter()
vfin = slit_wavefunction(geom.length_b / 2, y, z, 0.0, 1, geom, wave, trn)
vinf = slit_wavefunction_infinite_length(y, z, 0.0, geom, wave, TruncationPolicy(max_m=150))
t1 = time.perf_counter()
print(f"finite vs infinite-b: rel dev {abs(vfin.x - vinf.x)/abs(vinf.x):.4e} ({t1-t0:.1f} s)")

# --- acceptance 6 grids: shifted symmetric at 1e-10, 801 pts
cfg_sh = cfg.replace(variant=ModeVariant.SHIFTED)
ns = sweep(-5e-3, 5e-3, 801, cfg_sh).normalized_copy()
print(f"shifted sym: singles {np.abs(ns.singles - ns.singles[::-1]).max():.2e} "
      f"coinc {np.abs(ns.coincidence - ns.coincidence[::-1]).max():.2e}")

# --- R doubling / A halving invariance
base = sweep(-3e-3, 3e-3, 301, cfg).normalized_copy()
r2 = sweep(-3e-3, 3e-3, 301, cfg.replace(screen_R=2.0)).normalized_copy()
ah = sweep(-3e-3, 3e-3, 301, cfg.replace(wave=replace(wave, amplitude=(0.448, 0.448, 0.448)))).normalized_copy()
print(f"R doubled: max dev {np.abs(base.singles - r2.singles).max():.2e}")
print(f"A halved: max dev {np.abs(base.singles - ah.singles).max():.2e}")

# --- destructive fringe (shifted, balanced)
bstar = math.asin(math.pi / (k * geom.center_separation))
wb = replace(wave, c1=1/math.sqrt(2), c2=1/math.sqrt(2))
amp = total_amplitude(DetectorDirection(0.0, bstar, 1.0), geom, wb, trunc, ModeVariant.SHIFTED)
a1 = amp.per_slit[0]
print(f"destructive: |total|/|phi1| = {math.sqrt(amp.value.norm_sq()/a1.norm_sq()):.2e}")

# --- calibration round trip
t0 = time.perf_counter()
tr_fit = TruncationPolicy(max_m=60, max_n=400)
cfg_fit = cfg.replace(truncation=tr_fit)
betas = np.linspace(-4e-3, 4e-3, 161)
singles, _ = evaluate_pattern(betas, cfg_fit)
ref = ReferenceSeries(beta=betas, counts=singles / singles.max())
spec = FitSpec(free=("c1", "amplitude_scale"),
               initial={"c1": 0.80, "amplitude_scale": 0.7,
                        "length_b": geom.length_b, "thickness_c": geom.thickness_c})
res = fit(spec, ref, cfg_fit.replace(wave=replace(wave, c1=0.80, c2=math.sqrt(1-0.64))))
t1 = time.perf_counter()
print(f"fit: c1={res.params['c1']:.6f} scale={res.params['amplitude_scale']:.6f} "
      f"evals={res.n_evals} conv={res.converged} rss={res.rss:.3e} ({t1-t0:.1f} s)")
print(f"  |c1 - 0.955| = {abs(res.params['c1'] - 0.955):.2e}")

# --- noisy round trip
rng = np.random.default_rng(123)
noisy = singles / singles.max() + rng.normal(0.0, 0.02, singles.size)
ref2 = ReferenceSeries(beta=betas, counts=np.maximum(noisy, 0.0))
res2 = fit(spec, ref2, cfg_fit)
print(f"noisy fit: c1={res2.params['c1']:.4f} (|dev| {abs(res2.params['c1']-0.955):.3f})")
