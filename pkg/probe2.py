import math
import time
import numpy as np
from dataclasses import replace
from slitwave import *
from slitwave.observables import sweep, fringe_metrics
from slitwave.config import RunConfig
from slitwave.oracle import QuadratureSpec, kirchhoff_surface_quadrature, line_integral_quadrature

geom = SlitGeometry(0.13e-3, 1.31e-2, 2.65e-5, 0.4e-3, 2)
wave = IncidentWave(916e-9, (0.896, 0.896, 0.896), 0.955, 0.298)
cfg = RunConfig(geometry=geom, wave=wave, truncation=TruncationPolicy())
geom1 = replace(geom, slit_count=1)
cfg1 = cfg.replace(geometry=geom1)

# envelope zero stability vs truncation and thickness
for label, tr, g in [
    ("default", TruncationPolicy(), geom1),
    ("max_m=400,tail 1e-6", TruncationPolicy(max_m=400, max_n=2000, tail_eps=1e-6), geom1),
    ("max_m=150", TruncationPolicy(max_m=150), geom1),
    ("thickness=0", TruncationPolicy(), replace(geom1, thickness_c=0.0)),
]:
    c = cfg.replace(geometry=g, truncation=tr)
    env = sweep(-10e-3, 10e-3, 4001, c)
    fm = fringe_metrics(env, "singles", envelope=env)
    print(f"envelope zero [{label}]: {fm.first_envelope_zero*1e3:.5f} mrad")

# line-integral closed vs quadrature on a 200-point grid, timed
t0 = time.perf_counter()
spec = QuadratureSpec(abs_tol=1e-20, rel_tol=1e-10)
worst = 0.0
a = geom.width_a
npts = 0
for p in (1, 3, 7, 21):
    kappa = p * math.pi / a
    qs = np.concatenate([
        np.geomspace(kappa * 1e-3, kappa * 10, 20),
        -np.geomspace(kappa * 1e-3, kappa * 10, 15),
        kappa * (1 + np.array([-1e-4, -1e-8, 0.0, 1e-8, 1e-4])),
        -kappa * (1 + np.array([-1e-4, 0.0, 1e-4])),
        [0.0],
    ])
    for q in qs:
        closed = line_integral_sine(q, p, a, (0.0, a))
        quad = line_integral_quadrature(q, p, a, (0.0, a), spec)
        rel = abs(closed - quad) / max(abs(quad), 1e-300)
        worst = max(worst, rel)
        npts += 1
t1 = time.perf_counter()
print(f"closed vs quadrature: {npts} points, worst rel {worst:.2e}, {t1-t0:.2f} s")

# shifted interval variant check
closed = line_integral_sine(1.1e4, 3, a, (5.3e-4, 5.3e-4 + a), shifted=True)
quad = line_integral_quadrature(1.1e4, 3, a, (5.3e-4, 5.3e-4 + a), spec, shifted=True)
print(f"shifted variant rel dev: {abs(closed-quad)/abs(quad):.2e}")

# far-field acceptance probe: single slit, R = 1e3*(2a+d), caps (10,10)
t0 = time.perf_counter()
trunc10 = TruncationPolicy(max_m=10, max_n=10)
c10 = cfg1.replace(truncation=trunc10)
R = 1e3 * (2 * geom.width_a + geom.separation_d)
betas = np.linspace(-5e-3, 5e-3, 21)
from slitwave.observables import evaluate_pattern
singles, _ = evaluate_pattern(betas, c10)
closed_mag = np.sqrt(singles)
qspec = QuadratureSpec(abs_tol=1e-30, rel_tol=1e-6, max_subdivisions=10)
center = (0.5 * geom.length_b, 0.5 * geom.width_a, geom.thickness_c)
omag = []
for b in betas:
    d = np.array([0.0, math.sin(b), math.sqrt(1 - math.sin(b) ** 2)])
    P = np.array(center) + R * d
    v = kirchhoff_surface_quadrature(tuple(P), geom1, wave, trunc10, qspec)
    omag.append(math.sqrt(v.norm_sq()))
omag = np.array(omag)
rms = np.sqrt(np.mean((closed_mag / closed_mag.max() - omag / omag.max()) ** 2))
t1 = time.perf_counter()
print(f"far-field single slit R={R:.3g} m: RMS {rms:.4e}, {t1-t0:.1f} s for 21 betas")
