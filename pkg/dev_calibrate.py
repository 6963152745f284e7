"""Dev-only: stress the batch kernels against mpmath references."""
import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp

from gfbm import _batchquad as bq

mp.mp.dps = 40


def ref_G(alpha, gamma, rho):
    # Euler integral: G = B(1-g, 1+a) * 2F1(-a, 1-g; 2+a-g; rho)
    a, g, r = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(rho)
    return mp.beta(1 - g, 1 + a) * mp.hyp2f1(-a, 1 - g, 2 + a - g, r)


def ref_K(alpha, gamma, x):
    a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
    f = lambda v: ((xr + v) ** a - v**a) * ((1 + v) ** a - v**a) * v**-g
    return mp.quad(f, [0, xr, 1, mp.inf])


def ref_yprime(alpha, gamma, x):
    a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
    f = lambda v: (xr + v) ** (a - 1) * (1 + v) ** (a - 1) * v**-g
    return mp.quad(f, [0, xr, 1, mp.inf])


alphas_gammas = [(0.25, 0.5), (0.3, 0.4), (-0.1, 0.3), (-0.25, 0.0), (0.25, 0.0),
                 (0.0, 0.4), (0.45, 0.95), (-0.45, 0.05), (0.49, 0.02), (0.7, 0.8),
                 (0.9, 0.85), (-0.04, 0.9)]
rhos = [0.0, 1e-6, 1e-3, 0.1, 0.5, 0.9, 0.99, 1 - 1e-4, 1 - 1e-7, 1 - 1e-10, 1.0]

print("=== z_ratio_kernel ===")
worst = 0.0
for (a, g) in alphas_gammas:
    errs = []
    vals = bq.z_ratio_kernel(a, g, np.array(rhos))
    for rho, v in zip(rhos, vals):
        r = float(ref_G(a, g, rho))
        rel = abs(v - r) / abs(r)
        errs.append(rel)
        worst = max(worst, rel)
    print(f"a={a:6.2f} g={g:5.2f} max_rel={max(errs):.3e}")
print("worst G:", worst)

print("=== y_kernel ===")
worst = 0.0
xs = [1e-6, 1e-4, 0.01, 0.3, 1.0]
for (a, g) in alphas_gammas:
    if a == 0.0:
        continue
    errs = []
    vals = bq.y_kernel(a, g, np.array(xs))
    for x, v in zip(xs, vals):
        r = float(ref_K(a, g, x))
        rel = abs(v - r) / max(abs(r), 1e-300)
        errs.append(rel)
        worst = max(worst, rel)
    print(f"a={a:6.2f} g={g:5.2f} max_rel={max(errs):.3e}")
print("worst K:", worst)

print("=== yprime ===")
worst = 0.0
for (a, g) in alphas_gammas:
    if a == 0.0:
        continue
    errs = []
    for x in xs:
        v = float(bq.yprime_cov(a, g, x, 1.0)[0]) / a**2
        r = float(ref_yprime(a, g, x))
        rel = abs(v - r) / max(abs(r), 1e-300)
        errs.append(rel)
        worst = max(worst, rel)
    print(f"a={a:6.2f} g={g:5.2f} max_rel={max(errs):.3e}")
print("worst yprime:", worst)
