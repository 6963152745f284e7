import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp
from gfbm import _batchquad as bq

def ref_log_stable(alpha, gamma, x, dps=50):
    # psi_x(v) = v^a * expm1(a*log1p(x/v)) -- no cancellation at any scale
    with mp.workdps(dps):
        a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
        def f(y):
            v = mp.e**y
            px = v**a * mp.expm1(a * mp.log1p(xr / v))
            p1 = v**a * mp.expm1(a * mp.log1p(1 / v))
            return px * p1 * v ** (1 - g)
        lo_rate = 1 + 2 * min(a, 0) - g
        hi_rate = 1 + g - 2 * a
        Ylo = -mp.mpf(dps + 15) * mp.log(10) / lo_rate
        Yhi = mp.mpf(dps + 15) * mp.log(10) / hi_rate
        pts = sorted(set([Ylo, mp.mpf(-50), mp.mpf(-5), mp.mpf(0), mp.mpf(5), mp.mpf(50), Yhi]))
        pts = [p for p in pts if Ylo <= p <= Yhi]
        return mp.quad(f, pts, maxdegree=10)

worst = 0.0
cases = [(0.25, 0.5), (0.3, 0.4), (-0.1, 0.3), (-0.25, 0.0), (0.25, 0.0), (0.45, 0.95),
         (-0.45, 0.05), (0.49, 0.02), (0.7, 0.8), (0.9, 0.85), (-0.04, 0.9), (0.05, 0.88)]
for (a, g) in cases:
    errs = []
    for x in [1e-8, 1e-6, 1e-4, 0.01, 0.3, 1.0]:
        r = float(ref_log_stable(a, g, x))
        eng = float(bq.y_kernel(a, g, np.array([x]))[0])
        errs.append(abs(eng - r) / max(abs(r), 1e-300))
    worst = max(worst, max(errs))
    print(f"a={a:6.2f} g={g:5.2f} max_rel={max(errs):.3e}")
print("worst y_kernel:", worst)
