import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp
from gfbm import _batchquad as bq

def ref_deep(alpha, gamma, x, dps=60):
    with mp.workdps(dps):
        a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
        f = lambda v: ((xr + v) ** a - v**a) * ((1 + v) ** a - v**a) * v**-g
        pts = sorted(set([mp.mpf(0), mp.mpf(1e-40), mp.mpf(1e-30), mp.mpf(1e-20),
                          mp.mpf(1e-12), mp.mpf(1e-8), xr, mp.mpf(1e-3), mp.mpf(1),
                          mp.mpf(10), mp.mpf(1e3), mp.mpf(1e6), mp.mpf(1e9),
                          mp.mpf(1e12), mp.mpf(1e16), mp.mpf(1e20), mp.mpf(1e26),
                          mp.mpf(1e32), mp.inf]))
        return mp.quad(f, pts, maxdegree=8)

for (a, g) in [(0.45, 0.95), (0.49, 0.02), (0.9, 0.85), (-0.04, 0.9)]:
    for x in [0.01, 1.0]:
        r = ref_deep(a, g, x)
        eng = float(bq.y_kernel(a, g, np.array([x]))[0])
        print(f"a={a:5.2f} g={g:4.2f} x={x:8.2g} deep={mp.nstr(r, 14)} eng={eng!r} "
              f"rel={abs(eng - float(r)) / abs(float(r)):.2e}")
