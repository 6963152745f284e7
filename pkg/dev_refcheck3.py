import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp
from gfbm import _batchquad as bq

def ref_log(alpha, gamma, x, dps=50):
    # v = e^y; integrand decays like e^((1+2min(a,0)-g) y) at -inf and
    # e^((2a-1-g) y) at +inf -- both pure exponentials, ideal for tanh-sinh.
    with mp.workdps(dps):
        a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
        def f(y):
            v = mp.e**y
            return ((xr + v) ** a - v**a) * ((1 + v) ** a - v**a) * v ** (1 - g)
        lo_rate = 1 + 2 * min(a, 0) - g      # decay exponent toward -inf
        hi_rate = g + 1 - 2
        # integrate far enough that e^(rate*y) < 1e-(dps)
        Ylo = -mp.mpf(dps + 10) * mp.log(10) / lo_rate
        Yhi = mp.mpf(dps + 10) * mp.log(10) / (2 - 2 * a + g - 1)
        pts = [Ylo, -50, -5, 0, 5, 50, Yhi]
        pts = sorted(set(pts))
        return mp.quad(f, pts, maxdegree=10)

for (a, g) in [(0.45, 0.95), (0.49, 0.02), (0.9, 0.85), (-0.04, 0.9), (0.25, 0.5), (-0.45, 0.05)]:
    for x in [0.01, 1.0]:
        r = ref_log(a, g, x)
        eng = float(bq.y_kernel(a, g, np.array([x]))[0])
        print(f"a={a:5.2f} g={g:4.2f} x={x:8.2g} logref={mp.nstr(r, 14)} eng={eng!r} "
              f"rel={abs(eng - float(r)) / abs(float(r)):.2e}")
