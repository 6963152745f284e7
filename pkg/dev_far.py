import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp
from gfbm import _batchquad as bq

def far_eng(alpha, gamma, x, d0, d1, order, ratio=0.25):
    mu = gamma - 2.0 * alpha
    u, wu = bq.graded_nodes(d0, d1, ratio, order)
    wv = u ** (1.0 / (1.0 + mu))
    with np.errstate(all="ignore"):
        e_unit = np.expm1(alpha * np.log1p(wv)) / wv
        base = e_unit * wu / ((1.0 + mu) * wv)
        pair = np.expm1(alpha * np.log1p(x * wv))
    return float(pair @ base)

def far_ref(alpha, gamma, x, dps=60):
    with mp.workdps(dps):
        a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
        mu = g - 2 * a
        q = 1 / (1 + mu)
        def f(u):
            w = u**q
            return q * mp.expm1(a * mp.log1p(xr * w)) * mp.expm1(a * mp.log1p(w)) / w**2
        return mp.quad(f, [0, mp.mpf(0.5), mp.mpf(0.9), mp.mpf(0.99), 1], maxdegree=12)

for (a, g) in [(0.49, 0.02), (0.9, 0.85)]:
    x = 1.0
    r = far_ref(a, g, x)
    print(f"a={a} g={g} u-space mpmath ref = {mp.nstr(r, 16)}")
    for (d0, d1, order, ratio) in [(8, 10, 12, 0.25), (8, 20, 12, 0.25), (8, 30, 16, 0.25),
                                   (12, 40, 16, 0.5), (16, 60, 20, 0.5)]:
        e = far_eng(a, g, x, d0, d1, order, ratio)
        print(f"  d0={d0} d1={d1} p={order} r={ratio}: {e!r} rel={abs(e-float(r))/abs(float(r)):.2e}")
