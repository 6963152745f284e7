import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp
from gfbm import _batchquad as bq

def ref_piece(alpha, gamma, x, lo, hi, dps=50):
    with mp.workdps(dps):
        a, g, xr = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(x)
        def f(y):
            v = mp.e**y
            return ((xr + v) ** a - v**a) * ((1 + v) ** a - v**a) * v ** (1 - g)
        lo_rate = 1 + 2 * min(a, 0) - g
        Ylo = -mp.mpf(dps + 10) * mp.log(10) / lo_rate if lo == 0 else mp.log(mp.mpf(lo))
        Yhi = mp.mpf(dps + 10) * mp.log(10) / (2 - 2 * a + g - 1) if hi is None else mp.log(mp.mpf(hi))
        pts = sorted(set([Ylo, mp.mpf(-5), mp.mpf(0), mp.mpf(5), Yhi]))
        pts = [p for p in pts if Ylo <= p <= Yhi]
        return mp.quad(f, pts, maxdegree=10)

for (a, g) in [(0.49, 0.02), (0.9, 0.85)]:
    for x in [1.0]:
        tab = bq._tables("y", a, g)
        v = tab.near_v
        xc = np.array([[x]])
        ratio = xc / v[None, :]
        small = ratio < 0.5
        direct = (xc + v[None, :]) ** a - tab.near_va[None, :]
        stable = tab.near_va[None, :] * np.expm1(a * np.log1p(np.where(small, ratio, 1.0)))
        pair = np.where(small, stable, direct)
        near_eng = float(pair @ tab.near_base)
        far_eng = float(np.expm1(a * np.log1p(xc * tab.far_w[None, :])) @ tab.far_base)
        near_ref = float(ref_piece(a, g, x, 0, 1))
        far_ref = float(ref_piece(a, g, x, 1, None))
        print(f"a={a} g={g} x={x}: near eng={near_eng!r} ref={near_ref!r} relerr={abs(near_eng-near_ref)/abs(near_ref):.2e}")
        print(f"              far  eng={far_eng!r} ref={far_ref!r} relerr={abs(far_eng-far_ref)/abs(far_ref):.2e}")
