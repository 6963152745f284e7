import sys
sys.path.insert(0, "src")
import numpy as np
import mpmath as mp
from gfbm import _batchquad as bq

mp.mp.dps = 40

def ref_G(alpha, gamma, rho):
    a, g, r = mp.mpf(alpha), mp.mpf(gamma), mp.mpf(rho)
    return mp.beta(1 - g, 1 + a) * mp.hyp2f1(-a, 1 - g, 2 + a - g, r)

rhos = [0.0, 1e-6, 1e-3, 0.1, 0.5, 0.9, 0.99, 1 - 1e-4, 1 - 1e-7, 1 - 1e-10]
for (a, g) in [(0.45, 0.95), (-0.04, 0.9), (0.9, 0.85)]:
    vals = bq.z_ratio_kernel(a, g, np.array(rhos))
    for rho, v in zip(rhos, vals):
        r = float(ref_G(a, g, rho))
        # also split: compare outer/inner pieces vs mp quad split at 1/2
        fa = lambda w: (1 - mp.mpf(rho) * w) ** mp.mpf(a) * (1 - w) ** mp.mpf(a) * w ** (-mp.mpf(g))
        outer_ref = float(mp.quad(fa, [0, mp.mpf(0.5)]))
        inner_ref = float(mp.quad(fa, [mp.mpf(0.5), 1 - mp.mpf(rho)/2 if rho > 0.999 else mp.mpf(0.75), 1]))
        tab = bq._tables("z", a, g)
        outer = float((1.0 - rho * tab.outer_w) ** a @ tab.outer_base)
        inner = float(((1.0 - rho) + rho * tab.inner_c) ** a @ tab.inner_base)
        print(f"a={a} g={g} rho={rho:.10g} rel={abs(v-r)/abs(r):.2e} "
              f"outer_rel={abs(outer-outer_ref)/abs(r):.2e} inner_rel={abs(inner-inner_ref)/abs(r):.2e}")
