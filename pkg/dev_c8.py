import sys, time, math
sys.path.insert(0, "src")
import warnings; warnings.filterwarnings("ignore")
import numpy as np
from gfbm.params import validate
from gfbm import simulate as sim, pathstats as ps
from gfbm.covariance import ProcessId

def local_grid(t_c, fine=2.0**-16, r_max=2.0**-4, per_oct=48):
    n = int(per_oct * math.log2(r_max / fine)) + 1
    offs = np.geomspace(fine, r_max, n)
    return sim.TimeGrid(np.concatenate([t_c - offs[::-1], [t_c], t_c + offs]))

for (a, g) in [(0.25, 0.5), (0.3, 0.4)]:
    p = validate(a, g)
    lad_template = 2.0 ** -np.arange(4.0, 10.5)
    chung_reports, lil_reports = [], []
    for t_c in [0.5, 1.0, 2.0, 4.0]:
        t0 = time.time()
        grid = local_grid(t_c)
        G = sim.build_gram(p, grid, ProcessId.X)
        ens = sim.cholesky_sample(G, 500, 101, grid=grid, process=ProcessId.X, params=p)
        lad = ps.LadderSpec(lad_template, t_center=t_c)
        rc = ps.chung_liminf(ens, t_c, lad)
        rl = ps.lil_limsup(ens, t_c, lad)
        chung_reports.append((t_c, rc))
        lil_reports.append((t_c, rl))
        print(f"  a={a} t={t_c}: chung={rc.fitted_constant:.4f} lil={rl.fitted_constant:.4f} jit={ens.jitter:.1e} ({time.time()-t0:.0f}s)")
    sc = ps.location_scaling(chung_reports)
    sl = ps.location_scaling(lil_reports)
    print(f"(a={a}, g={g}): chung slope={sc:.4f}  lil slope={sl:.4f}  target={-g/2:.3f} +- 0.08")
