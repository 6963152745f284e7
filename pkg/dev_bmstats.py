import sys, time, math
sys.path.insert(0, "src")
import warnings; warnings.filterwarnings("ignore")
import numpy as np
from gfbm.params import validate
from gfbm import simulate as sim, pathstats as ps
from gfbm.covariance import ProcessId

p = validate(0.0, 0.0)

# --- uniform modulus on [1,2], BM ---
t0 = time.time()
delta = 2.0**-15
r_max, r_min = 2.0**-7, 2.0**-10
pts = np.arange(1.0, 2.0 + r_max + delta/2, delta)
grid = sim.TimeGrid(pts)
ens = sim.oracle_sample_z(p, grid, mesh=delta, n_paths=200, seed=42)
ens.process = ProcessId.X
ladder = ps.LadderSpec(np.array([2.0**-7, 2.0**-8, 2.0**-9, 2.0**-10]), interval=(1.0, 2.0))
rep = ps.uniform_modulus(ens, (1.0, 2.0), ladder)
print("uniform_modulus BM: fitted=%.4f  /sqrt2=%.4f  exponent=%.3f (%.0fs)"
      % (rep.fitted_constant, rep.fitted_constant/math.sqrt(2), rep.fitted_exponent, time.time()-t0))
print("  per-scale medians:", np.round(rep.statistic, 4))

# --- lil_limsup and chung at t centers, BM ---
t0 = time.time()
def local_grid(t_c, fine=2.0**-16, r_max=2.0**-4, per_oct=48):
    n = int(per_oct * math.log2(r_max / fine)) + 1
    offs = np.geomspace(fine, r_max, n)
    return sim.TimeGrid(np.concatenate([t_c - offs[::-1], [t_c], t_c + offs]))

lad = ps.LadderSpec(2.0 ** -np.arange(4.0, 10.5), t_center=1.0)
g = local_grid(1.0)
e = sim.oracle_sample_z(p, g, mesh=2.0**-4, n_paths=500, seed=7)
e.process = ProcessId.X
rep_lil = ps.lil_limsup(e, 1.0, lad)
rep_chung = ps.chung_liminf(e, 1.0, lad)
print("lil_limsup BM t=1: fitted=%.4f /sqrt2=%.4f  sup-slope=%.3f (%.0fs)"
      % (rep_lil.fitted_constant, rep_lil.fitted_constant/math.sqrt(2), rep_lil.fitted_exponent, time.time()-t0))
print("chung BM t=1: fitted=%.4f" % rep_chung.fitted_constant)
print("  lil per-scale:", np.round(rep_lil.statistic, 3))
print("  chung per-scale:", np.round(rep_chung.statistic, 3))

# --- lil at origin, BM ---
gr = sim.geometric_grid(2.0**-18, 0.25, 48*16+1)
eo = sim.oracle_sample_z(p, gr, mesh=0.25, n_paths=500, seed=9)
eo.process = ProcessId.X
lad0 = ps.LadderSpec(2.0 ** -np.arange(4.0, 10.5))
rep0 = ps.lil_origin(eo, lad0)
print("lil_origin BM: fitted=%.4f /sqrt2=%.4f  slope=%.3f (expect H=0.5)"
      % (rep0.fitted_constant, rep0.fitted_constant/math.sqrt(2), rep0.fitted_exponent))

# --- box dimension, BM ---
t0 = time.time()
nbox = 2**14
gb = sim.TimeGrid(np.linspace(1.0, 2.0, nbox + 1)[1:])
eb = sim.oracle_sample_z(p, gb, mesh=1.0/nbox, n_paths=4, seed=3)
dims = [ps.graph_box_dim(gb.points, eb.paths[i], (1.0, 2.0)) for i in range(4)]
print("box dim BM paths:", np.round(dims, 3), "expect 1.5 +- 0.1 (%.0fs)" % (time.time()-t0))
