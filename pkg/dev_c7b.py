import sys, time, math
sys.path.insert(0, "src")
import warnings; warnings.filterwarnings("ignore")
import numpy as np
from gfbm.params import validate
from gfbm import smallball as sb
from gfbm.covariance import ProcessId

t0 = time.time()
p = validate(0.0, 0.0)
eps = np.array([1.0, 0.9, 0.8, 0.7, 0.62, 0.55, 0.5, 0.45, 0.4])
q = sb.SmallBallQuery(process=ProcessId.X, mode="origin", r=1.0, eps_ladder=eps,
                      n_mc=100_000, grid_points=4096)
est = sb.estimate(p, q, seed=21)
fit = sb.fit_exponent(est, p)
print("BM origin: exp=%.3f grid_final=%d moves=%s (%.0fs)"
      % (fit.fitted_exponent, est.grid_points_final, np.round(est.refinement_moves, 5), time.time()-t0))
bad = 0
for e in est.per_eps:
    series = sb.bm_ball_probability(e.eps)
    ci_hw = (e.ci_high - e.ci_low) / 2
    ratio = abs(e.p_hat - series) / (2 * ci_hw)
    if ratio > 1: bad += 1
    print(f"  eps={e.eps:.2f}: p={e.p_hat:.5f} series={series:.5f} ratio={ratio:.2f}")
print("fails:", bad)
