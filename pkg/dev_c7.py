import sys, time, math
sys.path.insert(0, "src")
import warnings; warnings.filterwarnings("ignore")
import numpy as np
from gfbm.params import validate
from gfbm import smallball as sb
from gfbm.covariance import ProcessId

# --- BM origin: exponent + series match ---
t0 = time.time()
p = validate(0.0, 0.0)
eps = np.array([1.0, 0.9, 0.8, 0.7, 0.62, 0.55, 0.5, 0.45, 0.4])
q = sb.SmallBallQuery(process=ProcessId.X, mode="origin", r=1.0, eps_ladder=eps,
                      n_mc=100_000, grid_points=1024)
est = sb.estimate(p, q, seed=21)
fit = sb.fit_exponent(est, p)
print("BM origin: fitted_exp=%.3f (target 2.0)  grid_final=%d  moves=%s (%.0fs)"
      % (fit.fitted_exponent, est.grid_points_final, np.round(est.refinement_moves, 5), time.time() - t0))
for e in est.per_eps:
    series = sb.bm_ball_probability(e.eps)
    ci_hw = (e.ci_high - e.ci_low) / 2
    ok = abs(e.p_hat - series) <= 2 * ci_hw
    print(f"  eps={e.eps:.2f}: p_hat={e.p_hat:.5f} series={series:.5f} |diff|/2ci={abs(e.p_hat-series)/(2*ci_hw+1e-300):.2f} {'OK' if ok else 'FAIL'}")

# --- (0.25, 0.5) origin pilot ---
t0 = time.time()
p2 = validate(0.25, 0.5)
eps2 = np.geomspace(2.0, 0.3, 10)
q2 = sb.SmallBallQuery(process=ProcessId.X, mode="origin", r=1.0, eps_ladder=eps2,
                       n_mc=20_000, grid_points=256)
est2 = sb.estimate(p2, q2, seed=22)
print("(0.25,0.5) origin pilot (%.0fs): grid_final=%d" % (time.time()-t0, est2.grid_points_final))
for e in est2.per_eps:
    print(f"  eps={e.eps:.3f}: p={e.p_hat:.5f}")

# --- (0.25, 0.5) local pilot at t=1 ---
t0 = time.time()
eps3 = np.geomspace(0.3, 0.02, 8)
q3 = sb.SmallBallQuery(process=ProcessId.X, mode="local", r=0.2, t_center=1.0,
                       eps_ladder=eps3, n_mc=20_000, grid_points=256)
est3 = sb.estimate(p2, q3, seed=23)
print("(0.25,0.5) local t=1 pilot (%.0fs):" % (time.time()-t0))
for e in est3.per_eps:
    print(f"  eps={e.eps:.4f}: p={e.p_hat:.5f}")
