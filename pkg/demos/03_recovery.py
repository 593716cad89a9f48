"""
Noiseless recovery
==================

Threshold the proxy, then solve least squares on the kept columns. The
recovery threshold scales with ||y||, and because |f_i| <= ||y|| a large
constant keeps nothing at all.
"""

import math

import numpy as np

from onestep import frames, selection, signals

n = 127
X = frames.build_gabor_frame(frames.alltop_seed(n))
mu = 1 / math.sqrt(n)
rng = np.random.default_rng(3)

beta = signals.make_signal(X.p, signals.draw_support(X.p, 4, rng), 1.0, 4.0, seed=rng)
y = signals.measure(X, beta).y

for c in (0.5, 2.0, 10.0):
    spec = selection.recovery_threshold(mu, np.linalg.norm(y), X.p, c=c)
    res = selection.ost_recover(X, y, lam=spec.lam)
    err = np.max(np.abs(res.beta_hat - beta.dense()))
    print(f"c={c:<4} lambda={spec.lam:.3f} kept={res.selected.size:3d} "
          f"residual={res.residual:.2e} sup err={err:.2e}")
print(f"any c >= {spec.critical_c:.3f} keeps nothing")

# Knowing k, the sorted variant recovers the signal exactly here.
res = selection.ost_recover(X, y, k=4)
print("SOST + least squares sup err:", np.max(np.abs(res.beta_hat - beta.dense())))

# Sparsity level the constants certify at this size (below one).
print("certified k:", selection.recovery_sparsity_cap(X.p, math.sqrt(n), mu, 1.0))
