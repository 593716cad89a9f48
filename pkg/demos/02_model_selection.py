"""
Model selection by one-step thresholding
========================================

Draw a sparse signal, measure it through an Alltop frame with noise, and
pick its support with OST (fixed threshold) and SOST (k largest).
"""

import math

import numpy as np

from onestep import frames, selection, signals

n = 127
X = frames.build_gabor_frame(frames.alltop_seed(n))
mu = 1 / math.sqrt(n)

sigma2 = 1e-2
snr = 10 ** (3 / 10)  # 3 dB
k = 2
rng = np.random.default_rng(1)

# Signal energy follows from the SNR: ||beta||^2 = snr * n * sigma2.
support = signals.draw_support(X.p, k, rng)
beta = signals.make_signal(X.p, support, target_mar=1.0,
                           total_energy=snr * n * sigma2, seed=rng)
eta = signals.sample_noise(n, sigma2, rng)
y = signals.measure(X, beta, eta, sigma2).y
print("true support:", beta.support.tolist())

# Threshold with the small-constant regime c = 2t.
t = (math.sqrt(2) - 1) / math.sqrt(2)
spec = selection.ost_threshold(mu, n, X.p, snr, sigma2, t=t, c=2 * t)
print(f"lambda = {spec.lam:.4f}")
for scale in (0.6, 0.8, 1.0):
    res = selection.ost_select(X, y, scale * spec.lam)
    print(f"  OST at {scale:.1f} lambda ->", res.selected.tolist())

# The sorted variant needs k but no threshold.
print("SOST ->", selection.sost_select(X, y, k).selected.tolist())

# How many measurements would the guarantee ask for?
params = selection.GuaranteeParams(c1=1.0, gamma=2.0)
print(f"sufficient n (t=0.5): {selection.required_measurements(k, X.p, snr, 1.0, params, 0.5):.0f}")
print(f"MAR floor at this n:  {selection.mar_floor(n, X.p, k, snr, mu, 0.5).value:.2f}")
