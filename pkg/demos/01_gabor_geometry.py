"""
Geometry of Gabor frames
========================

Build the Alltop Gabor frame, measure its coherences and compare with the
closed forms and the Welch bound.
"""

import math

import numpy as np

from onestep import frames

# An Alltop seed needs a prime length of at least 5.
n = 31
g = frames.alltop_seed(n)
X = frames.build_gabor_frame(g, form="explicit")
print(f"frame: n={X.n}, p={X.p}")

# Worst-case and average coherence straight from the Gram matrix.
rep = frames.coherence_report(X)
print(f"mu = {rep.mu:.6f}   1/sqrt(n) = {1 / math.sqrt(n):.6f}")
print(f"nu = {rep.nu:.3e}   1/(n+1)   = {1 / (n + 1):.3e}")
print(f"||X||_2 = {rep.spectral_norm:.6f}, sqrt(n) = {math.sqrt(n):.6f}")
print(f"Welch bound = {rep.welch:.6f}")
print(f"CP holds: {rep.cp_holds}   SCP holds: {rep.scp_holds}")

# The frame is tight: X X^H = n I.
M = X.dense()
print("max |X X^H - n I| =", np.max(np.abs(M @ M.conj().T - n * np.eye(n))))

# Large frames stay implicit; products go through the FFT.
big = frames.build_gabor_frame(frames.alltop_seed(127))
print("operator form for n=127:", big.is_operator)
print("analytic report:", frames.coherence_report(big, analytic=True).to_dict())

# Any unit-norm seed works; its average coherence is bounded by the seed's
# extreme magnitudes.
rng = np.random.default_rng(0)
h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
h /= np.linalg.norm(h)
Y = frames.build_gabor_frame(h)
print(f"random seed: nu = {frames.average_coherence(Y):.4f} <= {frames.gabor_nu_bound(h):.4f}")
