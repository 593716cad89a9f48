"""
Monte Carlo checks
==================

A short sweep plus the empirical probability checks: statistical
orthogonality, random-submatrix conditioning, Gaussian coherence and the
noise proxy tail.
"""

from onestep import experiments, frames

# A reduced model-order sweep. Seeds are derived per (k, trial), so the CSV
# is identical whatever the thread count.
cfg = experiments.ExperimentConfig(
    frame={"type": "alltop", "n": 127}, k=[1, 5, 10, 15], algorithm="sost",
    snr_db=10.0, sigma2=1e-2, trials=50, seed=0)
res = experiments.run_sweep(cfg, threads=2)
for k in cfg.k:
    row = res.summary.at(k)
    print(f"k={k:2d}  f_d={row['f_d_mean']:.3f}  exact={row['exact_rate']:.2f}")
print(experiments.records_to_csv(res.records[:3]))

X31 = frames.build_gabor_frame(frames.alltop_seed(31))
print("StOC:", experiments.stoc_violation_estimate(X31, 5, trials=500).to_dict())
print("conditioning:", experiments.submatrix_conditioning_estimate(X31, 5, trials=500).to_dict())

chk = experiments.gaussian_coherence_check(512, 1024, draws=10)
print(f"Gaussian mu: {chk.mu_exceed}/10 above {chk.mu_bound:.4f}, "
      f"nu: {chk.nu_exceed}/10 above {chk.nu_bound:.4f}")

G = frames.gaussian_design(128, 1024, 0)
tail = experiments.noise_proxy_tail_check(G, 1.0, trials=20_000)
print(f"tail: empirical {tail.empirical:.2e} vs bound {tail.analytic_bound:.2e}")
