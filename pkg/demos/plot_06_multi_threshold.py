"""
Many thresholds, no shape model
===============================

With a grid of thresholds ``j * delta`` the mean can be written as a Riemann
sum of tail probabilities. Each user answers one tail question, so no
density model is needed. The price is variance that grows with the grid's
reach: ``n Var`` scales with ``theta_m``, so covering a wider range costs
accuracy.
"""

import numpy as np

from onebit_dme import MultiThresholdConfig, ScaleLocationModel, make_density
from onebit_dme.protocols import multi_threshold_estimate, multi_threshold_mean, multi_threshold_theory

d = make_density("logistic")
model = ScaleLocationModel(d, mu=0.4, sigma=1.0)
rng = np.random.default_rng(3)

for m, delta in ((80, 0.1), (160, 0.05), (320, 0.025)):
    cfg = MultiThresholdConfig(m, delta)
    k = 20
    th = multi_threshold_theory(cfg, d, 0.4, 1.0, k)
    est = [multi_threshold_estimate(model.sample(rng, 2 * m * k), cfg) for _ in range(300)]
    bias = multi_threshold_mean(cfg, model) - 0.4
    print(f"m={m:4d} delta={delta:<6} bias={bias:+.2e} (bound {th.bias_bound:.2e})  "
          f"var: MC {np.var(est, ddof=1):.3e}, exact {th.variance_exact:.3e}, integral {th.variance_integral:.3e}")

# Doubling the reach at fixed delta doubles n Var.
for m in (50, 100, 200):
    th = multi_threshold_theory(MultiThresholdConfig(m, 0.1), d, 0.0, 1.0, 10)
    print(f"theta_m = {m * 0.1:5.1f}: n Var = {2 * m * 10 * th.variance_exact:.3f}")
