"""
Where adaptivity stops paying off for generalized Gaussians
===========================================================

Along the GGD family ``C_non`` falls and ``C_adapt`` rises with the shape
``beta``. The two meet near ``beta = 1.85``; past that point the
non-adaptive floor sits below the adaptive constant.
"""

import numpy as np

from onebit_dme import ggd_crossing, sweep_beta

rows = sweep_beta(np.round(np.arange(1.1, 2.51, 0.1), 10))
print(f"{'beta':>5} {'C_non':>8} {'C_adapt':>8} {'ratio':>7}")
for r in rows:
    print(f"{r.beta:5.2f} {r.c_non:8.4f} {r.c_adapt:8.4f} {r.ratio:7.4f}")

print(f"\ncrossing: beta* = {ggd_crossing():.4f}")
