"""Rate and exponent thresholds, the BSC crossover, and the stabilizable region.

The union-bound thresholds give the largest rate with a positive exponent
and the exponent beta(R) at each rate below it.  On the BSC a sharper pair of
thresholds takes over below a crossover noise level.  Combining rate and
exponent gives the largest unstable pole that a random code can stabilize.
"""

import numpy as np

from anytime_codes.bounds import (
    epsilon_star,
    region_sweep,
    theta_star,
    tighter_bsc_thresholds,
    union_bound_thresholds,
)

th = union_bound_thresholds(zeta=0.3, p=0.5)
print(f"BEC(0.3): R_max = {th.R_max:.6f}")
for R, beta in th.beta_table([0.1, 0.2, 0.4, 0.6]):
    print(f"  R={R:.1f}  beta={beta:.5f}  theta*={theta_star(R):.4f}")

eps = epsilon_star()
print(f"BSC crossover: {eps:.6f}")
for e in (0.01, 0.05, eps, 0.1):
    union = union_bound_thresholds(2 * np.sqrt(e * (1 - e))).R_max
    print(f"  eps={e:.4f}: union R_max={union:.4f}, tighter R_max={tighter_bsc_thresholds(e).R_max:.4f}")

print("log2 lambda_max per channel use, n=15, m=2:")
for kind, tighter in (("bec", False), ("bsc", True)):
    pts = region_sweep(kind, [0.01, 0.05, 0.1, 0.2, 0.3], n=15, m=2, use_tighter=tighter)
    print(" ", kind, " ".join(f"{p.channel_param:.2f}:{p.log2_lambda_max_per_use:.3f}" for p in pts))
