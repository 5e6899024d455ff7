"""How the naming branch is discounted at inference time.

The fused training-time score is (Z_f + Z_k + Z_t) / 3.  Blanking the
structural inputs and keeping only the names gives the direct effect of the
names; subtracting alpha times it leaves Z_f + Z_k + (1 - alpha) Z_t up to
a positive factor and a constant.

Run:  python demos/02_counterfactual_scores.py
"""

import numpy as np

from cream.framework import cf_combine, fuse, nde, te, tie

z_f = np.array([0.3, 0.6])  # structure says class 1
z_k = np.array([0.9, 0.0])
z_t = np.array([0.6, 0.9])  # names say class 1 as well here

print("fused:", fuse(z_f, z_k, z_t))
for alpha in (0.0, 0.4, 0.6, 0.8, 1.0):
    z = cf_combine(z_f, z_k, z_t, alpha)
    print(f"alpha={alpha:.1f}  scores={np.round(z, 3)}  -> class {int(np.argmax(z))}")

# %% effect bookkeeping: TE = NDE + TIE
u = np.zeros(2)  # uniform score for a blanked input
r_fact = fuse(z_f, z_k, z_t)
r_names_only = fuse(u, u, z_t)
r_null = fuse(u, u, u)
total, direct = te(r_fact, r_null), nde(r_names_only, r_null)
print("TE", total, "NDE", direct, "TIE", tie(total, direct))
