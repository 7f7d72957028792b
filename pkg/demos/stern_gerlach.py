"""Spin-1/2 through a field gradient with pre- and post-selection.

The spin states split into two drifting packets.  We watch the off-diagonal
element of the spin density matrix fade and compare the exact pointer shifts
with the closed-form spin expressions.
"""
import math

import numpy as np

from pointer_decoherence import SgScenario, sg_shifts
from pointer_decoherence.stern_gerlach import sg_density_matrix

for f in (1e-4, 0.1, 0.5, 1.0, 3.0):
    s = SgScenario(theta1=math.pi / 6, delta1=0.4, theta2=math.pi / 5, delta2=1.9, f=f, t=1.0)
    rho = sg_density_matrix(s).entries
    sh = sg_shifts(s)
    print(
        f"f={f:<6g} |rho_ud|={abs(rho[0, 1]):.4f}  beta^2={sh.beta_sq:.4f}  "
        f"dx={sh.dx:+.6f} (closed form {sh.dx_printed:+.6f})  dp={sh.dp:+.6f}"
    )

s = SgScenario(math.pi / 6, 0.4, math.pi / 5, 1.9, f=10.0, t=2.0)
print("\nfully decohered spin state:")
print(np.round(sg_density_matrix(s).entries.real, 12))
print("cos^2, sin^2 of theta1:", round(math.cos(math.pi / 6) ** 2, 12), round(math.sin(math.pi / 6) ** 2, 12))
