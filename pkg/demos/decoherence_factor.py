"""How fast does a Gaussian pointer destroy coherence between two eigenvalues?

We follow |<phi_+|phi_->| for eigenvalues +1 and -1 as the interaction time
grows, compare it with the two asymptotic regimes, and check a handful of
points against a split-operator simulation of the pointer.
"""
import numpy as np

from pointer_decoherence import MeasurementConfig, asymptotic_factor, decoherence_factor, zeno_rate
from pointer_decoherence.grid import oracle_overlap

g, m, sigma = 0.5, 1.0, 1.0
print(f"coupling g={g}, mass m={m}, initial width sigma={sigma}  (hbar = 1)\n")
print(f"{'t':>6} {'F exact':>12} {'short-time':>12} {'long-time':>12} {'t/(m s^2)':>10}")
for t in (0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
    cfg = MeasurementConfig(g, t, m, sigma)
    f = decoherence_factor(cfg, 1.0, -1.0)
    short = asymptotic_factor(cfg, 1.0, -1.0, "short_time").value
    long_ = asymptotic_factor(cfg, 1.0, -1.0, "long_time").value
    print(f"{t:6.2f} {f:12.6g} {short:12.6g} {long_:12.6g} {cfg.regime_ratio:10.3g}")

# For very short times F ~ 1 - tau^2 t^2: the pointer barely registers anything.
cfg = MeasurementConfig(g, 1e-3, m, sigma)
tau = zeno_rate(cfg, 1.0, -1.0)
print(f"\nshort-time rate tau = {tau:.6f};  (1 - F)/t^2 at t=1e-3: {(1 - decoherence_factor(cfg, 1.0, -1.0)) / cfg.t**2:.6f}")

print("\nclosed form vs grid propagation:")
for t in (0.5, 2.0, 5.0):
    cfg = MeasurementConfig(g, t, m, sigma)
    exact = decoherence_factor(cfg, 1.0, -1.0)
    grid = abs(oracle_overlap(cfg, 1.0, -1.0))
    print(f"  t={t:4.1f}  F={exact:.12f}  grid={grid:.12f}  diff={abs(exact - grid):.1e}")
