"""Checking the closed forms with an independent numerical pointer.

A split-operator propagator evolves each branch on an FFT grid.  Halving the
time step shrinks the error by four (second order); refining the spatial grid
converges to round-off at once.  The same machinery decides whether two
printed closed forms of the decoherence factor can be told apart.
"""
from pointer_decoherence import MeasurementConfig
from pointer_decoherence.adjudication import adjudicate_coefficient
from pointer_decoherence.grid import GridSpec, auto_grid, convergence_study, propagate

cfg = MeasurementConfig(g=1.0, t=2.0)
eig = [1.0, -1.0, 0.0]
base = auto_grid(cfg, eig)
print(f"auto grid: [{base.x_min:.1f}, {base.x_max:.1f}] with {base.n_points} points, {base.n_steps} steps")

rep = convergence_study([base.with_steps(n) for n in (16, 32, 64, 128)], cfg, eig)
print("time ladder differences:", ", ".join(f"{d:.2e}" for d in rep.differences))
print("observed orders:", rep.orders)

rep = convergence_study([GridSpec(base.x_min, base.x_max, n, 64) for n in (512, 1024, 2048)], cfg, eig)
print("space ladder differences:", ", ".join(f"{d:.2e}" for d in rep.differences))

b = propagate(base, cfg, 1.0)
print(f"norm drift {max(b.norm_history) - min(b.norm_history):.1e}, "
      f"energy drift {max(b.energy_history) - min(b.energy_history):.1e}\n")

for line in adjudicate_coefficient().lines():
    print(line)
