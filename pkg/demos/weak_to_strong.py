"""From weak value to conditional expectation.

A qubit is pre-selected at angle 0.3 and post-selected at angle 1.0 with a
relative phase of 0.6.  With no
decoherence the pointer reads the weak value; once the branches stop
overlapping it reads the conditional (reweighted) expectation.  The transition
value A_T interpolates between the two, and the pointer shifts follow it.
"""
import math

from pointer_decoherence import (
    MeasurementConfig,
    SelectionState,
    SpectralObservable,
    analyze,
    conditional_expectation,
    weak_value,
)

obs = SpectralObservable([1.0, -1.0])
pre = SelectionState.qubit(0.3)
post = SelectionState.qubit(1.0, 0.6)
w = weak_value(obs, pre, post)
print(f"weak value               {w.real:.6f} {w.imag:+.6f}i")
print(f"conditional expectation  {conditional_expectation(obs, pre, post):.6f}\n")

print(f"{'t':>6} {'F':>10} {'Re A_T':>10} {'Im A_T':>10} {'dx':>10} {'dp':>10}  regime")
for t in (0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0):
    r = analyze(obs, pre, post, MeasurementConfig(g=0.5, t=t))
    regime = "weak" if r.near_weak else ("strong" if r.near_strong else "")
    print(f"{t:6.2f} {r.f_min:10.4g} {r.a_t.real:10.5f} {r.a_t.imag:10.2e} {r.dx:10.4f} {r.dp:10.4f}  {regime}")

# Nearly orthogonal selections amplify the weak value far beyond the spectrum.
pre = SelectionState.qubit(math.pi / 4 + 0.01)
post = SelectionState.qubit(-math.pi / 4)
print(f"\nnearly orthogonal selection: weak value {weak_value(obs, pre, post).real:.2f}")
for g in (1e-4, 1e-2, 1.0):
    r = analyze(obs, pre, post, MeasurementConfig(g=g, t=1.0))
    print(f"  g={g:g}: A_T = {r.a_t.real:.3f}{r.a_t.imag:+.3f}i, momentum shift / g t = {r.dp / g:.3f}")
