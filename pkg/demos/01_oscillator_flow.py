"""Integrate the harmonic oscillator with each scheme and compare energy behaviour.

Verlet and implicit midpoint keep the energy error bounded; RK4 is more
accurate per step but its error grows steadily once the step is coarse.
"""

from prequant import IntegratorKind, Observable, PhasePoint, SeparableSplit, energy_drift, integrate

H = Observable.parse("(p1^2 + q1^2)/2", 1)
split = SeparableSplit.parse("p1^2/2", "q1^2/2", 1)
z0 = PhasePoint([1.0], [0.0])

print("energy drift |H(z_k) - H(z_0)| for the oscillator, dt = 0.2")
for steps in (500, 5000, 50000):
    row = []
    for kind in IntegratorKind:
        traj = integrate(H, z0, 0.2, steps, kind, split)
        row.append(f"{kind.value}={energy_drift(traj):.2e}")
    print(f"  {steps:5d} steps: " + "  ".join(row))
