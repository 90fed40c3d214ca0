"""Follow the fiber phase along lifted flows.

Along a lifted Hamiltonian flow theta changes at the rate -L = H - p.dH/dp.
A full oscillator period returns theta to where it started, a free
particle winds at a constant rate, and a constant Hamiltonian rotates the
fiber without moving the base point.
"""

import math

from prequant import LiftedPoint, Observable, PhasePoint, holonomy_phase, integrate_lifted

osc = Observable.parse("(p1^2 + q1^2)/2", 1)
for A in (0.5, 1.0, 2.0):
    traj = integrate_lifted(osc, LiftedPoint(PhasePoint([A], [0.0]), 0.0), 2 * math.pi / 10_000, 10_000)
    eighth = traj.theta[1250]
    print(f"oscillator A={A}: theta at t=pi/4 {eighth:+.6f} "
          f"(closed form {A * A / 4:+.6f}), after a full period {holonomy_phase(traj).delta_theta:+.2e}")

free = integrate_lifted(Observable.parse("p1^2/2", 1), LiftedPoint(PhasePoint([0.0], [1.3]), 0.0), 0.01, 500)
print(f"free particle p=1.3, t=5: theta = {free.theta[-1]:.12f} (expected {-1.3**2 / 2 * 5:.12f})")

const = integrate_lifted(Observable.parse("3", 1), LiftedPoint(PhasePoint([0.2], [0.4]), 0.0), math.pi / 300, 100)
print(f"constant H=3 for t=pi/3: phase {holonomy_phase(const).phase:.12f}, base point {const.q[-1]}, {const.p[-1]}")
