"""Check that the prequantum operators turn brackets into commutators."""

import numpy as np

from prequant import Observable, PrequantumOperator, Section, dirac_residual
from prequant.prequantum import dirac_sides
from prequant.scenario import default_sections

hbar = 0.3
print("Omega(p1) applied to q1:", PrequantumOperator(Observable.parse("p1", 1), hbar)(Section.parse("q1")))
print("Omega(q1) applied to 1: ", PrequantumOperator(Observable.parse("q1", 1), hbar)(Section.parse("1")))

sections = default_sections(1)
pts = np.random.default_rng(1).uniform(-2, 2, size=(100, 2))
names = ["q1", "p1", "q1^2", "p1^2", "q1*p1", "q1^2*p1"]
fs = [Observable.parse(t, 1) for t in names]
print("\nmax Dirac residual per pair, hbar =", hbar)
for i, f in enumerate(fs):
    for g in fs[i + 1:]:
        worst = max(dirac_residual(f, g, s, pts, hbar) for s in sections)
        print(f"  {str(f):>10} {str(g):>10}  {worst:.1e}")

left, _ = dirac_sides(fs[0], fs[1], sections[1], hbar)
s = sections[1]
gap = np.max(np.abs(left.evaluate_array(pts[:, :1].T, pts[:, 1:].T) + s.evaluate_array(pts[:, :1].T, pts[:, 1:].T)))
print(f"\nthe commutator side for (q1, p1) equals -s to within {gap:.1e}")
