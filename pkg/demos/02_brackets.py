"""Poisson brackets, Hamiltonian fields and the homomorphism between them."""

import numpy as np

from prequant import (
    Observable,
    PhasePoint,
    canonical_poisson_bracket,
    evaluate_field,
    field_lie_bracket,
    hamiltonian_vector_field,
    poisson_bracket,
)

q, p = Observable.parse("q1", 1), Observable.parse("p1", 1)
print("{q1, p1} under this package's convention:", poisson_bracket(q, p))
print("the textbook bracket gives:              ", canonical_poisson_bracket(q, p))

f = Observable.parse("q1^2*p1", 1)
g = Observable.parse("sin(q1) + p1^3", 1)
print("\nf =", f, "   g =", g)
X = hamiltonian_vector_field(f)
print("X_f = (dq/dt, dp/dt) =", tuple(str(c) for c in X.components))
lhs = field_lie_bracket(hamiltonian_vector_field(f), hamiltonian_vector_field(g))
rhs = hamiltonian_vector_field(poisson_bracket(f, g))

rng = np.random.default_rng(0)
worst = 0.0
for q1, p1 in rng.uniform(-2, 2, size=(200, 2)):
    z = PhasePoint([q1], [p1])
    worst = max(worst, float(np.max(np.abs(evaluate_field(lhs, z).as_array() - evaluate_field(rhs, z).as_array()))))
print(f"max |[X_f, X_g] - X_{{f,g}}| over 200 points: {worst:.2e}")
