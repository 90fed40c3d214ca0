"""Shared corpus and helpers for the test modules."""

import numpy as np

from prequant import Observable

# Smooth expressions exercising every node kind.  Each is defined on all of
# [-2, 2]^2n so finite differences never straddle a singularity.
CORPUS_TEXT = [
    ("(p1^2 + q1^2)/2", 1),
    ("p1^2/2 - cos(q1)", 1),
    ("p1^4/4 + q1^4/4", 1),
    ("q1^2*p1", 1),
    ("sin(q1)*exp(-p1^2)", 1),
    ("ln(1 + q1^2 + p1^2)", 1),
    ("sqrt(2 + sin(q1*p1))", 1),
    ("q1/(1 + p1^2) - pi*p1^3", 1),
    ("-q1^2 + 3.5e-1*q1*p1", 1),
    ("(2 + cos(p1))^(-2)", 1),
    ("(p1^2 + p2^2 + q1^2 + q2^2)/2", 2),
    ("q1*p2 - q2*p1", 2),
    ("exp(q1 - q2)*p1*p2 + sin(q2)^3", 2),
    ("(q1*p1 + q2*p2)^2/(3 + q1^2)", 2),
]

# Operator corpus used for the Dirac and linearity checks.
OPERATOR_CORPUS = ["1", "q1", "p1", "q1^2", "p1^2", "q1*p1", "q1^2*p1"]

def corpus():
    return [Observable.parse(t, n) for t, n in CORPUS_TEXT]

def points(n, count, rng, half_width=2.0):
    return rng.uniform(-half_width, half_width, size=(count, 2 * n))

def at(f, z):
    """Evaluate an observable at a flat [q, p] array."""
    return f(z[: f.n], z[f.n:])

def central_difference(f, z, j, h=1e-5):
    zp = np.array(z, dtype=float)
    zm = zp.copy()
    zp[j] += h
    zm[j] -= h
    return (at(f, zp) - at(f, zm)) / (2 * h)
