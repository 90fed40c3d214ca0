"""The trivial circle bundle L = R^2n x U(1) over phase space.

Coordinates on L are (q, p, theta).  The connection form is
alpha = p.dq + dtheta, whose curvature d(p.dq) is w0.  An observable f
lifts to

    V_f = (df/dp, -df/dq, f - p.df/dp),

the unique field on L projecting to X_f with alpha(V_f) = f.  For a
Hamiltonian H the fiber rate f - p.dH/dp is minus the Lagrangian, so
following V_H accumulates the classical action as a phase exp(i theta).
"""

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import expr as E
from .errors import DimensionMismatch
from .flow import IntegratorKind, _kind, _run, sample_times, write_csv
from .observable import Observable, coordinates
from .symplectic import (
    HamiltonianField,
    PhasePoint,
    evaluate_field,
    field_lie_bracket,
    hamiltonian_vector_field,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class LiftedPoint:
    """A point of L.  ``theta`` is kept unwrapped (accumulated, not mod 2pi)."""

    base: PhasePoint
    theta: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", theta)

    @property
    def n(self):
        return self.base.n

    @property
    def canonical_theta(self):
        """Representative of theta in [0, 2pi)."""
        r = math.fmod(self.theta, TWO_PI)
        if r < 0:
            r += TWO_PI
        return 0.0 if r >= TWO_PI else r

    @property
    def phase(self):
        return cmath.exp(1j * self.theta)

    def winding(self):
        return math.floor(self.theta / TWO_PI)

    def fiber_equivalent(self, other, tol=1e-12):
        """Same base point and theta differing by a whole number of turns."""
        if self.base != other.base:
            return False
        turns = (self.theta - other.theta) / TWO_PI
        return abs(turns - round(turns)) <= tol


@dataclass(frozen=True, eq=False)
class LiftedTangent:
    """A tangent vector (dq, dp, dtheta) to L."""

    dq: np.ndarray
    dp: np.ndarray
    dtheta: float

    def __post_init__(self):
        dq = np.array(self.dq, dtype=float).reshape(-1)
        dp = np.array(self.dp, dtype=float).reshape(-1)
        if dq.shape != dp.shape:
            raise DimensionMismatch("dq and dp lengths differ")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "dp", dp)
        object.__setattr__(self, "dtheta", float(self.dtheta))

    @property
    def n(self):
        return len(self.dq)


@dataclass(frozen=True)
class LiftedField:
    base: HamiltonianField
    theta_rate: Observable

    @property
    def n(self):
        return self.base.n

    @property
    def generator(self):
        return self.base.generator

    def __call__(self, z):
        return evaluate_lifted(self, z)


def _p_dot_grad_p(f):
    total = E.ZERO
    for i in range(1, f.n + 1):
        total = E.s_add(total, E.s_mul(E.Var("p", i), f.diff(f"p{i}").expr))
    return total


def lagrangian(H):
    """Lambda = p.dH/dp - H."""
    return Observable(H.n, E.simplify(E.s_sub(_p_dot_grad_p(H), H.expr)))


def lift_field(f):
    rate = Observable(f.n, E.simplify(E.s_sub(f.expr, _p_dot_grad_p(f))))
    return LiftedField(hamiltonian_vector_field(f), rate)


def project(V):
    """pi_* V: forget the fiber component."""
    return V.base


def evaluate_lifted(V, z):
    if V.n != z.n:
        raise DimensionMismatch("field and point disagree on n")
    t = evaluate_field(V.base, z.base)
    return LiftedTangent(t.dq, t.dp, V.theta_rate(z.base.q, z.base.p))


def connection_pairing(v, z):
    """alpha(v) = p.dq + dtheta at the lifted point ``z``."""
    if v.n != z.n:
        raise DimensionMismatch("tangent vector and point disagree on n")
    return float(np.dot(z.base.p, v.dq) + v.dtheta)


def lifted_lie_bracket(V, W):
    """Bracket of two lifted fields as a field on L.

    Components are theta-independent, so the fiber component is
    V(W_theta) - W(V_theta) with V acting through its base part.
    Returns ``(base VectorField, fiber rate Observable)``.
    """
    base = field_lie_bracket(V.base, W.base)
    rate = V.base.apply(W.theta_rate) - W.base.apply(V.theta_rate)
    return base, rate


# connection form as data ------------------------------------------------------


@dataclass(frozen=True)
class ConnectionForm:
    """alpha = p.dq + dtheta in the single global trivialization.

    ``potential`` holds the coefficients of the symplectic potential p.dq
    on the coordinate 1-forms (dq1..dqn, dp1..dpn).
    """

    n: int

    @property
    def potential(self):
        qs, ps = coordinates(self.n)
        zero = Observable.constant(0.0, self.n)
        return tuple(ps) + tuple(zero for _ in range(self.n))

    def pair(self, v, z):
        return connection_pairing(v, z)

    def curvature(self):
        """Coefficient matrix C[j][k] = d_j a_k - d_k a_j of d(p.dq)."""
        names = [f"q{i}" for i in range(1, self.n + 1)] + [f"p{i}" for i in range(1, self.n + 1)]
        a = self.potential
        return [[a[k].diff(names[j]) - a[j].diff(names[k]) for k in range(2 * self.n)] for j in range(2 * self.n)]

    def curvature_matches_symplectic_form(self):
        """True when every coefficient of d(p.dq) simplifies to the w0 entry."""
        from .symplectic import symplectic_matrix

        W = symplectic_matrix(self.n)
        C = self.curvature()
        for j, row in enumerate(C):
            for k, c in enumerate(row):
                if not isinstance(c.expr, E.Const) or c.expr.value != W[j, k]:
                    return False
        return True


# lifted flows ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LiftedTrajectory:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    theta: np.ndarray
    hamiltonian: Observable
    dt: float
    kind: IntegratorKind = IntegratorKind.IMPLICIT_MIDPOINT
    _energy: list = field(default_factory=list, repr=False)

    @property
    def n(self):
        return self.q.shape[1]

    def __len__(self):
        return len(self.t)

    @property
    def phase(self):
        return np.exp(1j * self.theta)

    def point(self, k):
        return LiftedPoint(PhasePoint(self.q[k], self.p[k]), self.theta[k])

    def energies(self):
        if not self._energy:
            self._energy.append(self.hamiltonian.evaluate_array(self.q.T, self.p.T))
        return self._energy[0]

    def columns(self):
        n = self.n
        return (
            ["t"] + [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
            + ["theta", "phase_re", "phase_im", "H"]
        )

    def table(self):
        ph = self.phase
        return np.column_stack([self.t, self.q, self.p, self.theta, ph.real, ph.imag, self.energies()])

    def to_csv(self, fh=None):
        return write_csv(self.columns(), self.table(), fh)


def integrate_lifted(H, z0, dt, steps, kind=IntegratorKind.IMPLICIT_MIDPOINT, split=None, t0=0.0):
    """Follow V_H from the lifted point ``z0``: base flow plus theta' = -Lambda."""
    rate = lift_field(H).theta_rate
    zs, thetas = _run(H, z0.base, dt, steps, kind, split, rate=rate, theta0=z0.theta)
    n = H.n
    return LiftedTrajectory(
        t=sample_times(t0, dt, int(steps)),
        q=zs[:, :n].copy(),
        p=zs[:, n:].copy(),
        theta=thetas,
        hamiltonian=H,
        dt=float(dt),
        kind=_kind(kind),
    )


class Holonomy(NamedTuple):
    phase: complex
    delta_theta: float


def holonomy_phase(traj):
    """exp(i theta_final) and the accumulated theta_final - theta_0."""
    return Holonomy(cmath.exp(1j * float(traj.theta[-1])), float(traj.theta[-1] - traj.theta[0]))
