"""Hamiltonian vector fields and Poisson brackets on (R^2n, w0 = sum dp_i ^ dq_i).

Sign conventions
----------------
``hamiltonian_vector_field`` follows X_f = sum(df/dp_i d/dq_i - df/dq_i d/dp_i),
which solves i_X w0 = -df for the form above.  With that field two brackets
are available:

* ``poisson_bracket(f, g) = w0(X_f, X_g) = sum(f_p g_q - f_q g_p)``.  This is
  the library's bracket: it makes f -> X_f a Lie algebra homomorphism
  ([X_f, X_g] = X_{f,g}) and gives df/dt = {H, f} along the flow of H.
* ``canonical_poisson_bracket(f, g) = sum(f_q g_p - f_p g_q)``, the textbook
  coordinate formula, which is the negative of the above.
"""

from dataclasses import dataclass

import numpy as np

from . import expr as E
from .errors import DimensionMismatch
from .observable import Observable


def _frozen_array(values, n=None, name="vector"):
    arr = np.array(values, dtype=float).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point (q, p) of R^2n."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _frozen_array(self.q, name="q")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", _frozen_array(self.p, len(q), "p"))

    @property
    def n(self):
        return len(self.q)

    def as_array(self):
        """Concatenated ``[q, p]``."""
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_array(cls, z):
        z = np.asarray(z, dtype=float)
        n = len(z) // 2
        return cls(z[:n], z[n:])

    def __eq__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.q.tobytes(), self.p.tobytes()))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent direction (dq, dp) at some point of R^2n."""

    dq: np.ndarray
    dp: np.ndarray

    def __post_init__(self):
        dq = _frozen_array(self.dq, name="dq")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "dp", _frozen_array(self.dp, len(dq), "dp"))

    @property
    def n(self):
        return len(self.dq)

    def as_array(self):
        return np.concatenate([self.dq, self.dp])

    @classmethod
    def basis(cls, n):
        """The 2n coordinate directions d/dq_1..d/dq_n, d/dp_1..d/dp_n."""
        eye = np.eye(2 * n)
        return [cls(row[:n], row[n:]) for row in eye]

    def __eq__(self, other):
        if not isinstance(other, TangentVector):
            return NotImplemented
        return np.array_equal(self.dq, other.dq) and np.array_equal(self.dp, other.dp)

    def __hash__(self):
        return hash((self.dq.tobytes(), self.dp.tobytes()))


@dataclass(frozen=True)
class VectorField:
    """A vector field on R^2n with symbolic components."""

    dq: tuple
    dp: tuple

    def __post_init__(self):
        object.__setattr__(self, "dq", tuple(self.dq))
        object.__setattr__(self, "dp", tuple(self.dp))
        if len(self.dq) != len(self.dp) or not self.dq:
            raise DimensionMismatch("dq and dp need the same positive length")
        if any(c.n != self.n for c in self.dq + self.dp):
            raise DimensionMismatch("component observables disagree on n")

    @property
    def n(self):
        return len(self.dq)

    @property
    def components(self):
        return self.dq + self.dp

    def __call__(self, z):
        return evaluate_field(self, z)

    def apply(self, g):
        """Directional derivative X(g) as an observable."""
        _check_n(self, g)
        total = E.ZERO
        for i in range(1, self.n + 1):
            total = E.s_add(total, E.s_mul(self.dq[i - 1].expr, g.diff(f"q{i}").expr))
            total = E.s_add(total, E.s_mul(self.dp[i - 1].expr, g.diff(f"p{i}").expr))
        return Observable(self.n, total)

    def is_zero(self):
        return all(isinstance(c.expr, E.Const) and c.expr.value == 0.0 for c in self.components)


@dataclass(frozen=True)
class HamiltonianField(VectorField):
    """X_f: dq_i = df/dp_i, dp_i = -df/dq_i."""

    generator: Observable = None


def _check_n(*things):
    ns = {t.n for t in things}
    if len(ns) != 1:
        raise DimensionMismatch(f"mismatched dimensions {sorted(ns)}")


def hamiltonian_vector_field(f):
    dq = [f.diff(f"p{i}") for i in range(1, f.n + 1)]
    dp = [-f.diff(f"q{i}") for i in range(1, f.n + 1)]
    return HamiltonianField(dq, dp, generator=f)


def evaluate_field(X, z):
    _check_n(X, z)
    fn = E.compile_exprs(tuple(c.expr for c in X.components), "scalar")
    vals = fn(z.q, z.p)
    return TangentVector(vals[: X.n], vals[X.n:])


def symplectic_product(u, v):
    """w0(u, v) = sum_i (u.dp_i v.dq_i - u.dq_i v.dp_i)."""
    _check_n(u, v)
    return float(np.dot(u.dp, v.dq) - np.dot(u.dq, v.dp))


def directional_derivative(f, z, v):
    """df(v) at z."""
    _check_n(f, z, v)
    grads = [f.diff(f"q{i}") for i in range(1, f.n + 1)] + [
        f.diff(f"p{i}") for i in range(1, f.n + 1)
    ]
    fn = E.compile_exprs(tuple(g.expr for g in grads), "scalar")
    return float(np.dot(fn(z.q, z.p), v.as_array()))


def poisson_bracket(f, g):
    """{f, g} = w0(X_f, X_g) = sum_i (df/dp_i dg/dq_i - df/dq_i dg/dp_i)."""
    _check_n(f, g)
    total = E.ZERO
    for i in range(1, f.n + 1):
        qi, pi = f"q{i}", f"p{i}"
        total = E.s_add(total, E.s_mul(f.diff(pi).expr, g.diff(qi).expr))
        total = E.s_sub(total, E.s_mul(f.diff(qi).expr, g.diff(pi).expr))
    return Observable(f.n, E.simplify(total))


def canonical_poisson_bracket(f, g):
    """Textbook formula sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i)."""
    _check_n(f, g)
    total = E.ZERO
    for i in range(1, f.n + 1):
        qi, pi = f"q{i}", f"p{i}"
        total = E.s_add(total, E.s_mul(f.diff(qi).expr, g.diff(pi).expr))
        total = E.s_sub(total, E.s_mul(f.diff(pi).expr, g.diff(qi).expr))
    return Observable(f.n, E.simplify(total))


def field_lie_bracket(X, Y):
    """[X, Y] = (X.grad) Y - (Y.grad) X, componentwise and symbolic."""
    _check_n(X, Y)
    comps = [X.apply(b) - Y.apply(a) for a, b in zip(X.components, Y.components)]
    return VectorField(comps[: X.n], comps[X.n:])


def symplectic_matrix(n):
    """Matrix of w0 in (q, p) ordering: entry (q_i, p_j) is w0(d/dq_i, d/dp_j) = -delta_ij."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])
