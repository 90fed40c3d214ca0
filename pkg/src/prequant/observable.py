"""Observables: real-valued expressions on the phase space R^2n."""

import itertools
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .errors import DimensionMismatch, UnknownVariable
from .parser import _VAR, parse_expr


@dataclass(frozen=True)
class Observable:
    """An expression in q1..qn, p1..pn together with its dimension ``n``.

    Instances are immutable.  Arithmetic between observables (and with
    plain numbers) builds new observables through the exact simplifying
    constructors.
    """

    n: int
    expr: E.Expr

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("dimension n must be a positive integer")
        for v in E.free_vars(self.expr):
            if v.index > self.n:
                raise UnknownVariable(v.name, self.n)

    # construction --------------------------------------------------------

    @classmethod
    def parse(cls, text, n):
        return cls(n, parse_expr(text, n))

    @classmethod
    def constant(cls, value, n):
        return cls(n, E.Const(value))

    @classmethod
    def coordinate(cls, name, n):
        return cls(n, var_ref(name, n))

    # evaluation ----------------------------------------------------------

    def __call__(self, q, p):
        """Evaluate at a single point given position and momentum sequences."""
        return E.compile_exprs((self.expr,), "scalar")(q, p)[0]

    def evaluate_array(self, q, p):
        """Vectorized evaluation; ``q`` and ``p`` have shape ``(n, ...)``."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        val = E.compile_exprs((self.expr,), "array")(q, p)[0]
        return np.broadcast_to(np.asarray(val, dtype=float), q.shape[1:]).copy()

    # symbolic ------------------------------------------------------------

    def diff(self, var):
        v = var if isinstance(var, E.Var) else var_ref(var, self.n)
        if v.index > self.n:
            raise UnknownVariable(v.name, self.n)
        return Observable(self.n, E.simplify(E.diff(E.simplify(self.expr), v)))

    def simplify(self):
        return Observable(self.n, E.simplify(self.expr))

    def is_constant(self):
        return not E.free_vars(self.expr)

    def depends_on(self, kind):
        return any(v.kind == kind for v in E.free_vars(self.expr))

    def __str__(self):
        return E.to_text(self.expr)

    def __repr__(self):
        return f"Observable(n={self.n}, {E.to_text(self.expr)!r})"

    # arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Observable):
            if other.n != self.n:
                raise DimensionMismatch(f"dimensions {self.n} and {other.n} differ")
            return other.expr
        if isinstance(other, (int, float, np.floating, np.integer)):
            return E.Const(float(other))
        return NotImplemented

    def _binary(self, other, op, reflected=False):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = (o, self.expr) if reflected else (self.expr, o)
        return Observable(self.n, op(a, b))

    def __add__(self, other):
        return self._binary(other, E.s_add)

    def __radd__(self, other):
        return self._binary(other, E.s_add, True)

    def __sub__(self, other):
        return self._binary(other, E.s_sub)

    def __rsub__(self, other):
        return self._binary(other, E.s_sub, True)

    def __mul__(self, other):
        return self._binary(other, E.s_mul)

    def __rmul__(self, other):
        return self._binary(other, E.s_mul, True)

    def __truediv__(self, other):
        return self._binary(other, E.s_div)

    def __rtruediv__(self, other):
        return self._binary(other, E.s_div, True)

    def __neg__(self):
        return Observable(self.n, E.s_neg(self.expr))

    def __pow__(self, k):
        if isinstance(k, float) and not k.is_integer():
            raise ValueError("only integer exponents are supported")
        return Observable(self.n, E.s_pow(self.expr, int(k)))


def var_ref(name, n=None):
    """Turn ``"q1"``/``"p2"`` into a variable node, checking ``n`` if given."""
    if isinstance(name, E.Var):
        v = name
    else:
        m = _VAR.match(str(name))
        if m is None or int(m.group(2)) < 1:
            raise UnknownVariable(str(name), n if n is not None else 0)
        v = E.Var(m.group(1), int(m.group(2)))
    if n is not None and v.index > n:
        raise UnknownVariable(v.name, n)
    return v


def coordinates(n):
    """The coordinate observables ``([q1..qn], [p1..pn])``."""
    qs = [Observable(n, E.Var("q", i)) for i in range(1, n + 1)]
    ps = [Observable(n, E.Var("p", i)) for i in range(1, n + 1)]
    return qs, ps


# module-level spellings of the core operations


def parse_observable(text, n):
    return Observable.parse(text, n)


def evaluate(f, z):
    """Evaluate ``f`` at a point carrying ``.q``/``.p`` (or a ``(q, p)`` pair)."""
    q, p = (z.q, z.p) if hasattr(z, "q") else z
    if len(q) != f.n or len(p) != f.n:
        raise DimensionMismatch(f"point has dimension {len(q)}, observable {f.n}")
    return f(q, p)


def differentiate(f, var):
    return f.diff(var)


def simplify(f):
    return f.simplify()


def random_polynomial(n, degree, rng):
    """Polynomial in q1..qn, p1..pn of total degree <= ``degree``.

    Every monomial gets a coefficient drawn uniformly from [-1, 1].
    """
    variables = [E.Var("q", i) for i in range(1, n + 1)] + [E.Var("p", i) for i in range(1, n + 1)]
    total = E.ZERO
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(2 * n), d):
            term = E.Const(float(rng.uniform(-1.0, 1.0)))
            for idx in sorted(set(combo)):
                term = E.s_mul(term, E.s_pow(variables[idx], combo.count(idx)))
            total = E.s_add(total, term)
    return Observable(n, total)
