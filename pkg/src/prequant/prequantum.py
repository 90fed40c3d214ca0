"""Prequantum operators acting on sections of the trivial line bundle.

In the global trivialization a section is a complex function
s(q, p) = re + i*im, kept symbolic so operator products and commutators
are exact up to evaluation roundoff.  The covariant derivative with
curvature w0 is

    nabla_X s = X(s) - (i/hbar) * theta0(X) * s,   theta0 = p.dq,

and the operator attached to an observable f is

    Omega(f) s = -i*hbar*nabla_{X_f} s + f*s.

It satisfies Omega({f, g}) = (i/hbar)[Omega(f), Omega(g)] with the bracket
of ``symplectic.poisson_bracket``, and Omega(1) = identity.  Setting
hbar = 1/(2pi), (i/hbar)*Omega(f) = nabla_{X_f} + 2*pi*i*f.
"""

import math
import numbers
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .errors import DimensionMismatch, EvenGridError, NonDecayingSection
from .observable import Observable
from .symplectic import PhasePoint, hamiltonian_vector_field, poisson_bracket


@dataclass(frozen=True)
class Section:
    """A complex-valued function re + i*im on phase space."""

    re: Observable
    im: Observable

    def __post_init__(self):
        if self.re.n != self.im.n:
            raise DimensionMismatch("real and imaginary parts disagree on n")

    @classmethod
    def parse(cls, re, im="0", n=1):
        return cls(Observable.parse(re, n), Observable.parse(im, n))

    @classmethod
    def real(cls, f):
        return cls(f, Observable.constant(0.0, f.n))

    @property
    def n(self):
        return self.re.n

    def simplify(self):
        return Section(self.re.simplify(), self.im.simplify())

    # evaluation ----------------------------------------------------------

    def __call__(self, q, p):
        fn = E.compile_exprs((self.re.expr, self.im.expr), "scalar")
        a, b = fn(q, p)
        return complex(a, b)

    def evaluate(self, z):
        return self(z.q, z.p)

    def evaluate_array(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        a, b = E.compile_exprs((self.re.expr, self.im.expr), "array")(q, p)
        shape = q.shape[1:]
        return np.broadcast_to(np.asarray(a, float), shape) + 1j * np.broadcast_to(
            np.asarray(b, float), shape
        )

    # arithmetic ----------------------------------------------------------

    def _check(self, other):
        if other.n != self.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n} differ")

    def __add__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        self._check(other)
        return Section(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        if not isinstance(other, Section):
            return NotImplemented
        self._check(other)
        return Section(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return Section(-self.re, -self.im)

    def scale(self, c):
        """Multiply by the complex constant ``c``."""
        c = complex(c)
        a, b = c.real, c.imag
        return Section(self.re * a - self.im * b, self.im * a + self.re * b)

    def multiply(self, f):
        """Multiply by the real observable ``f``."""
        return Section(self.re * f, self.im * f)

    def __mul__(self, other):
        if isinstance(other, Observable):
            return self.multiply(other)
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def apply_field(self, X):
        """Directional derivative X(s), applied to both parts."""
        return Section(X.apply(self.re), X.apply(self.im))


def symplectic_potential(X):
    """theta0(X) = sum_i p_i * X.dq_i as an observable."""
    total = E.ZERO
    for i, c in enumerate(X.dq, start=1):
        total = E.s_add(total, E.s_mul(E.Var("p", i), c.expr))
    return Observable(X.n, total)


def covariant_derivative(X, s, hbar=1.0):
    """nabla_X s = X(s) - (i/hbar) theta0(X) s."""
    if X.n != s.n:
        raise DimensionMismatch("field and section disagree on n")
    ds = s.apply_field(X)
    a = symplectic_potential(X) / float(hbar)
    # -(i a) (re + i im) = a im - i a re
    return Section(ds.re + a * s.im, ds.im - a * s.re).simplify()


@dataclass(frozen=True)
class PrequantumOperator:
    generator: Observable
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError("hbar must be positive and finite")

    @property
    def n(self):
        return self.generator.n

    @property
    def field(self):
        return hamiltonian_vector_field(self.generator)

    def __call__(self, s):
        return apply_prequantum(self, s)


def apply_prequantum(op, s):
    """Omega(f) s = -i hbar nabla_{X_f} s + f s."""
    if op.n != s.n:
        raise DimensionMismatch("operator and section disagree on n")
    f = op.generator
    h = float(op.hbar)
    X = op.field
    # -i h nabla_X s + f s = -i h X(s) + (f - theta0(X)) s; this grouping never
    # divides by hbar, so the potential term cancels exactly when it should
    ds = s.apply_field(X)
    m = f - symplectic_potential(X)
    # -i h (u + i v) = h v - i h u
    return Section(ds.im * h + m * s.re, m * s.im - ds.re * h).simplify()


def commutator(A, B, s):
    """[A, B] s = A(B s) - B(A s)."""
    return A(B(s)) - B(A(s))


def _as_grid(points, n):
    if isinstance(points, (list, tuple)) and points and isinstance(points[0], PhasePoint):
        arr = np.array([z.as_array() for z in points])
    else:
        arr = np.asarray(points, dtype=float).reshape(-1, 2 * n)
    return arr[:, :n].T, arr[:, n:].T


def dirac_sides(f, g, s, hbar=1.0):
    """Both sides of Omega({f,g}) s = (i/hbar)[Omega(f), Omega(g)] s as sections."""
    left = PrequantumOperator(poisson_bracket(f, g), hbar)(s)
    right = commutator(PrequantumOperator(f, hbar), PrequantumOperator(g, hbar), s).scale(1j / hbar)
    return left, right


def dirac_residual(f, g, s, points, hbar=1.0):
    """max over ``points`` of |Omega({f,g}) s - (i/hbar)[Omega(f), Omega(g)] s|."""
    if not (f.n == g.n == s.n):
        raise DimensionMismatch("f, g and s must share n")
    left, right = dirac_sides(f, g, s, hbar)
    q, p = _as_grid(points, f.n)
    return float(np.max(np.abs(left.evaluate_array(q, p) - right.evaluate_array(q, p))))


def two_pi_operator(f, s):
    """nabla_{X_f} s + 2*pi*i*f*s with the connection at hbar = 1/(2pi)."""
    hbar = 1.0 / (2.0 * math.pi)
    return covariant_derivative(hamiltonian_vector_field(f), s, hbar) + s.multiply(f).scale(2j * math.pi)


def normalization_residual(f, s, points):
    """Compare (i/hbar)*Omega(f) at hbar = 1/(2pi) with the 2*pi*i form, term by term.

    Returns the largest pointwise gap among the derivative term, the
    multiplication term and the total.
    """
    hbar = 1.0 / (2.0 * math.pi)
    q, p = _as_grid(points, f.n)
    nab = covariant_derivative(hamiltonian_vector_field(f), s, hbar)
    scaled_deriv = nab.scale(-1j * hbar).scale(1j / hbar)
    scaled_mult = s.multiply(f).scale(1j / hbar)
    scaled_total = PrequantumOperator(f, hbar)(s).scale(1j / hbar)
    two_pi_mult = s.multiply(f).scale(2j * math.pi)
    pairs = [
        (scaled_deriv, nab),
        (scaled_mult, two_pi_mult),
        (scaled_total, two_pi_operator(f, s)),
    ]
    return float(max(np.max(np.abs(a.evaluate_array(q, p) - b.evaluate_array(q, p))) for a, b in pairs))


# symmetry surrogate -----------------------------------------------------------


def _gaussian_exponent(g, n):
    names = [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    hess = np.empty((2 * n, 2 * n))
    for j, a in enumerate(names):
        for k, b in enumerate(names):
            c = g.diff(a).diff(b).expr
            if not isinstance(c, E.Const):
                return False
            hess[j, k] = c.value
    return bool(np.all(np.linalg.eigvalsh(0.5 * (hess + hess.T)) < 0))


def _decays(e, n):
    if isinstance(e, E.Const):
        return e.value == 0.0
    if isinstance(e, E.Neg):
        return _decays(e.arg, n)
    if isinstance(e, E.Mul):
        return _decays(e.left, n) or _decays(e.right, n)
    if isinstance(e, E.Div):
        return _decays(e.left, n)
    if isinstance(e, (E.Add, E.Sub)):
        return _decays(e.left, n) and _decays(e.right, n)
    if isinstance(e, E.Func) and e.name == "exp":
        return _gaussian_exponent(Observable(n, e.arg), n)
    return False


def has_gaussian_factor(s):
    """Both parts vanish or carry a multiplicative exp(negative-definite quadratic)."""
    return all(_decays(E.simplify(part.expr), s.n) for part in (s.re, s.im))


def simpson_weights(m, half_width):
    if m < 3 or m % 2 == 0:
        raise EvenGridError(f"Simpson's rule needs an odd number of points >= 3, got {m}")
    h = 2.0 * half_width / (m - 1)
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def inner_product(a, b, half_width, m):
    """<a, b> = integral of conj(a)*b over [-L, L]^2 (n = 1, tensor Simpson)."""
    if a.n != 1 or b.n != 1:
        raise DimensionMismatch("the quadrature inner product is implemented for n = 1")
    w = simpson_weights(m, half_width)
    x = np.linspace(-half_width, half_width, m)
    Q, P = np.meshgrid(x, x, indexing="ij")
    va = a.evaluate_array(Q[None], P[None])
    vb = b.evaluate_array(Q[None], P[None])
    return complex(np.sum(np.outer(w, w) * np.conj(va) * vb))


def symmetry_defect(f, s1, s2, half_width=6.0, m=201, hbar=1.0):
    """|<Omega(f) s1, s2> - <s1, Omega(f) s2>| by quadrature on [-L, L]^2.

    A finite check that Omega(f) is symmetric on rapidly decaying
    sections; it is not a proof of self-adjointness.
    """
    if f.n != 1 or s1.n != 1 or s2.n != 1:
        raise DimensionMismatch("symmetry_defect is defined for n = 1 only")
    if m < 3 or m % 2 == 0:
        raise EvenGridError(f"grid size must be odd and >= 3, got {m}")
    for s in (s1, s2):
        if not has_gaussian_factor(s):
            raise NonDecayingSection(f"section ({s.re}) + i({s.im}) has no Gaussian factor")
    op = PrequantumOperator(f, hbar)
    lhs = inner_product(op(s1), s2, half_width, m)
    rhs = inner_product(s1, op(s2), half_width, m)
    return abs(lhs - rhs)
