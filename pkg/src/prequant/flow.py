"""Numerical flows of Hamiltonian vector fields and their diagnostics."""

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from .errors import DimensionMismatch, DomainError, NoConvergence, NonSeparable
from .observable import Observable
from .symplectic import PhasePoint, hamiltonian_vector_field, poisson_bracket, symplectic_matrix

MIDPOINT_TOL = 1e-12
MIDPOINT_MAX_ITER = 50
FD_JACOBIAN_EPS = 1e-6


class IntegratorKind(str, enum.Enum):
    RK4 = "rk4"
    STORMER_VERLET = "stormer_verlet"
    IMPLICIT_MIDPOINT = "implicit_midpoint"


@dataclass(frozen=True)
class SeparableSplit:
    """Declared decomposition H = T(p) + V(q), required by Stormer-Verlet."""

    kinetic: Observable
    potential: Observable

    def __post_init__(self):
        if self.kinetic.n != self.potential.n:
            raise DimensionMismatch("kinetic and potential parts disagree on n")
        if self.kinetic.depends_on("q"):
            raise NonSeparable(f"kinetic part {self.kinetic} depends on positions")
        if self.potential.depends_on("p"):
            raise NonSeparable(f"potential part {self.potential} depends on momenta")

    @classmethod
    def parse(cls, kinetic, potential, n):
        return cls(Observable.parse(kinetic, n), Observable.parse(potential, n))

    @property
    def n(self):
        return self.kinetic.n

    def check_matches(self, H, z):
        """Raise NonSeparable unless T + V agrees with H near ``z``."""
        if H.n != self.n:
            raise DimensionMismatch("split and Hamiltonian disagree on n")
        base = np.concatenate([z.q, z.p])
        offsets = [0.0, 0.37, -0.61, 1.13]
        checked = 0
        for k, off in enumerate(offsets):
            shift = off * np.cos(np.arange(2 * self.n) + k)
            w = base + shift
            q, p = w[: self.n], w[self.n:]
            try:
                h = H(q, p)
                tv = self.kinetic(q, p) + self.potential(q, p)
            except DomainError:
                continue
            checked += 1
            if abs(h - tv) > 1e-10 * max(1.0, abs(h)):
                raise NonSeparable(f"declared T + V does not match H at {w.tolist()}")
        if not checked:
            raise NonSeparable("could not evaluate H or T + V near the initial point")


def _kind(kind):
    try:
        return IntegratorKind(kind)
    except ValueError:
        raise ValueError(f"unknown integrator {kind!r}") from None


def _field_fn(H):
    X = hamiltonian_vector_field(H)
    return E.compile_exprs(tuple(c.expr for c in X.components), "scalar")


def make_stepper(H, kind, split=None, rate=None):
    """Return ``advance(z, dt) -> (z_new, theta_increment)`` on flat lists.

    ``z`` is ``[q1..qn, p1..pn]``.  When ``rate`` (an Observable) is given,
    the increment is a quadrature of ``rate`` over the step matched to the
    scheme's order; otherwise it is 0.0.
    """
    kind = _kind(kind)
    n = H.n
    rate_fn = E.compile_exprs((rate.expr,), "scalar") if rate is not None else None

    if kind is IntegratorKind.STORMER_VERLET:
        if split is None:
            raise NonSeparable("stormer_verlet needs a declared separable split")
        if split.n != n:
            raise DimensionMismatch("split and Hamiltonian disagree on n")
        grad_t = E.compile_exprs(
            tuple(split.kinetic.diff(f"p{i}").expr for i in range(1, n + 1)), "scalar"
        )
        grad_v = E.compile_exprs(
            tuple(split.potential.diff(f"q{i}").expr for i in range(1, n + 1)), "scalar"
        )

        def advance(z, dt):
            q, p = z[:n], z[n:]
            gv = grad_v(q, p)
            half = [p[i] - 0.5 * dt * gv[i] for i in range(n)]
            gt = grad_t(q, half)
            q1 = [q[i] + dt * gt[i] for i in range(n)]
            gv = grad_v(q1, half)
            p1 = [half[i] - 0.5 * dt * gv[i] for i in range(n)]
            inc = 0.0
            if rate_fn is not None:
                qm = [0.5 * (q[i] + q1[i]) for i in range(n)]
                inc = dt * rate_fn(qm, half)[0]
            return q1 + p1, inc

        return advance

    F = _field_fn(H)

    def f(z):
        return F(z[:n], z[n:])

    def r(z):
        return rate_fn(z[:n], z[n:])[0]

    m = 2 * n
    if kind is IntegratorKind.RK4:

        def advance(z, dt):
            k1 = f(z)
            z2 = [z[i] + 0.5 * dt * k1[i] for i in range(m)]
            k2 = f(z2)
            z3 = [z[i] + 0.5 * dt * k2[i] for i in range(m)]
            k3 = f(z3)
            z4 = [z[i] + dt * k3[i] for i in range(m)]
            k4 = f(z4)
            z1 = [z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(m)]
            inc = 0.0
            if rate_fn is not None:
                inc = dt / 6.0 * (r(z) + 2.0 * r(z2) + 2.0 * r(z3) + r(z4))
            return z1, inc

        return advance

    def advance(z, dt):
        k = f(z)
        z1 = [z[i] + dt * k[i] for i in range(m)]
        for it in range(MIDPOINT_MAX_ITER):
            mid = [0.5 * (z[i] + z1[i]) for i in range(m)]
            try:
                k = f(mid)
            except DomainError as exc:
                # iterates ran away from the domain: the map is not contracting
                raise NoConvergence(f"implicit midpoint iteration diverged after {it} iterations: {exc}") from exc
            new = [z[i] + dt * k[i] for i in range(m)]
            delta = max(abs(new[i] - z1[i]) for i in range(m))
            z1 = new
            if delta <= MIDPOINT_TOL * max(1.0, max(abs(v) for v in new)):
                break
        else:
            raise NoConvergence(
                f"implicit midpoint did not converge in {MIDPOINT_MAX_ITER} iterations "
                f"(last update {delta:.3e})"
            )
        inc = 0.0
        if rate_fn is not None:
            inc = dt * r([0.5 * (z[i] + z1[i]) for i in range(m)])
        return z1, inc

    return advance


def step(H, z, dt, kind=IntegratorKind.IMPLICIT_MIDPOINT, split=None):
    """One step of the named scheme.  Negative ``dt`` steps backwards."""
    if z.n != H.n:
        raise DimensionMismatch(f"point dimension {z.n} != observable dimension {H.n}")
    if not dt or not math.isfinite(dt):
        raise ValueError("dt must be a non-zero finite number")
    z1, _ = make_stepper(H, kind, split)(list(z.as_array()), float(dt))
    return PhasePoint.from_array(z1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of a numerical flow.  ``t[k] == t0 + k*dt`` for every k."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    hamiltonian: Observable
    dt: float
    kind: IntegratorKind = IntegratorKind.IMPLICIT_MIDPOINT
    _energy: list = field(default_factory=list, repr=False)

    @property
    def n(self):
        return self.q.shape[1]

    @property
    def steps(self):
        return len(self.t) - 1

    def __len__(self):
        return len(self.t)

    def point(self, k):
        return PhasePoint(self.q[k], self.p[k])

    @property
    def final(self):
        return self.point(-1)

    def evaluate(self, f):
        """Values of an observable at every sample."""
        return f.evaluate_array(self.q.T, self.p.T)

    def energies(self):
        if not self._energy:
            self._energy.append(self.evaluate(self.hamiltonian))
        return self._energy[0]

    def columns(self):
        cols = ["t"] + [f"q{i}" for i in range(1, self.n + 1)] + [f"p{i}" for i in range(1, self.n + 1)]
        return cols + ["H"]

    def table(self):
        return np.column_stack([self.t, self.q, self.p, self.energies()])

    def to_csv(self, fh=None):
        return write_csv(self.columns(), self.table(), fh)


def sample_times(t0, dt, steps):
    return t0 + np.arange(steps + 1, dtype=float) * dt


def _run(H, z0, dt, steps, kind, split, rate=None, theta0=0.0):
    if z0.n != H.n:
        raise DimensionMismatch(f"point dimension {z0.n} != observable dimension {H.n}")
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError("dt must be positive and finite")
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    kind = _kind(kind)
    if kind is IntegratorKind.STORMER_VERLET:
        if split is None:
            raise NonSeparable("stormer_verlet needs a declared separable split")
        split.check_matches(H, z0)
    advance = make_stepper(H, kind, split, rate)
    zs = np.empty((steps + 1, 2 * H.n))
    thetas = np.empty(steps + 1)
    z = list(z0.as_array())
    zs[0] = z
    # compensated running sum keeps the fiber coordinate free of drift from summation
    total, comp = float(theta0), 0.0
    thetas[0] = total
    for k in range(1, steps + 1):
        z, inc = advance(z, dt)
        zs[k] = z
        y = inc - comp
        s = total + y
        comp = (s - total) - y
        total = s
        thetas[k] = total
    return zs, thetas


def integrate(H, z0, dt, steps, kind=IntegratorKind.IMPLICIT_MIDPOINT, split=None, t0=0.0):
    """Integrate the flow of X_H for ``steps`` uniform steps of size ``dt``."""
    zs, _ = _run(H, z0, dt, steps, kind, split)
    n = H.n
    return Trajectory(
        t=sample_times(t0, dt, int(steps)),
        q=zs[:, :n].copy(),
        p=zs[:, n:].copy(),
        hamiltonian=H,
        dt=float(dt),
        kind=_kind(kind),
    )


def energy_drift(traj):
    """max_k |H(z_k) - H(z_0)|."""
    h = traj.energies()
    return float(np.max(np.abs(h - h[0])))


def flow_map(H, z, T, dt, kind=IntegratorKind.IMPLICIT_MIDPOINT, split=None):
    """Approximate time-T flow map applied to ``z``.

    Uses ``round(T/dt)`` steps, with the step shrunk slightly so that the
    total time is exactly T.
    """
    steps = int(round(abs(T) / dt))
    if steps == 0:
        return PhasePoint(z.q, z.p)
    advance = make_stepper(H, kind, split)
    h = T / steps
    w = list(z.as_array())
    for _ in range(steps):
        w, _ = advance(w, h)
    return PhasePoint.from_array(w)


def flow_jacobian(H, z0, T, dt, kind=IntegratorKind.IMPLICIT_MIDPOINT, split=None):
    """Central finite-difference Jacobian of the time-T flow map at ``z0``.

    Rows and columns are in (q1..qn, p1..pn) order.  Coordinate j is
    perturbed by 1e-6 * max(1, |z0_j|).
    """
    base = z0.as_array()
    m = len(base)
    if split is not None:
        split.check_matches(H, z0)
    J = np.empty((m, m))
    for j in range(m):
        eps = FD_JACOBIAN_EPS * max(1.0, abs(base[j]))
        plus = base.copy()
        minus = base.copy()
        plus[j] += eps
        minus[j] -= eps
        fp = flow_map(H, PhasePoint.from_array(plus), T, dt, kind, split).as_array()
        fm = flow_map(H, PhasePoint.from_array(minus), T, dt, kind, split).as_array()
        J[:, j] = (fp - fm) / (plus[j] - minus[j])
    return J


def symplecticity_defect(J):
    """max |J^T W J - W| with W the matrix of w0 in (q, p) order."""
    J = np.asarray(J, dtype=float)
    m = J.shape[0]
    if J.shape != (m, m) or m % 2:
        raise DimensionMismatch("Jacobian must be square with even size")
    W = symplectic_matrix(m // 2)
    return float(np.max(np.abs(J.T @ W @ J - W)))


def observable_evolution_defect(f, traj):
    """Largest gap between d/dt f(z(t)) (centered differences) and {H, f}."""
    if f.n != traj.n:
        raise DimensionMismatch("observable and trajectory disagree on n")
    if len(traj) < 3:
        return 0.0
    vals = traj.evaluate(f)
    rate = traj.evaluate(poisson_bracket(traj.hamiltonian, f))
    fd = (vals[2:] - vals[:-2]) / (traj.t[2:] - traj.t[:-2])
    return float(np.max(np.abs(fd - rate[1:-1])))


def write_csv(columns, table, fh=None):
    """Write a header plus rows at 17 significant digits.

    Returns the text when ``fh`` is None.
    """
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in np.asarray(table, dtype=float):
        writer.writerow([format(float(v), ".17g") for v in row])
    if fh is None:
        return out.getvalue()
    return None
