import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prequant import (
    ConnectionForm,
    IntegratorKind,
    LiftedPoint,
    LiftedTangent,
    Observable,
    PhasePoint,
    SeparableSplit,
    connection_pairing,
    evaluate_field,
    hamiltonian_vector_field,
    holonomy_phase,
    integrate_lifted,
    lagrangian,
    lift_field,
    poisson_bracket,
    project,
)
from prequant.lift import evaluate_lifted, lifted_lie_bracket
from prequant.observable import random_polynomial
from support import at, points


def obs(text, n=1):
    return Observable.parse(text, n)


def same_function(f, g, rng, count=50):
    for z in points(f.n, count, rng):
        a, b = at(f, z), at(g, z)
        assert a == pytest.approx(b, rel=1e-14, abs=1e-14), (str(f), str(g))


OSC = obs("(p1^2 + q1^2)/2")
OSC_SPLIT = SeparableSplit.parse("p1^2/2", "q1^2/2", 1)


# -- Lagrangian and lifted fields --------------------------------------------------


@pytest.mark.parametrize(
    "H, want, n",
    [
        ("(p1^2+q1^2)/2", "(p1^2 - q1^2)/2", 1),
        ("cos(q1) + q1^4", "-(cos(q1) + q1^4)", 1),
        ("p1^2/2", "p1^2/2", 1),
        ("(p1^2 + p2^2)/2 + q1*q2", "(p1^2 + p2^2)/2 - q1*q2", 2),
    ],
)
def test_lagrangian_examples(H, want, n, rng):
    same_function(lagrangian(obs(H, n)), obs(want, n), rng)


def test_constant_lifts_to_pure_fiber_rotation():
    V = lift_field(obs("2.5"))
    assert project(V).is_zero()
    assert V.theta_rate.is_constant() and V.theta_rate([0.0], [0.0]) == 2.5


def test_distinct_constants_give_distinct_lifts():
    rates = {lift_field(obs(repr(c))).theta_rate([0.0], [0.0]) for c in (-1.0, 0.0, 0.5, 1.0, 3.0)}
    assert len(rates) == 5


def test_oscillator_fiber_rate_is_minus_lagrangian(rng):
    V = lift_field(OSC)
    same_function(V.theta_rate, obs("(q1^2 - p1^2)/2"), rng)
    same_function(V.theta_rate, -lagrangian(OSC), rng)


def test_momentum_lift_has_no_fiber_part():
    V = lift_field(obs("p1"))
    assert V.theta_rate.is_constant() and V.theta_rate([0.0], [0.0]) == 0.0
    v = evaluate_lifted(V, LiftedPoint(PhasePoint([0.3], [1.2]), 0.0))
    assert v.dq.tolist() == [1.0] and v.dp.tolist() == [0.0] and v.dtheta == 0.0


def test_projection_recovers_hamiltonian_field(corpus, rng):
    for f in corpus + [obs("q1^2*p1")]:
        base = project(lift_field(f))
        X = hamiltonian_vector_field(f)
        for a, b in zip(base.components, X.components):
            assert a.expr is b.expr


# -- the connection form ---------------------------------------------------------


def test_connection_returns_generator_at_example_point():
    f = obs("q1*p1")
    z = LiftedPoint(PhasePoint([2.0], [3.0]), 0.7)
    assert connection_pairing(evaluate_lifted(lift_field(f), z), z) == 6.0


def test_connection_on_simple_vectors():
    z = LiftedPoint(PhasePoint([1.0], [0.0]), 0.0)
    assert connection_pairing(LiftedTangent([0.0], [0.0], 1.0), z) == 1.0
    assert connection_pairing(LiftedTangent([4.0], [0.0], 0.0), z) == 0.0


def test_connection_is_linear(rng):
    z = LiftedPoint(PhasePoint([0.4, -1.0], [2.0, 0.5]), 0.0)
    for _ in range(20):
        u = LiftedTangent(*rng.normal(size=(2, 2)), rng.normal())
        v = LiftedTangent(*rng.normal(size=(2, 2)), rng.normal())
        a, b = rng.normal(size=2)
        w = LiftedTangent(a * u.dq + b * v.dq, a * u.dp + b * v.dp, a * u.dtheta + b * v.dtheta)
        want = a * connection_pairing(u, z) + b * connection_pairing(v, z)
        assert connection_pairing(w, z) == pytest.approx(want, abs=1e-13)


def test_connection_of_lift_is_generator(corpus, rng):
    for f in corpus:
        V = lift_field(f)
        for w in points(f.n, 200, rng):
            z = LiftedPoint(PhasePoint(w[: f.n], w[f.n:]), 0.0)
            value = at(f, w)
            assert abs(connection_pairing(evaluate_lifted(V, z), z) - value) <= 1e-12 * max(1.0, abs(value))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_curvature_of_connection_is_omega(n):
    assert ConnectionForm(n).curvature_matches_symplectic_form()


# -- lifted points ----------------------------------------------------------------


def test_lifted_point_fiber_equivalence():
    base = PhasePoint([1.0], [2.0])
    a = LiftedPoint(base, 0.3)
    assert a.fiber_equivalent(LiftedPoint(base, 0.3 + 4 * math.pi))
    assert not a.fiber_equivalent(LiftedPoint(base, 0.3 + math.pi))
    assert not a.fiber_equivalent(LiftedPoint(PhasePoint([1.0], [2.5]), 0.3))


@given(st.floats(-1e4, 1e4))
def test_canonical_theta_range(theta):
    z = LiftedPoint(PhasePoint([0.0], [0.0]), theta)
    assert 0.0 <= z.canonical_theta < 2 * math.pi
    assert abs(cmath.exp(1j * z.canonical_theta) - z.phase) < 1e-9


def test_lifted_point_rejects_non_finite_theta():
    with pytest.raises(ValueError):
        LiftedPoint(PhasePoint([0.0], [0.0]), float("inf"))


# -- phase accumulation -------------------------------------------------------------


@pytest.mark.parametrize("amplitude", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("kind", [IntegratorKind.IMPLICIT_MIDPOINT, IntegratorKind.RK4])
def test_closed_orbit_accumulates_no_phase(amplitude, kind):
    z0 = LiftedPoint(PhasePoint([amplitude], [0.0]), 0.25)
    traj = integrate_lifted(OSC, z0, 2 * math.pi / 10_000, 10_000, kind)
    hol = holonomy_phase(traj)
    assert abs(hol.delta_theta) < 1e-6
    assert abs(hol.phase - cmath.exp(0.25j)) < 1e-6


def test_closed_orbit_with_verlet_quadrature():
    z0 = LiftedPoint(PhasePoint([1.0], [0.0]), 0.0)
    traj = integrate_lifted(OSC, z0, 2 * math.pi / 10_000, 10_000, IntegratorKind.STORMER_VERLET, OSC_SPLIT)
    assert abs(holonomy_phase(traj).delta_theta) < 1e-6


def test_quarter_orbit_matches_closed_form_action():
    # theta(t) - theta0 = -int (p^2 - q^2)/2 ds with q = A cos s, p = -A sin s
    # gives (A^2/4) sin(2t)
    A, t = 1.5, math.pi / 4
    traj = integrate_lifted(OSC, LiftedPoint(PhasePoint([A], [0.0]), 0.0), t / 2000, 2000)
    assert traj.theta[-1] == pytest.approx(A * A / 4 * math.sin(2 * t), abs=1e-7)


@pytest.mark.parametrize("kind", list(IntegratorKind))
def test_free_particle_phase(kind):
    p0 = 1.3
    H = obs("p1^2/2")
    split = SeparableSplit.parse("p1^2/2", "0", 1)
    traj = integrate_lifted(H, LiftedPoint(PhasePoint([0.0], [p0]), 0.0), 0.01, 500, kind, split)
    assert np.max(np.abs(traj.theta - (-(p0**2) / 2 * traj.t))) < 1e-9


@pytest.mark.parametrize("kind", list(IntegratorKind))
def test_constant_hamiltonian_phase_is_linear(kind):
    c = 2.0
    H = obs("2")
    split = SeparableSplit.parse("0", "2", 1)
    steps = 1000
    traj = integrate_lifted(H, LiftedPoint(PhasePoint([0.5], [-0.5]), 0.1), math.pi / c / steps, steps, kind, split)
    assert np.all(traj.q == 0.5) and np.all(traj.p == -0.5)
    assert traj.theta[-1] == pytest.approx(0.1 + math.pi, abs=1e-12)
    assert abs(holonomy_phase(traj).phase - cmath.exp(1j * (0.1 + math.pi))) < 1e-12


def test_constant_hamiltonian_half_turn_flips_phase():
    c = 3.0
    traj = integrate_lifted(obs("3"), LiftedPoint(PhasePoint([0.0], [0.0]), 0.0), math.pi / c / 100, 100)
    assert abs(holonomy_phase(traj).phase - (-1.0)) < 1e-12


def test_zero_length_trajectory_keeps_initial_phase():
    traj = integrate_lifted(OSC, LiftedPoint(PhasePoint([1.0], [0.0]), 1.1), 0.1, 0)
    hol = holonomy_phase(traj)
    assert hol.phase == cmath.exp(1.1j) and hol.delta_theta == 0.0


def test_theta_is_not_wrapped():
    traj = integrate_lifted(obs("1"), LiftedPoint(PhasePoint([0.0], [0.0]), 0.0), 0.5, 40)
    assert traj.theta[-1] == pytest.approx(20.0, abs=1e-12)
    assert traj.point(-1).winding() == 3


def test_gauge_shift_by_full_turn():
    dt, steps = 1e-2, 500
    a = integrate_lifted(OSC, LiftedPoint(PhasePoint([1.0], [0.3]), 0.2), dt, steps)
    b = integrate_lifted(OSC, LiftedPoint(PhasePoint([1.0], [0.3]), 0.2 + 2 * math.pi), dt, steps)
    assert np.array_equal(a.q, b.q) and np.array_equal(a.p, b.p)
    assert np.max(np.abs((b.theta - a.theta) - 2 * math.pi)) < 1e-9
    assert all(a.point(k).fiber_equivalent(b.point(k), 1e-9) for k in range(0, steps + 1, 50))


def test_lifted_csv_columns():
    traj = integrate_lifted(OSC, LiftedPoint(PhasePoint([1.0], [0.0]), 0.0), 0.1, 3)
    header = traj.to_csv().splitlines()[0]
    assert header == "t,q1,p1,theta,phase_re,phase_im,H"


# -- brackets of lifts --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_lifted_bracket_projects_to_homomorphism(seed):
    rng = np.random.default_rng(seed)
    n = 1 + seed % 2
    f, g = random_polynomial(n, 3, rng), random_polynomial(n, 3, rng)
    base, rate = lifted_lie_bracket(lift_field(f), lift_field(g))
    want = lift_field(poisson_bracket(f, g))
    for w in points(n, 50, rng):
        z = PhasePoint(w[:n], w[n:])
        got = evaluate_field(base, z).as_array()
        ref = evaluate_field(want.base, z).as_array()
        assert np.max(np.abs(got - ref)) < 1e-9
        # the fiber part closes too: [V_f, V_g] = V_{f,g}
        assert abs(at(rate, w) - at(want.theta_rate, w)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_connection_identity_on_random_polynomials(seed):
    rng = np.random.default_rng(seed)
    f = random_polynomial(2, 3, rng)
    V = lift_field(f)
    for w in points(2, 20, rng):
        z = LiftedPoint(PhasePoint(w[:2], w[2:]), 0.0)
        value = at(f, w)
        assert abs(connection_pairing(evaluate_lifted(V, z), z) - value) <= 1e-12 * max(1.0, abs(value))
