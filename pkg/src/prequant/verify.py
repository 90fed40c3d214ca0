"""Scenario-driven invariant checks, reported as name/tolerance/measured/pass rows.

Every check measures a non-negative defect and passes when the defect is
at most its tolerance.  Tolerances can be overridden by name.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import quantum as Q
from .errors import DomainError
from .flow import (
    IntegratorKind,
    energy_drift,
    flow_jacobian,
    integrate,
    observable_evolution_defect,
    step,
    symplecticity_defect,
)
from .lift import ConnectionForm, LiftedPoint, connection_pairing, evaluate_lifted, integrate_lifted, lift_field, lifted_lie_bracket, project
from .observable import Observable, random_polynomial
from .prequantum import (
    PrequantumOperator,
    dirac_residual,
    normalization_residual,
    symmetry_defect,
)
from .symplectic import (
    PhasePoint,
    TangentVector,
    canonical_poisson_bracket,
    directional_derivative,
    evaluate_field,
    field_lie_bracket,
    hamiltonian_vector_field,
    poisson_bracket,
    symplectic_product,
)

FD_STEP = 1e-5
# below this the drift is accumulated roundoff and its growth says nothing
ROUNDOFF_DRIFT = 1e-12

DEFAULT_TOLERANCES = {
    "derivative_fd_oracle": 1e-6,
    "print_parse_roundtrip": 0.0,
    "simplify_exact": 0.0,
    "simplify_idempotent": 0.0,
    "homomorphism": 1e-9,
    "bracket_sign_relation": 1e-12,
    "pointwise_bracket_identity": 1e-12,
    "jacobi_identity": 1e-9,
    "bracket_antisymmetry": 1e-12,
    "omega_compatibility": 1e-9,
    "connection_identity": 1e-12,
    "projection_identity": 1e-12,
    "constant_injectivity": 0.0,
    "curvature_equals_omega": 0.0,
    "lifted_bracket": 1e-9,
    "energy_drift": 1e-6,
    "energy_drift_growth": 2.0,
    "symplecticity_defect": 1e-5,
    "midpoint_reversibility": 1e-10,
    "observable_evolution_defect": 1e-4,
    "evolution_order_deviation": 1.0,
    "gauge_consistency": 1e-9,
    "prequantum_identity": 0.0,
    "prequantum_linearity": 1e-12,
    "dirac_residual": 1e-9,
    "two_pi_normalization": 1e-12,
    "symmetry_defect": 1e-8,
    "quantum_unitarity": 1e-12,
    "quantum_norm": 1e-12,
    "quantum_tangency": 1e-12,
    "quantum_stationary": 1e-10,
    "quantum_group_property": 1e-11,
    "quantum_energy_expectation": 1e-11,
    "quantum_eigen_residual": 1e-11,
}


@dataclass
class Check:
    name: str
    tolerance: float
    measured: float
    passed: bool

    def as_json(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def sample_points(n, count, rng, half_width=2.0):
    return rng.uniform(-half_width, half_width, size=(count, 2 * n))


def central_difference(f, z, index, h=FD_STEP):
    """Central difference of f along coordinate ``index`` of [q, p]."""
    n = f.n
    zp = np.array(z, dtype=float)
    zm = zp.copy()
    zp[index] += h
    zm[index] -= h
    return (f(zp[:n], zp[n:]) - f(zm[:n], zm[n:])) / (2.0 * h)


def var_names(n):
    return [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]


def fd_derivative_error(f, points):
    """Largest relative gap between symbolic partials and central differences."""
    worst = 0.0
    for idx, v in enumerate(var_names(f.n)):
        df = f.diff(v)
        for z in points:
            try:
                fd = central_difference(f, z, idx)
                sym = df(z[: f.n], z[f.n:])
            except DomainError:
                continue
            worst = max(worst, abs(sym - fd) / max(1.0, abs(fd)))
    return worst


def roundtrip_error(f, points):
    g = Observable.parse(str(f), f.n)
    return _max_gap(f, g, points)


def _max_gap(f, g, points):
    worst = 0.0
    for z in points:
        try:
            a = f(z[: f.n], z[f.n:])
        except DomainError:
            continue
        b = g(z[: f.n], z[f.n:])
        if not (a == b or (math.isnan(a) and math.isnan(b))):
            worst = max(worst, abs(a - b) if math.isfinite(a - b) else math.inf)
    return worst


def _eval_field(X, points):
    fn_vals = []
    for z in points:
        fn_vals.append(evaluate_field(X, PhasePoint(z[: X.n], z[X.n:])).as_array())
    return np.array(fn_vals)


def homomorphism_defect(f, g, points):
    lhs = field_lie_bracket(hamiltonian_vector_field(f), hamiltonian_vector_field(g))
    rhs = hamiltonian_vector_field(poisson_bracket(f, g))
    return float(np.max(np.abs(_eval_field(lhs, points) - _eval_field(rhs, points))))


def _values(f, points):
    return f.evaluate_array(points[:, : f.n].T, points[:, f.n:].T)


class _Recorder:
    def __init__(self, overrides):
        self.tol = dict(DEFAULT_TOLERANCES)
        self.tol.update(overrides or {})
        self.checks = []

    def add(self, name, measured):
        tol = float(self.tol[name])
        measured = float(measured)
        self.checks.append(Check(name, tol, measured, bool(measured <= tol)))


def run_checks(scenario, tolerances=None, seed=None):
    """Run every invariant suite against ``scenario``; returns a list of Check."""
    unknown = set(tolerances or {}) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise KeyError(f"unknown check names: {sorted(unknown)}")
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    rec = _Recorder(tolerances)
    n = scenario.n
    H = scenario.hamiltonian
    corpus = [H, *scenario.observables]
    pts50 = sample_points(n, 50, rng)
    pts100 = sample_points(n, 100, rng)

    # observable core
    rec.add("derivative_fd_oracle", max(fd_derivative_error(f, pts50) for f in corpus))
    rec.add("print_parse_roundtrip", max(roundtrip_error(f, pts50) for f in corpus))
    rec.add("simplify_exact", max(_max_gap(f, f.simplify(), pts50) for f in corpus))
    rec.add(
        "simplify_idempotent",
        sum(f.simplify().simplify().expr is not f.simplify().expr for f in corpus),
    )

    # symplectic structure
    polys = [random_polynomial(n, 3, rng) for _ in range(8)]
    pairs = list(zip(polys[::2], polys[1::2])) + [(H, g) for g in scenario.observables]
    rec.add("homomorphism", max(homomorphism_defect(f, g, pts100) for f, g in pairs))
    sign = 0.0
    pointwise = 0.0
    anti = 0.0
    for f, g in pairs:
        pb = _values(poisson_bracket(f, g), pts100)
        sign = max(sign, float(np.max(np.abs(pb + _values(canonical_poisson_bracket(f, g), pts100)))))
        anti = max(anti, float(np.max(np.abs(pb + _values(poisson_bracket(g, f), pts100)))))
        Xf, Xg = hamiltonian_vector_field(f), hamiltonian_vector_field(g)
        for z in pts100[:20]:
            zp = PhasePoint(z[:n], z[n:])
            w = symplectic_product(evaluate_field(Xf, zp), evaluate_field(Xg, zp))
            pointwise = max(pointwise, abs(w - poisson_bracket(f, g)(z[:n], z[n:])))
    rec.add("bracket_sign_relation", sign)
    rec.add("bracket_antisymmetry", anti)
    rec.add("pointwise_bracket_identity", pointwise)
    f, g, h = polys[:3]
    jac = (
        poisson_bracket(f, poisson_bracket(g, h))
        + poisson_bracket(g, poisson_bracket(h, f))
        + poisson_bracket(h, poisson_bracket(f, g))
    )
    rec.add("jacobi_identity", float(np.max(np.abs(_values(jac, pts100)))))
    compat = 0.0
    for f in corpus + polys[:2]:
        X = hamiltonian_vector_field(f)
        for z in pts50[:10]:
            zp = PhasePoint(z[:n], z[n:])
            xf = evaluate_field(X, zp)
            for e in TangentVector.basis(n):
                compat = max(compat, abs(symplectic_product(xf, e) + directional_derivative(f, zp, e)))
    rec.add("omega_compatibility", compat)

    # prequantum lift
    conn = 0.0
    proj = 0.0
    pts1000 = sample_points(n, 1000, rng)
    for f in corpus + polys[:2]:
        V = lift_field(f)
        vals = _values(f, pts1000)
        for z, fv in zip(pts1000, vals):
            zl = LiftedPoint(PhasePoint(z[:n], z[n:]), 0.0)
            conn = max(conn, abs(connection_pairing(evaluate_lifted(V, zl), zl) - fv))
        base = project(V)
        X = hamiltonian_vector_field(f)
        if base.components != X.components:
            proj = max(proj, float(np.max(np.abs(_eval_field(base, pts100) - _eval_field(X, pts100)))))
    rec.add("connection_identity", conn)
    rec.add("projection_identity", proj)
    consts = [Observable.constant(c, n) for c in (-1.5, 0.0, 1.0, 2.0)]
    same = sum(
        lift_field(a).theta_rate == lift_field(b).theta_rate
        for i, a in enumerate(consts)
        for b in consts[i + 1:]
    )
    rec.add("constant_injectivity", same)
    rec.add("curvature_equals_omega", 0.0 if ConnectionForm(n).curvature_matches_symplectic_form() else 1.0)
    lb = 0.0
    for f, g in pairs[:3]:
        base, rate = lifted_lie_bracket(lift_field(f), lift_field(g))
        target = lift_field(poisson_bracket(f, g))
        lb = max(lb, float(np.max(np.abs(_eval_field(base, pts100) - _eval_field(target.base, pts100)))))
        lb = max(lb, float(np.max(np.abs(_values(rate, pts100) - _values(target.theta_rate, pts100)))))
    rec.add("lifted_bracket", lb)

    # flows
    kind = scenario.integrator
    split = scenario.split
    z0 = scenario.z0
    steps = max(scenario.steps, 2)
    traj = integrate(H, z0, scenario.dt, steps, kind, split)
    drift = energy_drift(traj)
    rec.add("energy_drift", drift)
    if kind is not IntegratorKind.RK4:
        # symplectic schemes: ten times longer must not mean ten times the drift
        longer = energy_drift(integrate(H, z0, scenario.dt, 10 * steps, kind, split))
        rec.add("energy_drift_growth", longer / drift if drift > ROUNDOFF_DRIFT else 1.0)
    T = min(1.0, steps * scenario.dt)
    rec.add("symplecticity_defect", symplecticity_defect(flow_jacobian(H, z0, T, scenario.dt, kind, split)))
    fwd = step(H, z0, scenario.dt, IntegratorKind.IMPLICIT_MIDPOINT)
    back = step(H, fwd, -scenario.dt, IntegratorKind.IMPLICIT_MIDPOINT)
    rec.add("midpoint_reversibility", float(np.max(np.abs(back.as_array() - z0.as_array()))))
    evo_obs = list(scenario.observables) or [Observable.parse("q1", n)]
    rec.add("observable_evolution_defect", max(observable_evolution_defect(f, traj) for f in evo_obs))
    rec.add("evolution_order_deviation", _order_deviation(H, z0, evo_obs[0]))

    lifted = integrate_lifted(H, scenario.initial, scenario.dt, steps, kind, split)
    shifted = integrate_lifted(
        H, LiftedPoint(z0, scenario.initial.theta + 2 * math.pi), scenario.dt, steps, kind, split
    )
    rec.add("gauge_consistency", float(np.max(np.abs(shifted.theta - lifted.theta - 2 * math.pi))))

    # prequantum operators
    hbar = scenario.hbar
    sections = scenario.sections_or_default()
    one = PrequantumOperator(Observable.constant(1.0, n), hbar)
    ident = 0.0
    for s in sections:
        out = one(s)
        ident = max(ident, float(np.max(np.abs(out.evaluate_array(pts100[:, :n].T, pts100[:, n:].T) - s.evaluate_array(pts100[:, :n].T, pts100[:, n:].T)))))
    rec.add("prequantum_identity", ident)
    ops = _operator_corpus(n) + corpus
    lin = 0.0
    a, b = 0.75, -1.25
    for f, g in [(ops[1], ops[2]), (ops[3], H)]:
        for s in sections:
            combo = PrequantumOperator(f * a + g * b, hbar)(s)
            parts = PrequantumOperator(f, hbar)(s).scale(a) + PrequantumOperator(g, hbar)(s).scale(b)
            qv, pv = pts100[:, :n].T, pts100[:, n:].T
            lin = max(lin, float(np.max(np.abs(combo.evaluate_array(qv, pv) - parts.evaluate_array(qv, pv)))))
    rec.add("prequantum_linearity", lin)
    dirac = 0.0
    for i, f in enumerate(ops):
        for g in ops[i + 1:]:
            for s in sections:
                dirac = max(dirac, dirac_residual(f, g, s, pts100, hbar))
    rec.add("dirac_residual", dirac)
    coords = _operator_corpus(n)[1:3]
    rec.add("two_pi_normalization", max(normalization_residual(f, s, pts100) for f in coords for s in sections))
    if n == 1:
        from .prequantum import has_gaussian_factor

        decaying = [s for s in sections if has_gaussian_factor(s)]
        if decaying:
            sym = max(
                symmetry_defect(f, s1, s2, 6.0, 201, hbar)
                for f in coords + [H]
                for s1 in decaying[:2]
                for s2 in decaying[-2:]
            )
            rec.add("symmetry_defect", sym)

    # quantum sphere
    _quantum_checks(rec, rng, hbar)
    return rec.checks


def _operator_corpus(n):
    return [Observable.parse(t, n) for t in ("1", "q1", "p1", "q1^2", "p1^2", "q1*p1", "q1^2*p1")]


def _order_deviation(H, z0, f):
    """|ratio - 4| for the evolution defect under dt halving (midpoint, T = 1)."""
    d = [
        observable_evolution_defect(
            f, integrate(H, z0, dt, int(round(1.0 / dt)), IntegratorKind.IMPLICIT_MIDPOINT)
        )
        for dt in (1e-3, 5e-4)
    ]
    if d[0] < 1e-10:
        # evolution reproduced to roundoff; there is no error term to converge
        return 0.0
    return abs(d[0] / d[1] - 4.0)


def _quantum_checks(rec, rng, hbar):
    unit = norm = tang = stat = group = energy = resid = 0.0
    for d in (2, 4, 8):
        Hm = Q.random_hermitian(d, rng)
        w, V, _ = Q.jacobi_eigh(Hm.matrix)
        resid = max(resid, float(np.max(np.abs(Hm.matrix @ V - V * w))))
        psi0 = Q.random_unit_state(d, rng)
        e0 = Q.energy_expectation(Hm, psi0)
        for t in (0.1, 1.0, 10.0):
            unit = max(unit, Q.unitarity_defect(Hm, t, hbar))
            psi = Q.propagate(Hm, psi0, t, hbar)
            norm = max(norm, abs(np.linalg.norm(psi) - 1.0))
            tang = max(tang, Q.tangency_defect(Hm, psi, hbar))
            energy = max(energy, abs(Q.energy_expectation(Hm, psi) - e0))
            eig = V[:, 0]
            stat = max(stat, Q.projective_distance(Q.propagate(Hm, eig, t, hbar), eig))
        t, s = rng.uniform(0, 5, size=2)
        group = max(
            group,
            float(np.max(np.abs(Q.propagator(Hm, t + s, hbar) - Q.propagator(Hm, t, hbar) @ Q.propagator(Hm, s, hbar)))),
        )
    rec.add("quantum_unitarity", unit)
    rec.add("quantum_norm", norm)
    rec.add("quantum_tangency", tang)
    rec.add("quantum_stationary", stat)
    rec.add("quantum_group_property", group)
    rec.add("quantum_energy_expectation", energy)
    rec.add("quantum_eigen_residual", resid)


def report(scenario, checks, seed):
    return {
        "checks": [c.as_json() for c in checks],
        "seed": int(seed),
        "scenario": scenario.name,
    }
