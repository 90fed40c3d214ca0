"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure (the report is still written).
"""

import argparse
import json
import sys

import numpy as np

from . import quantum as Q
from .errors import DomainError, NoConvergence, NonSeparable, ParseError, PrequantError
from .flow import integrate
from .lift import integrate_lifted
from .observable import Observable
from .prequantum import dirac_residual, has_gaussian_factor, normalization_residual, symmetry_defect
from .scenario import ConfigError, load_scenario, read_json
from .symplectic import canonical_poisson_bracket, poisson_bracket
from .verify import DEFAULT_TOLERANCES, _operator_corpus, report, run_checks, sample_points

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECKS = 4


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _dump(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _table_json(name, columns, table):
    return _dump({"scenario": name, "columns": columns, "rows": np.asarray(table).tolist()})


def _scenario(args):
    sc = load_scenario(args.config)
    if getattr(args, "seed", None) is not None:
        sc = type(sc)(**{**sc.__dict__, "seed": args.seed})
    return sc


def cmd_simulate(args):
    sc = _scenario(args)
    traj = integrate(sc.hamiltonian, sc.z0, sc.dt, sc.steps, sc.integrator, sc.split)
    if args.format == "json":
        _write(_table_json(sc.name, traj.columns(), traj.table()), args.out)
    else:
        _write(traj.to_csv(), args.out)
    return EXIT_OK


def cmd_lift(args):
    sc = _scenario(args)
    traj = integrate_lifted(sc.hamiltonian, sc.initial, sc.dt, sc.steps, sc.integrator, sc.split)
    if args.format == "json":
        _write(_table_json(sc.name, traj.columns(), traj.table()), args.out)
    else:
        _write(traj.to_csv(), args.out)
    return EXIT_OK


def _parse_tols(items):
    tols = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown check name {name!r} in --tol")
        try:
            tols[name] = float(value)
        except ValueError:
            raise ConfigError(f"--tol {name}: {value!r} is not a number") from None
    return tols


def cmd_verify(args):
    tols = _parse_tols(args.tol)
    sc = _scenario(args)
    checks = run_checks(sc, tols)
    _write(_dump(report(sc, checks, sc.seed)), args.out)
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark} {c.name}: measured {c.measured:.3e} (tol {c.tolerance:.1e})", file=sys.stderr)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECKS


def cmd_opcheck(args):
    sc = _scenario(args)
    n = sc.n
    rng = np.random.default_rng(sc.seed)
    pts = sample_points(n, 100, rng)
    sections = sc.sections_or_default()
    corpus = _operator_corpus(n) + [sc.hamiltonian, *sc.observables]
    pairs = []
    for i, f in enumerate(corpus):
        for g in corpus[i + 1:]:
            res = max(dirac_residual(f, g, s, pts, sc.hbar) for s in sections)
            pairs.append({"f": str(f), "g": str(g), "residual": res})
    norm = {str(f): max(normalization_residual(f, s, pts) for s in sections) for f in corpus[1:3]}
    sym = []
    if n == 1:
        decaying = [s for s in sections if has_gaussian_factor(s)]
        for f in corpus[1:3] + [sc.hamiltonian]:
            for a in decaying:
                for b in decaying:
                    sym.append(
                        {
                            "f": str(f),
                            "s1": [str(a.re), str(a.im)],
                            "s2": [str(b.re), str(b.im)],
                            "defect": symmetry_defect(f, a, b, 6.0, 201, sc.hbar),
                        }
                    )
    out = {
        "scenario": sc.name,
        "hbar": sc.hbar,
        "seed": sc.seed,
        "pairs": pairs,
        "max_residual": max(p["residual"] for p in pairs),
        "normalization": norm,
        "symmetry": sym,
    }
    _write(_dump(out), args.out)
    return EXIT_OK


def _complex_list(values, what):
    try:
        return np.array([complex(float(re), float(im)) for re, im in values])
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: expected a list of [re, im] pairs") from None


def cmd_quantum(args):
    spec, _ = read_json(args.config)
    if not isinstance(spec, dict):
        raise ConfigError("quantum spec must be a JSON object")
    try:
        d = int(spec["dim"])
        rows = spec["hermitian"]
        psi_raw = spec["psi0"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"quantum spec needs dim, hermitian and psi0 ({exc})") from None
    if not isinstance(rows, list) or len(rows) != d:
        raise ConfigError(f"hermitian must have {d} rows")
    M = np.array([_complex_list(r, f"hermitian[{i}]") for i, r in enumerate(rows)])
    if M.shape != (d, d):
        raise ConfigError(f"hermitian must be {d}x{d}")
    try:
        H = Q.HermitianMatrix(M)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    psi0 = _complex_list(psi_raw, "psi0")
    if psi0.shape != (d,):
        raise ConfigError(f"psi0 must have {d} entries")
    if not Q.is_unit(psi0):
        raise ConfigError("psi0 must have unit norm (within 1e-12)")
    hbar = float(spec.get("hbar", 1.0))
    if hbar <= 0:
        raise ConfigError("hbar must be positive")
    times = [float(t) for t in spec.get("times", [0.0])]
    states = [Q.propagate(H, psi0, t, hbar) for t in times]
    out = {
        "times": times,
        "states": [[[float(c.real), float(c.imag)] for c in psi] for psi in states],
        "norms": [float(np.linalg.norm(psi)) for psi in states],
        "tangency_defects": [Q.tangency_defect(H, psi, hbar) for psi in states],
        "projective_distances": [Q.projective_distance(psi, psi0) for psi in states],
        "energies": [Q.energy_expectation(H, psi) for psi in states],
    }
    _write(_dump(out), args.out)
    return EXIT_OK


def cmd_brackets(args):
    if args.config:
        sc = _scenario(args)
        n, seed = sc.n, sc.seed
    else:
        n, seed = args.n, args.seed if args.seed is not None else 0
    try:
        f = Observable.parse(args.f, n)
        g = Observable.parse(args.g, n)
    except ParseError as exc:
        raise ConfigError(str(exc)) from exc
    omega = poisson_bracket(f, g)
    canon = canonical_poisson_bracket(f, g)
    lines = [
        f"f = {f}",
        f"g = {g}",
        f"omega bracket     {{f,g}} = w0(X_f, X_g) = {omega}",
        f"canonical bracket {{f,g}}_can = sum(f_q g_p - f_p g_q) = {canon}",
    ]
    rng = np.random.default_rng(seed)
    for z in sample_points(n, args.samples, rng):
        q, p = z[:n], z[n:]
        where = ", ".join(f"{name}={v:.6g}" for name, v in zip(
            [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)], z))
        lines.append(f"  at ({where}): omega={omega(q, p):.17g} canonical={canon(q, p):.17g}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="prequant", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default=None):
        p.add_argument("--config", required=fmt_default != "brackets", help="scenario JSON path or bundled name")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        if fmt_default in ("csv", "json"):
            p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    p = sub.add_parser("simulate", help="integrate the base Hamiltonian flow")
    common(p, "csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lift", help="integrate the lifted flow on R^2n x U(1)")
    common(p, "csv")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("verify", help="run every invariant check and write a JSON report")
    common(p)
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a check tolerance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("opcheck", help="Dirac-condition, normalization and symmetry report")
    common(p)
    p.set_defaults(func=cmd_opcheck)

    p = sub.add_parser("quantum", help="propagate a finite-dimensional quantum state")
    common(p)
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("brackets", help="print both Poisson bracket conventions of f and g")
    common(p, "brackets")
    p.add_argument("--f", required=True, help="first observable")
    p.add_argument("--g", required=True, help="second observable")
    p.add_argument("--n", type=int, default=1, help="dimension when no --config is given")
    p.add_argument("--samples", type=int, default=3, help="number of sample points")
    p.set_defaults(func=cmd_brackets)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, NonSeparable, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, NoConvergence, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PrequantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
