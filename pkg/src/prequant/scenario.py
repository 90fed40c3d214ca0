"""JSON scenario files: what to simulate and which objects to check.

Schema (all keys except ``n``, ``hamiltonian``, ``initial``, ``dt`` optional)::

    {
      "name": "oscillator",
      "n": 1,
      "hbar": 1.0,
      "hamiltonian": "(p1^2 + q1^2)/2",
      "separable_split": {"T": "p1^2/2", "V": "q1^2/2"},
      "initial": {"q": [1.0], "p": [0.0], "theta": 0.0},
      "integrator": "implicit_midpoint",
      "dt": "2*pi/10000",
      "steps": 10000,
      "observables": ["q1", "q1*p1"],
      "sections": [{"re": "exp(-(q1^2+p1^2)/2)", "im": "0"}],
      "seed": 12345
    }

Numeric fields (``hbar``, ``dt``, entries of ``initial``) accept either a
JSON number or a constant expression string such as ``"2*pi/10000"``.
"""

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import expr as E
from .errors import ParseError, PrequantError
from .flow import IntegratorKind, SeparableSplit
from .lift import LiftedPoint
from .observable import Observable
from .parser import parse_expr
from .prequantum import Section
from .symplectic import PhasePoint

DEFAULT_SEED = 20240917

GAUSSIAN = "exp(-({sq})/2)"


def default_sections(n):
    """Three Gaussian-weighted sections used when a scenario lists none."""
    sq = " + ".join(f"q{i}^2 + p{i}^2" for i in range(1, n + 1))
    g = GAUSSIAN.format(sq=sq)
    return [
        Section.parse(g, "0", n),
        Section.parse(f"{g}*(1 + q1 - p1^2/2)", f"{g}*q1*p1", n),
        Section.parse(f"{g}*(q1*p1 - 1)", f"{g}*(q1 - p1 + q1^2)", n),
    ]


class ConfigError(PrequantError, ValueError):
    pass


def _number(value, what):
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        v = float(value)
    elif isinstance(value, str):
        try:
            e = E.simplify(parse_expr(value, 1))
        except ParseError as exc:
            raise ConfigError(f"{what}: {exc}") from exc
        if E.free_vars(e):
            raise ConfigError(f"{what}: {value!r} is not a constant")
        v = E.compile_exprs((e,), "scalar")([0.0], [0.0])[0]
    else:
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{what}: value must be finite")
    return v


def _vector(values, n, what):
    if not isinstance(values, list) or len(values) != n:
        raise ConfigError(f"{what}: expected a list of {n} numbers")
    return [_number(v, f"{what}[{i}]") for i, v in enumerate(values)]


def _observable(text, n, what):
    if not isinstance(text, str):
        raise ConfigError(f"{what}: expected expression text")
    try:
        return Observable.parse(text, n)
    except ParseError as exc:
        raise ConfigError(f"{what}: {exc}") from exc


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    hamiltonian: Observable
    initial: LiftedPoint
    dt: float
    steps: int = 0
    hbar: float = 1.0
    split: SeparableSplit = None
    integrator: IntegratorKind = IntegratorKind.IMPLICIT_MIDPOINT
    observables: tuple = ()
    sections: tuple = ()
    seed: int = DEFAULT_SEED
    source: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def z0(self):
        return self.initial.base

    def sections_or_default(self):
        return list(self.sections) if self.sections else default_sections(self.n)

    @classmethod
    def from_dict(cls, data, name=None):
        if not isinstance(data, dict):
            raise ConfigError("scenario must be a JSON object")
        for key in ("n", "hamiltonian", "initial", "dt"):
            if key not in data:
                raise ConfigError(f"missing required key {key!r}")
        n = data["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("n must be a positive integer")
        H = _observable(data["hamiltonian"], n, "hamiltonian")

        split = None
        if data.get("separable_split") is not None:
            sp = data["separable_split"]
            if not isinstance(sp, dict) or "T" not in sp or "V" not in sp:
                raise ConfigError("separable_split needs keys 'T' and 'V'")
            try:
                split = SeparableSplit(
                    _observable(sp["T"], n, "separable_split.T"),
                    _observable(sp["V"], n, "separable_split.V"),
                )
            except PrequantError as exc:
                raise ConfigError(f"separable_split: {exc}") from exc

        init = data["initial"]
        if not isinstance(init, dict):
            raise ConfigError("initial must be an object with q, p and optional theta")
        z0 = PhasePoint(_vector(init.get("q"), n, "initial.q"), _vector(init.get("p"), n, "initial.p"))
        theta = _number(init.get("theta", 0.0), "initial.theta")

        try:
            kind = IntegratorKind(data.get("integrator", "implicit_midpoint"))
        except ValueError:
            raise ConfigError(f"unknown integrator {data.get('integrator')!r}") from None
        if kind is IntegratorKind.STORMER_VERLET:
            if split is None:
                raise ConfigError("stormer_verlet requires separable_split")
            try:
                split.check_matches(H, z0)
            except PrequantError as exc:
                raise ConfigError(f"separable_split: {exc}") from exc

        dt = _number(data["dt"], "dt")
        if dt <= 0:
            raise ConfigError("dt must be positive")
        steps = data.get("steps", 0)
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 0:
            raise ConfigError("steps must be a non-negative integer")
        hbar = _number(data.get("hbar", 1.0), "hbar")
        if hbar <= 0:
            raise ConfigError("hbar must be positive")

        obs = data.get("observables", [])
        if not isinstance(obs, list):
            raise ConfigError("observables must be a list of expression texts")
        observables = tuple(_observable(t, n, f"observables[{i}]") for i, t in enumerate(obs))

        secs = data.get("sections") or []
        sections = []
        for i, s in enumerate(secs):
            if not isinstance(s, dict) or "re" not in s:
                raise ConfigError(f"sections[{i}] needs at least 're'")
            sections.append(
                Section(
                    _observable(s["re"], n, f"sections[{i}].re"),
                    _observable(s.get("im", "0"), n, f"sections[{i}].im"),
                )
            )

        seed = data.get("seed", DEFAULT_SEED)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed must be a non-negative integer")

        return cls(
            name=str(data.get("name", name or "scenario")),
            n=n,
            hamiltonian=H,
            initial=LiftedPoint(z0, theta),
            dt=dt,
            steps=steps,
            hbar=hbar,
            split=split,
            integrator=kind,
            observables=observables,
            sections=tuple(sections),
            seed=seed,
            source=data,
        )


def bundled_names():
    root = resources.files("prequant") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_json(path_or_name):
    """Load JSON from a path, or from a bundled file by bare name."""
    path = Path(path_or_name)
    if path.is_file():
        text = path.read_text()
        name = path.stem
    else:
        candidate = resources.files("prequant") / "scenarios" / f"{path_or_name}.json"
        if not candidate.is_file():
            raise ConfigError(f"no such config file or bundled scenario: {path_or_name}")
        text = candidate.read_text()
        name = str(path_or_name)
    try:
        return json.loads(text), name
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path_or_name}: {exc}") from exc


def load_scenario(path_or_name):
    data, name = read_json(path_or_name)
    return Scenario.from_dict(data, name)
