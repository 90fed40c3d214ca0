"""Prequantization of (R^2n, w0 = sum dp_i ^ dq_i), computed and checked numerically."""

from .errors import (
    DimensionMismatch,
    DomainError,
    EvenGridError,
    ExpressionSyntaxError,
    NoConvergence,
    NonDecayingSection,
    NonIntegerExponent,
    NonSeparable,
    ParseError,
    PrequantError,
    UnknownFunction,
    UnknownVariable,
)
from .flow import (
    IntegratorKind,
    SeparableSplit,
    Trajectory,
    energy_drift,
    flow_jacobian,
    integrate,
    observable_evolution_defect,
    step,
    symplecticity_defect,
)
from .lift import (
    ConnectionForm,
    LiftedField,
    LiftedPoint,
    LiftedTangent,
    LiftedTrajectory,
    connection_pairing,
    holonomy_phase,
    integrate_lifted,
    lagrangian,
    lift_field,
    project,
)
from .observable import Observable, differentiate, evaluate, parse_observable, simplify
from .prequantum import (
    PrequantumOperator,
    Section,
    apply_prequantum,
    covariant_derivative,
    dirac_residual,
    symmetry_defect,
)
from .quantum import (
    HermitianMatrix,
    energy_expectation,
    projective_distance,
    propagate,
    schrodinger_field,
    tangency_defect,
    unitarity_defect,
)
from .symplectic import (
    HamiltonianField,
    PhasePoint,
    TangentVector,
    VectorField,
    canonical_poisson_bracket,
    evaluate_field,
    field_lie_bracket,
    hamiltonian_vector_field,
    poisson_bracket,
    symplectic_product,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
