"""Desk-scale simulator of adiabatic ground-state search for Diophantine
solvability, with a classical brute-force oracle for verification."""

__version__ = "0.1.0"

from .diophantine import (
    MinOverBox,
    ParseError,
    Polynomial,
    VariableSemantics,
    brute_force_search,
    evaluate,
    min_over_box,
    parse_equation,
    substitute_shift,
    to_text,
)
from .fock import (
    FockBasis,
    HermitianOperator,
    Operator,
    StateVector,
    TruncationWarning,
    annihilation,
    coherent_state,
    creation,
    number_operator,
)
from .hamiltonians import (
    DEFAULT_ALPHA,
    AdiabaticFamily,
    SpectralProfile,
    build_initial_hamiltonian,
    build_problem_hamiltonian,
    interpolate,
    linear_schedule,
    problem_diagonal,
    smoothstep_schedule,
    spectral_profile,
)
from .evolution import (
    EvolutionParams,
    EvolutionTrace,
    ExtrapolationResult,
    Integrator,
    evolve,
    extrapolate_to_zero_step,
    richardson_from_values,
)
from .decision import (
    DecideConfig,
    DecisionReport,
    GroundStateCandidate,
    MeasurementRun,
    SweepResult,
    Verdict,
    classify_final_state,
    decide,
    identify_ground_state,
    report_to_json_dict,
    sample_measurements,
    truncation_sweep,
)

__all__ = [
    "__version__",
    "MinOverBox",
    "ParseError",
    "Polynomial",
    "VariableSemantics",
    "brute_force_search",
    "evaluate",
    "min_over_box",
    "parse_equation",
    "substitute_shift",
    "to_text",
    "FockBasis",
    "HermitianOperator",
    "Operator",
    "StateVector",
    "TruncationWarning",
    "annihilation",
    "coherent_state",
    "creation",
    "number_operator",
    "DEFAULT_ALPHA",
    "AdiabaticFamily",
    "SpectralProfile",
    "build_initial_hamiltonian",
    "build_problem_hamiltonian",
    "interpolate",
    "linear_schedule",
    "problem_diagonal",
    "smoothstep_schedule",
    "spectral_profile",
    "EvolutionParams",
    "EvolutionTrace",
    "ExtrapolationResult",
    "Integrator",
    "evolve",
    "extrapolate_to_zero_step",
    "richardson_from_values",
    "DecideConfig",
    "DecisionReport",
    "GroundStateCandidate",
    "MeasurementRun",
    "SweepResult",
    "Verdict",
    "classify_final_state",
    "decide",
    "identify_ground_state",
    "report_to_json_dict",
    "sample_measurements",
    "truncation_sweep",
]
