"""The full decision loop and its identification criterion.

A run evolves the start state for a fixed time T, looks at the final basis
probabilities, and asks whether the most likely occupation tuple can be
trusted as the problem ground state.  The identification criterion is a
measurement probability strictly greater than 1/2: only the true final
ground state can clear that bar, so a run that clears it is decisive and a
run that does not is retried with a doubled T.

Ground levels of the squared-equation diagonal are frequently degenerate
(every zero in the box shares the value 0), so by default the criterion is
applied to the probability aggregated over the whole degeneracy class of
the top state; ``strict`` mode applies it to the single top basis state
only.  Every report records which interpretation produced it.

A ``solution_exists`` verdict always carries a witness that is re-checked
by exact integer evaluation, independently of the quantum pipeline.  A
``no_solution_within_cutoff`` verdict certifies only the searched box.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .diophantine import (
    Polynomial,
    VariableSemantics,
    evaluate,
    substitute_shift,
    to_text,
)
from .evolution import (
    EvolutionParams,
    EvolutionTrace,
    ExtrapolationResult,
    Integrator,
    extrapolate_to_zero_step,
    evolve,
)
from .fock import FockBasis, StateVector
from .hamiltonians import DEFAULT_ALPHA, AdiabaticFamily

__all__ = [
    "CUTOFF_CAVEAT",
    "Verdict",
    "GroundStateCandidate",
    "classify_final_state",
    "identify_ground_state",
    "DecideConfig",
    "DecisionReport",
    "decide",
    "SweepResult",
    "truncation_sweep",
    "MeasurementRun",
    "sample_measurements",
    "report_to_json_dict",
    "sweep_to_json_dict",
    "REPORT_SCHEMA",
]

CUTOFF_CAVEAT = (
    "a no_solution_within_cutoff verdict certifies only the searched box "
    "[0, cutoff]^k; it never establishes that no solution exists at all"
)


class Verdict(Enum):
    SOLUTION_EXISTS = "solution_exists"
    NO_SOLUTION_WITHIN_CUTOFF = "no_solution_within_cutoff"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GroundStateCandidate:
    """Top basis state of a final distribution plus its degeneracy class."""

    top_index: int
    top_occupation: tuple[int, ...]
    top_probability: float
    class_indices: tuple[int, ...]
    class_value: int
    class_probability: float
    criterion: str  # "class_aggregate" or "single_state"

    @property
    def class_size(self) -> int:
        return len(self.class_indices)

    @property
    def score(self) -> float:
        if self.criterion == "single_state":
            return self.top_probability
        return self.class_probability


def classify_final_state(
    trace: EvolutionTrace,
    family: AdiabaticFamily,
    tie_tol: float = 1e-9,
    strict: bool = False,
) -> GroundStateCandidate:
    """Describe the most likely final basis state without applying the bar.

    The top state is the maximum-probability index, ties within ``tie_tol``
    broken toward the smallest index; its class is every basis state with
    the same exact problem-diagonal value.
    """
    probs = trace.final_probabilities()
    top = int(np.nonzero(probs >= probs.max() - tie_tol)[0][0])
    values = family.exact_problem_values()
    class_indices = tuple(int(i) for i in np.nonzero(values == values[top])[0])
    class_probability = float(probs[list(class_indices)].sum())
    return GroundStateCandidate(
        top_index=top,
        top_occupation=family.basis.occupation(top),
        top_probability=float(probs[top]),
        class_indices=class_indices,
        class_value=int(values[top]),
        class_probability=class_probability,
        criterion="single_state" if strict else "class_aggregate",
    )


def identify_ground_state(
    trace: EvolutionTrace,
    family: AdiabaticFamily,
    tie_tol: float = 1e-9,
    strict: bool = False,
) -> GroundStateCandidate | None:
    """Apply the strictly-greater-than-1/2 identification criterion.

    Returns the candidate when its score clears 1/2, else None.  A score of
    exactly 1/2 does not identify.

    The bar is only meaningful once the deformation has had time to act: a
    weakly displaced start state can itself hold more than half its weight
    in a single diagonal class (a single mode at displacement 1/sqrt(2)
    keeps weight exp(-1/2) on the empty state), so callers should not apply
    the criterion in the sudden (tiny run time) limit.  The decision loop's
    default starting time is comfortably past that regime for desk-scale
    instances.
    """
    candidate = classify_final_state(trace, family, tie_tol=tie_tol, strict=strict)
    return candidate if candidate.score > 0.5 else None


@dataclass(frozen=True)
class DecideConfig:
    """Everything a decision run depends on; embedded in every report."""

    cutoff: int = 8
    semantics: VariableSemantics = VariableSemantics.NON_NEGATIVE
    alphas: complex | tuple[complex, ...] = DEFAULT_ALPHA
    integrator: Integrator = Integrator.MIDPOINT_EXPONENTIAL
    step: float = 0.02
    t0: float = 10.0
    j_max: int = 6
    strict_criterion: bool = False
    tie_tol: float = 1e-9
    record_grid: int = 101
    extrapolation_steps: tuple[float, ...] | None = None

    def time_schedule(self) -> tuple[float, ...]:
        return tuple(self.t0 * 2.0**j for j in range(self.j_max + 1))

    def to_json_dict(self) -> dict:
        alphas = self.alphas
        if isinstance(alphas, (int, float, complex)):
            alphas = (complex(alphas),)
        return {
            "cutoff": self.cutoff,
            "semantics": self.semantics.value,
            "alphas": [[a.real, a.imag] for a in map(complex, alphas)],
            "integrator": self.integrator.value,
            "step": self.step,
            "t0": self.t0,
            "j_max": self.j_max,
            "strict_criterion": self.strict_criterion,
            "tie_tol": self.tie_tol,
            "record_grid": self.record_grid,
            "extrapolation_steps": (
                list(self.extrapolation_steps)
                if self.extrapolation_steps is not None
                else None
            ),
        }


@dataclass(frozen=True)
class DecisionReport:
    """Outcome of one escalating-time decision run."""

    equation: str
    semantics: str
    cutoff: int
    schedule: tuple[float, ...]
    verdict: Verdict
    witness: tuple[int, ...] | None
    top_occupation: tuple[int, ...] | None
    top_probability: float | None
    class_probability: float | None
    class_size: int | None
    class_value: int | None
    successful_time: float | None
    criterion: str
    config: DecideConfig
    wall_clock_seconds: float
    extrapolation: ExtrapolationResult | None = None


def decide(p: Polynomial, config: DecideConfig = DecideConfig()) -> DecisionReport:
    """Run the escalating-time loop until identification or exhaustion.

    Deterministic given the configuration.  Identification reads the top
    occupation tuple; its exact equation value decides between
    ``solution_exists`` (value 0, witness reported in the input semantics
    and re-verified by integer evaluation) and
    ``no_solution_within_cutoff`` (positive ground level on the box).
    """
    start = time.perf_counter()
    if p.num_vars == 0:
        raise ValueError("equation has no variables to solve for")
    shifted = substitute_shift(p, config.semantics)
    basis = FockBasis(shifted.num_vars, config.cutoff)
    family, start_state = AdiabaticFamily.from_polynomial(
        shifted, basis, alphas=config.alphas
    )

    tried: list[float] = []
    candidate: GroundStateCandidate | None = None
    successful_time: float | None = None
    for total_time in config.time_schedule():
        tried.append(total_time)
        params = EvolutionParams(
            total_time=total_time,
            step=min(config.step, total_time),
            integrator=config.integrator,
            record_grid=config.record_grid,
        )
        trace = evolve(family, start_state, params)
        candidate = identify_ground_state(
            trace, family, tie_tol=config.tie_tol, strict=config.strict_criterion
        )
        if candidate is not None:
            successful_time = total_time
            break

    extrapolation = None
    if candidate is not None and config.extrapolation_steps:
        extrapolation = extrapolate_to_zero_step(
            family,
            start_state,
            successful_time,
            config.extrapolation_steps,
            observable=candidate.top_index,
            integrator=config.integrator,
        )

    criterion = "single_state" if config.strict_criterion else "class_aggregate"
    if candidate is None:
        verdict = Verdict.INCONCLUSIVE
        witness = None
    else:
        occupation = candidate.top_occupation
        if config.semantics is VariableSemantics.POSITIVE:
            witness = tuple(n + 1 for n in occupation)
        else:
            witness = occupation
        if candidate.class_value == 0:
            verdict = Verdict.SOLUTION_EXISTS
            if evaluate(p, witness) != 0:
                raise RuntimeError(
                    f"internal certificate failure: {witness} does not solve {p}"
                )
        else:
            verdict = Verdict.NO_SOLUTION_WITHIN_CUTOFF
            witness = None

    return DecisionReport(
        equation=to_text(p),
        semantics=config.semantics.value,
        cutoff=config.cutoff,
        schedule=tuple(tried),
        verdict=verdict,
        witness=witness,
        top_occupation=candidate.top_occupation if candidate else None,
        top_probability=candidate.top_probability if candidate else None,
        class_probability=candidate.class_probability if candidate else None,
        class_size=candidate.class_size if candidate else None,
        class_value=candidate.class_value if candidate else None,
        successful_time=successful_time,
        criterion=criterion,
        config=config,
        wall_clock_seconds=time.perf_counter() - start,
        extrapolation=extrapolation,
    )


@dataclass(frozen=True)
class SweepResult:
    reports: tuple[DecisionReport, ...]
    stable: bool
    caveat: str = CUTOFF_CAVEAT


def truncation_sweep(
    p: Polynomial, cutoffs: list[int] | tuple[int, ...], config: DecideConfig = DecideConfig()
) -> SweepResult:
    """Decide at each cutoff; flag stability when the last two runs agree.

    The cutoff stands in for the unknown decisive bound, so agreement of
    the final two verdicts and witnesses is a stopping heuristic only; see
    ``CUTOFF_CAVEAT``.
    """
    cuts = [int(c) for c in cutoffs]
    if not cuts:
        raise ValueError("cutoff list must not be empty")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("cutoffs must be strictly ascending")
    reports = tuple(decide(p, replace(config, cutoff=c)) for c in cuts)
    stable = len(reports) >= 2 and (
        reports[-1].verdict == reports[-2].verdict
        and reports[-1].witness == reports[-2].witness
    )
    return SweepResult(reports=reports, stable=stable)


@dataclass(frozen=True)
class MeasurementRun:
    """Simulated repeated measurement of a state in the occupation basis."""

    seed: int
    shots: int
    counts: tuple[int, ...]
    exact_probabilities: tuple[float, ...]

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.shots for c in self.counts)

    def to_csv(self) -> str:
        lines = ["index,count,frequency,exact_probability"]
        for i, (count, p) in enumerate(zip(self.counts, self.exact_probabilities)):
            lines.append(f"{i},{count},{count / self.shots!r},{p!r}")
        return "\n".join(lines) + "\n"


def sample_measurements(state: StateVector, shots: int, seed: int) -> MeasurementRun:
    """Draw ``shots`` independent basis indices from |psi_i|^2, seeded.

    Identical seeds give identical runs; the exact probabilities travel
    with the sample so frequency errors can be checked against them.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    return MeasurementRun(
        seed=int(seed),
        shots=int(shots),
        counts=tuple(int(c) for c in counts),
        exact_probabilities=tuple(float(x) for x in probs),
    )


# -- report serialization ----------------------------------------------------

REPORT_SCHEMA: dict = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "decision report",
    "type": "object",
    "required": [
        "schema",
        "equation",
        "semantics",
        "cutoff",
        "schedule",
        "verdict",
        "criterion",
        "config",
        "sidecar",
    ],
    "properties": {
        "schema": {"const": 1},
        "equation": {"type": "string"},
        "semantics": {"enum": ["nonnegative", "positive"]},
        "cutoff": {"type": "integer", "minimum": 1},
        "schedule": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "verdict": {
            "enum": [
                "solution_exists",
                "no_solution_within_cutoff",
                "inconclusive",
            ]
        },
        "witness": {
            "type": ["array", "null"],
            "items": {"type": "integer", "minimum": 0},
        },
        "top_occupation": {
            "type": ["array", "null"],
            "items": {"type": "integer", "minimum": 0},
        },
        "top_probability": {"type": ["number", "null"]},
        "class_probability": {"type": ["number", "null"]},
        "class_size": {"type": ["integer", "null"]},
        "class_value": {"type": ["integer", "null"]},
        "successful_time": {"type": ["number", "null"]},
        "criterion": {"enum": ["class_aggregate", "single_state"]},
        "caveat": {"type": ["string", "null"]},
        "config": {"type": "object"},
        "extrapolation": {"type": ["object", "null"]},
        "sidecar": {"type": "object"},
    },
}


def _extrapolation_to_dict(result: ExtrapolationResult | None) -> dict | None:
    if result is None:
        return None
    return {
        "value": result.value,
        "error_estimate": result.error_estimate,
        "observed_order": result.observed_order,
        "step_sizes": list(result.step_sizes),
        "observable_values": list(result.observable_values),
        "observable": result.observable,
    }


def report_to_json_dict(report: DecisionReport, created_utc: str | None = None) -> dict:
    """Serializable report; timing lives in the ``sidecar`` field so that
    everything outside it is byte-reproducible for a fixed configuration."""
    return {
        "schema": 1,
        "equation": report.equation,
        "semantics": report.semantics,
        "cutoff": report.cutoff,
        "schedule": list(report.schedule),
        "verdict": report.verdict.value,
        "witness": list(report.witness) if report.witness is not None else None,
        "top_occupation": (
            list(report.top_occupation) if report.top_occupation is not None else None
        ),
        "top_probability": report.top_probability,
        "class_probability": report.class_probability,
        "class_size": report.class_size,
        "class_value": report.class_value,
        "successful_time": report.successful_time,
        "criterion": report.criterion,
        "caveat": (
            CUTOFF_CAVEAT
            if report.verdict is Verdict.NO_SOLUTION_WITHIN_CUTOFF
            else None
        ),
        "config": report.config.to_json_dict(),
        "extrapolation": _extrapolation_to_dict(report.extrapolation),
        "sidecar": {
            "wall_clock_seconds": report.wall_clock_seconds,
            "created_utc": created_utc,
        },
    }


def sweep_to_json_dict(result: SweepResult, created_utc: str | None = None) -> dict:
    return {
        "schema": 1,
        "stable": result.stable,
        "caveat": result.caveat,
        "reports": [report_to_json_dict(r, created_utc) for r in result.reports],
    }
